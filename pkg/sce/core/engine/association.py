from typing import Optional

import numpy as np
from scipy.integrate import simpson

from sce.core.base import SceBase
from sce.core.basis.sine_basis import SineBasis
from sce.core.copula.copula_model import CopulaModel
from sce.core.exceptions import DomainError
from sce.core.models import AssociationReport, BasisSet, FitResult, GeneratorSpec, PseudoSample


class _FenwickTree:
    """Prefix counts over ranks 1..size."""

    def __init__(self, size: int):
        self._tree = [0] * (size + 1)

    def add(self, position: int) -> None:
        while position < len(self._tree):
            self._tree[position] += 1
            position += position & -position

    def prefix(self, position: int) -> int:
        total = 0
        while position > 0:
            total += self._tree[position]
            position -= position & -position
        return total


class AssociationEstimator(SceBase):
    """
    Spearman's rho and Kendall's tau for the family C(u,v) = uv + ψ(u)ψ(v).

    Within the family ρ = 12(∫ψ)² and 2ρ = 3τ, so tau is always reported as (2/3)·rho.

    Estimators:
        - rho_true: 12·(Simpson ∫ψ)² for a known generator
        - rho_sp:   12·(Σ a_k β_k)² with β_{s,ℓ} = 2^{1−s}/π for a fitted generator
        - rho_np:   6/(n(n−1))·#{(i,j): u_j < u_i, v_j < v_i} − 3/2 from pseudo-observations

    Example:
        estimator = AssociationEstimator()
        estimator.rho_true(GeneratorSpec.fgm(1.0))            # 0.3333...
        estimator.association_report(ps, result, basis).gof_diff
    """

    SMALL_SAMPLE = 64

    def __init__(self, basis: Optional[SineBasis] = None, model: Optional[CopulaModel] = None):
        super().__init__()
        self._basis = basis or SineBasis()
        self._model = model or CopulaModel(self._basis)

    def rho_true(self, g: GeneratorSpec, quad_points: int = 2001) -> float:
        if quad_points < 3 or quad_points % 2 == 0:
            raise DomainError("rho_true", f"quad_points must be odd and >= 3, got {quad_points}")
        x = np.linspace(0.0, 1.0, quad_points)
        integral = simpson(self._model.psi_values(g, x), x=x)
        return float(12.0 * integral * integral)

    def rho_sp(self, fit: FitResult, basis: BasisSet) -> float:
        if fit.a.shape[0] != basis.size:
            raise DomainError("rho_sp", f"fit has {fit.a.shape[0]} coefficients for a basis of size {basis.size}")
        return self.rho_from_coefficients(fit.a, basis)

    def rho_from_coefficients(self, a: np.ndarray, basis: BasisSet) -> float:
        integral = float(np.dot(a, self._basis.integrals(basis)))
        return 12.0 * integral * integral

    # region Nonparametric
    def rho_np(self, ps: PseudoSample) -> float:
        """
        Exact concordance count in O(n log n): sweep u in increasing order and count
        earlier points with strictly smaller v. Points with equal u are queried as a
        group before any of them is inserted, which keeps the u inequality strict.
        """
        n = ps.n
        if n < 2:
            raise DomainError("rho_np", f"at least 2 observations are required, got {n}")
        if n <= self.SMALL_SAMPLE:
            return self.rho_np_bruteforce(ps)
        _, v_rank = np.unique(ps.v, return_inverse=True)
        order = np.argsort(ps.u, kind="stable")
        u_sorted = ps.u[order]
        v_sorted = v_rank.ravel()[order] + 1

        tree = _FenwickTree(int(v_sorted.max()))
        concordant = 0
        start = 0
        while start < n:
            stop = start
            while stop < n and u_sorted[stop] == u_sorted[start]:
                stop += 1
            for position in v_sorted[start:stop]:
                concordant += tree.prefix(int(position) - 1)
            for position in v_sorted[start:stop]:
                tree.add(int(position))
            start = stop
        return 6.0 * concordant / (n * (n - 1)) - 1.5

    @staticmethod
    def rho_np_bruteforce(ps: PseudoSample) -> float:
        """O(n²) reference of `rho_np` straight from the double sum."""
        n = ps.n
        if n < 2:
            raise DomainError("rho_np", f"at least 2 observations are required, got {n}")
        below = (ps.u[None, :] < ps.u[:, None]) & (ps.v[None, :] < ps.v[:, None])
        return 6.0 * int(below.sum()) / (n * (n - 1)) - 1.5
    # endregion

    def association_report(self, ps: PseudoSample, fit: FitResult, basis: BasisSet) -> AssociationReport:
        report = AssociationReport.from_rhos(rho_sp=self.rho_sp(fit, basis), rho_np=self.rho_np(ps))
        self.logger.debug(f"association_report: rho_np={report.rho_np:.6f}, rho_sp={report.rho_sp:.6f}, gof_diff={report.gof_diff:.6f}")
        return report
