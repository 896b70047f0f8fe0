from typing import Optional, Tuple

import numpy as np
from scipy.integrate import simpson
from scipy.stats import rankdata

from sce.core.base import SceBase
from sce.core.basis.sine_basis import SineBasis
from sce.core.copula.copula_model import CopulaModel
from sce.core.engine.qp_solver import ConstrainedLeastSquaresSolver
from sce.core.exceptions import DomainError, InputDataError
from sce.core.models import BasisSet, FitConfig, FitProblem, FitResult, GeneratorSpec, PseudoSample


class GeneratorFitter(SceBase):
    """
    Estimates ψ from paired observations.

    Pipeline:
        1. rank transform to pseudo-observations u_i = Rank(x_i)/n, v_i = Rank(y_i)/n
        2. w_i = max(u_i, v_i) has distribution C(w, w) = w² + ψ(w)², so ψ(w_(i)) ≈ sqrt(i/(n+1) − w_(i)²)
        3. least squares on the sine basis, constrained at the order statistics to ψ ≥ 0 and |ψ′| ≤ 1

    Example:
        fitter = GeneratorFitter()
        generator, result = fitter.fit_generator(x, y, BasisSet(s_max=4))
        fitter.model.psi_eval(generator, 0.5)
    """

    def __init__(self,
                 basis: Optional[SineBasis] = None,
                 solver: Optional[ConstrainedLeastSquaresSolver] = None,
                 model: Optional[CopulaModel] = None):
        super().__init__()
        self._basis = basis or SineBasis()
        self._solver = solver or ConstrainedLeastSquaresSolver()
        self._model = model or CopulaModel(self._basis)

    @property
    def model(self) -> CopulaModel:
        return self._model

    @property
    def solver(self) -> ConstrainedLeastSquaresSolver:
        return self._solver

    def rank_transform(self, x: np.ndarray, y: np.ndarray) -> PseudoSample:
        """Midranks divided by n; ties in w keep the original order."""
        x_arr = np.asarray(x, dtype=float).ravel()
        y_arr = np.asarray(y, dtype=float).ravel()
        if x_arr.shape[0] != y_arr.shape[0]:
            raise InputDataError(f"x and y differ in length: {x_arr.shape[0]} != {y_arr.shape[0]}")
        if x_arr.shape[0] < 2:
            raise InputDataError(f"at least 2 observations are required, got {x_arr.shape[0]}")
        for column, values in ((1, x_arr), (2, y_arr)):
            bad = np.flatnonzero(~np.isfinite(values))
            if bad.shape[0]:
                raise InputDataError("non-finite observation", row=int(bad[0]) + 1, column=column)

        n = x_arr.shape[0]
        u = rankdata(x_arr, method="average") / n
        v = rankdata(y_arr, method="average") / n
        return PseudoSample.from_uv(u, v)

    def build_problem(self, ps: PseudoSample, basis: BasisSet) -> FitProblem:
        n = ps.n
        w = ps.w_sorted
        levels = np.arange(1, n + 1, dtype=float) / (n + 1)
        radicand = levels - w * w
        clamped = int(np.count_nonzero(radicand < 0))
        if clamped:
            self.logger.debug(f"build_problem: clamped {clamped} negative radicand(s) to zero")
        return FitProblem(
            M=self._basis.basis_matrix(basis, w),
            Mp=self._basis.basis_deriv_matrix(basis, w),
            b=np.sqrt(np.maximum(radicand, 0.0)),
            basis=basis,
        )

    def fit_pseudo_sample(self, ps: PseudoSample, basis: BasisSet, cfg: Optional[FitConfig] = None) -> Tuple[GeneratorSpec, FitResult]:
        cfg = cfg or FitConfig(s_max=basis.s_max)
        problem = self.build_problem(ps, basis)
        result = self._solver.solve_qp(problem, kkt_tol=cfg.kkt_tol, ridge=cfg.ridge, tol_feas=cfg.tol_feas, max_iter=cfg.max_iter)
        return GeneratorSpec.fitted(basis, result.a), result

    def fit_generator(self,
                      x: np.ndarray,
                      y: np.ndarray,
                      basis: Optional[BasisSet] = None,
                      cfg: Optional[FitConfig] = None) -> Tuple[GeneratorSpec, FitResult]:
        """
        Rank transform, problem assembly and constrained solve in one call.
        The data are assumed positively quadrant dependent; this is not verified.
        """
        cfg = cfg or FitConfig()
        basis = basis or BasisSet(s_max=cfg.s_max)
        ps = self.rank_transform(x, y)
        generator, result = self.fit_pseudo_sample(ps, basis, cfg)
        self.logger.info(f"Fitted generator on n={ps.n} (s_max={basis.s_max}): nnz={result.nnz}, "
                         f"objective={result.objective:.6e}, kkt={result.kkt_residual:.2e}")
        return generator, result

    def l2_error(self, g: GeneratorSpec, fitted: GeneratorSpec, quad_points: int = 2001) -> float:
        """ε = (∫_0^1 (ψ − ψ̂)²)^(1/2) by Simpson's rule on `quad_points` equispaced nodes."""
        if quad_points < 3 or quad_points % 2 == 0:
            raise DomainError("l2_error", f"quad_points must be odd and >= 3, got {quad_points}")
        x = np.linspace(0.0, 1.0, quad_points)
        gap = self._model.psi_values(g, x) - self._model.psi_values(fitted, x)
        return float(np.sqrt(max(simpson(gap * gap, x=x), 0.0)))
