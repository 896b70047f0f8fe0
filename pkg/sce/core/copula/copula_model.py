import math
from typing import Optional, Union, Tuple, List

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from sce.core.base import SceBase
from sce.core.basis.sine_basis import SineBasis
from sce.core.enums import GeneratorKind, ValidityCheck
from sce.core.exceptions import DomainError, NonDifferentiableError
from sce.core.models import CopulaEvalConfig, GeneratorSpec, ValidityReport, Violation

ArrayLike = Union[float, np.ndarray]


class CopulaModel(SceBase):
    """
    The family C(u,v) = uv + ψ(u)ψ(v) for a generating function ψ.

    All operations are pure functions of an immutable GeneratorSpec: scalars give
    floats, arrays are evaluated elementwise.

    Example:
        model = CopulaModel()
        g = GeneratorSpec.analytic(2.0)
        model.psi_eval(g, 0.5)                       # 0.29289...
        model.copula_cdf(g, 0.5, 0.5)                # 0.33578...
        model.validate_generator(g).passed           # True
    """

    def __init__(self, basis: Optional[SineBasis] = None):
        super().__init__()
        self._basis = basis or SineBasis()

    @property
    def basis(self) -> SineBasis:
        return self._basis

    # region Domain checks
    @staticmethod
    def _closed_unit(operation: str, name: str, x: np.ndarray) -> None:
        if np.any(~np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
            raise DomainError(operation, f"{name} must lie in [0, 1]")

    @staticmethod
    def _open_unit(operation: str, name: str, x: np.ndarray) -> None:
        if np.any(~np.isfinite(x)) or np.any(x <= 0.0) or np.any(x >= 1.0):
            raise DomainError(operation, f"{name} must lie in (0, 1)")
    # endregion

    # region Generator
    def psi_values(self, g: GeneratorSpec, x: np.ndarray) -> np.ndarray:
        """ψ on an array of points in [0, 1] (no scalar unwrapping)."""
        x = np.asarray(x, dtype=float)
        if g.kind is GeneratorKind.ANALYTIC:
            if g.k == 1.0:
                return np.zeros_like(x)
            if math.isinf(g.k):
                return np.minimum(x, 1.0 - x)
            return 1.0 - np.power(np.power(x, g.k) + np.power(1.0 - x, g.k), 1.0 / g.k)
        if g.kind is GeneratorKind.FGM:
            return math.sqrt(g.theta) * x * (1.0 - x)
        if g.kind is GeneratorKind.CUBIC:
            return math.sqrt(g.theta) * x * (1.0 - x) * (1.0 - 2.0 * x)
        flat = x.ravel()
        return (self.basis.basis_matrix(g.basis, flat) @ g.coefficients).reshape(x.shape)

    def psi_eval(self, g: GeneratorSpec, x: ArrayLike) -> ArrayLike:
        """ψ(x) for x ∈ [0, 1]; the limit generator k=∞ gives min(x, 1−x)."""
        x_arr = np.asarray(x, dtype=float)
        self._closed_unit("psi_eval", "x", x_arr)
        values = self.psi_values(g, x_arr)
        return float(values) if np.ndim(x) == 0 else values

    def psi_deriv(self, g: GeneratorSpec, x: ArrayLike) -> ArrayLike:
        """ψ′(x) for x ∈ (0, 1); rejects the limit generator, which has a kink at 1/2."""
        if g.is_limit:
            raise NonDifferentiableError("psi_deriv")
        x_arr = np.asarray(x, dtype=float)
        self._open_unit("psi_deriv", "x", x_arr)
        values = self._psi_deriv_values(g, x_arr)
        return float(values) if np.ndim(x) == 0 else values

    def _psi_deriv_values(self, g: GeneratorSpec, x: np.ndarray) -> np.ndarray:
        if g.kind is GeneratorKind.ANALYTIC:
            if g.k == 1.0:
                return np.zeros_like(x)
            k = g.k
            total = np.power(x, k) + np.power(1.0 - x, k)
            return -np.power(total, 1.0 / k - 1.0) * (np.power(x, k - 1.0) - np.power(1.0 - x, k - 1.0))
        if g.kind is GeneratorKind.FGM:
            return math.sqrt(g.theta) * (1.0 - 2.0 * x)
        if g.kind is GeneratorKind.CUBIC:
            return math.sqrt(g.theta) * (1.0 - 6.0 * x + 6.0 * x * x)
        flat = x.ravel()
        return (self.basis.basis_deriv_matrix(g.basis, flat) @ g.coefficients).reshape(x.shape)
    # endregion

    # region Copula
    def copula_cdf(self, g: GeneratorSpec, u: ArrayLike, v: ArrayLike) -> ArrayLike:
        """C(u,v) = uv + ψ(u)ψ(v) on the unit square (broadcasting u against v)."""
        u_arr = np.asarray(u, dtype=float)
        v_arr = np.asarray(v, dtype=float)
        self._closed_unit("copula_cdf", "u", u_arr)
        self._closed_unit("copula_cdf", "v", v_arr)
        values = u_arr * v_arr + self.psi_values(g, u_arr) * self.psi_values(g, v_arr)
        return float(values) if np.ndim(values) == 0 else values

    def conditional_cdf_given_u(self, g: GeneratorSpec, u: ArrayLike, v: ArrayLike) -> ArrayLike:
        """∂C/∂u (u, v) = v + ψ′(u)ψ(v): the distribution of V given U = u."""
        if g.is_limit:
            raise NonDifferentiableError("conditional_cdf_given_u")
        u_arr = np.asarray(u, dtype=float)
        v_arr = np.asarray(v, dtype=float)
        self._open_unit("conditional_cdf_given_u", "u", u_arr)
        self._closed_unit("conditional_cdf_given_u", "v", v_arr)
        values = v_arr + self._psi_deriv_values(g, u_arr) * self.psi_values(g, v_arr)
        return float(values) if np.ndim(values) == 0 else values

    def copula_density(self, g: GeneratorSpec, u: ArrayLike, v: ArrayLike) -> ArrayLike:
        """c(u,v) = 1 + ψ′(u)ψ′(v) on the open unit square."""
        if g.is_limit:
            raise NonDifferentiableError("copula_density")
        u_arr = np.asarray(u, dtype=float)
        v_arr = np.asarray(v, dtype=float)
        self._open_unit("copula_density", "u", u_arr)
        self._open_unit("copula_density", "v", v_arr)
        values = 1.0 + self._psi_deriv_values(g, u_arr) * self._psi_deriv_values(g, v_arr)
        return float(values) if np.ndim(values) == 0 else values

    def rectangle_mass(self, g: GeneratorSpec, u1: float, u2: float, v1: float, v2: float) -> float:
        """C-volume of [u1,u2]×[v1,v2] = (u2−u1)(v2−v1) + (ψ(u2)−ψ(u1))(ψ(v2)−ψ(v1))."""
        if u1 > u2 or v1 > v2:
            raise DomainError("rectangle_mass", "need u1 <= u2 and v1 <= v2")
        corners = np.array([u1, u2, v1, v2], dtype=float)
        self._closed_unit("rectangle_mass", "corners", corners)
        psi = self.psi_values(g, corners)
        return float((u2 - u1) * (v2 - v1) + (psi[1] - psi[0]) * (psi[3] - psi[2]))

    def closed_form_rho(self, g: GeneratorSpec) -> Optional[float]:
        """Spearman's rho where it is known in closed form, else None."""
        if g.kind is GeneratorKind.ANALYTIC:
            if g.k == 1.0:
                return 0.0
            if math.isinf(g.k):
                return 0.75
            return None
        if g.kind is GeneratorKind.FGM:
            return g.theta / 3.0
        if g.kind is GeneratorKind.CUBIC:
            return 0.0
        return None
    # endregion

    # region Validation
    def validate_generator(self, g: GeneratorSpec, cfg: Optional[CopulaEvalConfig] = None) -> ValidityReport:
        """
        Grid validation of a generator on `cfg.grid_n` equispaced points:
            1. boundary zeros ψ(0) = ψ(1) = 0
            2. Lipschitz bound on every adjacent grid pair
            3. nonnegativity (positive quadrant dependence form)
            4. nonnegative mass of every rectangle with corners on the grid
        Violations are reported with their worst point; nothing is raised.
        """
        cfg = cfg or CopulaEvalConfig()
        tol_lip = cfg.lipschitz_tolerance(g.kind)
        grid = np.linspace(0.0, 1.0, cfg.grid_n)
        psi = self.psi_values(g, grid)
        violations: List[Violation] = []

        # region Boundary zeros
        boundary = np.array([abs(psi[0]), abs(psi[-1])])
        if boundary.max() > cfg.tol_neg:
            at = int(np.argmax(boundary))
            violations.append(Violation(check=ValidityCheck.BOUNDARY, worst_value=float(boundary[at]),
                                        point=(float(grid[0] if at == 0 else grid[-1]),),
                                        message=f"psi({grid[0] if at == 0 else grid[-1]}) = {psi[0] if at == 0 else psi[-1]!r}, expected 0"))
        # endregion

        # region Lipschitz
        excess = np.abs(np.diff(psi)) - np.diff(grid)
        worst = int(np.argmax(excess))
        if excess[worst] > tol_lip:
            violations.append(Violation(check=ValidityCheck.LIPSCHITZ, worst_value=float(excess[worst]),
                                        point=(float(grid[worst]), float(grid[worst + 1])),
                                        message=f"|psi(x)-psi(y)| exceeds |x-y| by {excess[worst]:.3e} on [{grid[worst]:.6g}, {grid[worst + 1]:.6g}]"))
        # endregion

        # region Nonnegativity
        lowest = int(np.argmin(psi))
        if psi[lowest] < -cfg.tol_neg:
            violations.append(Violation(check=ValidityCheck.NONNEGATIVE, worst_value=float(-psi[lowest]),
                                        point=(float(grid[lowest]),),
                                        message=f"psi({grid[lowest]:.6g}) = {psi[lowest]:.3e} < 0"))
        # endregion

        # region Rectangle positivity
        delta, rectangle = self._min_rectangle_mass(grid, psi)
        if delta < -cfg.tol_neg:
            violations.append(Violation(check=ValidityCheck.RECTANGLE, worst_value=float(-delta),
                                        point=rectangle,
                                        message=f"rectangle [{rectangle[0]:.6g},{rectangle[1]:.6g}]x[{rectangle[2]:.6g},{rectangle[3]:.6g}] has mass {delta:.3e}"))
        # endregion

        report = ValidityReport(generator=g.describe(), grid_n=cfg.grid_n, checks=list(ValidityCheck), violations=violations)
        for violation in report.violations:
            self.logger.warning(f"validate_generator: {g.describe()} failed {violation.check.value}: {violation.message}")
        return report

    def _min_rectangle_mass(self, grid: np.ndarray, psi: np.ndarray) -> Tuple[float, Tuple[float, float, float, float]]:
        """
        Minimum of Δ = (u2−u1)(v2−v1) + (ψ(u2)−ψ(u1))(ψ(v2)−ψ(v1)) over grid rectangles.

        Δ is the inner product of the increment vectors p = (u2−u1, ψ(u2)−ψ(u1)) and
        q = (v2−v1, ψ(v2)−ψ(v1)), both drawn from the same point set; a linear function
        reaches its minimum on the convex hull, so only hull vertices need pairing.
        """
        lo, hi = np.triu_indices(grid.shape[0], k=1)
        points = np.column_stack([grid[hi] - grid[lo], psi[hi] - psi[lo]])
        candidates = self._hull_vertices(points)
        gram = points[candidates] @ points[candidates].T
        i, j = np.unravel_index(int(np.argmin(gram)), gram.shape)
        p, q = candidates[i], candidates[j]
        return float(gram[i, j]), (float(grid[lo[p]]), float(grid[hi[p]]), float(grid[lo[q]]), float(grid[hi[q]]))

    @staticmethod
    def _hull_vertices(points: np.ndarray) -> np.ndarray:
        extremes = np.unique(np.array([
            np.argmin(points[:, 0]), np.argmax(points[:, 0]),
            np.argmin(points[:, 1]), np.argmax(points[:, 1]),
            np.argmin(points.sum(axis=1)), np.argmax(points.sum(axis=1)),
            np.argmin(points[:, 0] - points[:, 1]), np.argmax(points[:, 0] - points[:, 1]),
        ]))
        try:
            hull = ConvexHull(points)
        except (QhullError, ValueError):
            # collinear increments (e.g. ψ ≡ 0): the segment endpoints are among the extremes
            return extremes
        return np.unique(np.concatenate([hull.vertices, extremes]))
    # endregion
