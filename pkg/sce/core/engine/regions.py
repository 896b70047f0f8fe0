from typing import Dict, Iterable, Optional

import numpy as np

from sce.core.base import SceBase
from sce.core.copula.copula_model import CopulaModel
from sce.core.enums import ProbabilitySource
from sce.core.exceptions import DomainError, InsufficientMassError
from sce.core.models import CellProbabilities, GeneratorSpec, PseudoSample, RegionMask

# grid-line tolerance for the left-open, right-closed cell convention
_EDGE_TOL = 1e-12


class RegionEstimator(SceBase):
    """
    Minimum-area regions holding probability α, estimated on an N×N grid of cells

        K_{k,ℓ} = ((k−1)/N, k/N] × ((ℓ−1)/N, ℓ/N],   k, ℓ = 1..N

    All cells share the area 1/N², so taking cells in decreasing probability until the
    cumulative mass reaches α gives the smallest cell count (ties go to the smaller (k, ℓ)).

    Cell probabilities:
        - true: P(K) = 1/N² + (ψ(k/N) − ψ((k−1)/N))(ψ(ℓ/N) − ψ((ℓ−1)/N)) for a known ψ
        - sp:   the same rectangle formula with a fitted ψ̂; negative cells are clamped, then renormalized
        - np:   empirical frequencies of the pseudo-observations

    Example:
        estimator = RegionEstimator()
        cells = estimator.cell_probs_true(GeneratorSpec.analytic(2.0), 30)
        mask = estimator.greedy_region(cells, alpha=0.5)
        mask.area
    """

    def __init__(self, model: Optional[CopulaModel] = None):
        super().__init__()
        self._model = model or CopulaModel()

    @staticmethod
    def _check_grid(operation: str, n_grid: int) -> None:
        if int(n_grid) != n_grid or n_grid < 1:
            raise DomainError(operation, f"grid size N must be a positive integer, got {n_grid}")

    def _rectangle_cells(self, g: GeneratorSpec, n_grid: int) -> np.ndarray:
        knots = np.arange(n_grid + 1, dtype=float) / n_grid
        increments = np.diff(self._model.psi_values(g, knots))
        return 1.0 / (n_grid * n_grid) + np.outer(increments, increments)

    # region Cell probabilities
    def cell_probs_true(self, g: GeneratorSpec, n_grid: int) -> CellProbabilities:
        self._check_grid("cell_probs_true", n_grid)
        return CellProbabilities(n_grid=n_grid, p=self._rectangle_cells(g, n_grid), source=ProbabilitySource.TRUE)

    def cell_probs_sp(self, g_fitted: GeneratorSpec, n_grid: int) -> CellProbabilities:
        self._check_grid("cell_probs_sp", n_grid)
        p = self._rectangle_cells(g_fitted, n_grid)
        negative = p < 0.0
        clamped = int(np.count_nonzero(negative))
        if clamped:
            self.logger.warning(f"cell_probs_sp: {clamped} cell(s) with negative mass (min {p.min():.3e}) clamped to zero")
            p = np.where(negative, 0.0, p)
            p = p / p.sum()
        return CellProbabilities(n_grid=n_grid, p=p, source=ProbabilitySource.SP, clamped_cells=clamped)

    def cell_probs_np(self, ps: PseudoSample, n_grid: int) -> CellProbabilities:
        self._check_grid("cell_probs_np", n_grid)
        k = self.cell_index(ps.u, n_grid)
        ell = self.cell_index(ps.v, n_grid)
        counts = np.bincount((k - 1) * n_grid + (ell - 1), minlength=n_grid * n_grid).reshape(n_grid, n_grid)
        return CellProbabilities(n_grid=n_grid, p=counts / ps.n, source=ProbabilitySource.NP)

    @staticmethod
    def cell_index(x: np.ndarray, n_grid: int) -> np.ndarray:
        """1-based index k with x ∈ ((k−1)/N, k/N]; x = 0 falls into the first cell."""
        index = np.ceil(np.asarray(x, dtype=float) * n_grid - _EDGE_TOL).astype(np.int64)
        return np.clip(index, 1, n_grid)
    # endregion

    # region Greedy selection
    def greedy_region(self, cp: CellProbabilities, alpha: float, mass_tol: float = 1e-12) -> RegionMask:
        if not (0.0 < alpha <= 1.0):
            raise DomainError("greedy_region", f"alpha must lie in (0, 1], got {alpha}")
        flat = cp.p.ravel()
        # row-major flattening + stable sort: equal cells keep (k, ℓ) lexicographic order
        order = np.argsort(-flat, kind="stable")
        cumulative = np.cumsum(flat[order])
        reached = np.flatnonzero(cumulative >= alpha - mass_tol)
        if reached.shape[0] == 0:
            raise InsufficientMassError(alpha=alpha, total_mass=float(cumulative[-1]))

        count = int(reached[0]) + 1
        delta = np.zeros(flat.shape[0], dtype=bool)
        delta[order[:count]] = True
        last_k, last_ell = divmod(int(order[count - 1]), cp.n_grid)
        mask = RegionMask(
            n_grid=cp.n_grid,
            delta=delta.reshape(cp.n_grid, cp.n_grid),
            achieved_mass=float(cumulative[count - 1]),
            area=count / (cp.n_grid * cp.n_grid),
            alpha=alpha,
            source=cp.source,
            last_cell=(last_k + 1, last_ell + 1),
        )
        self.logger.debug(f"greedy_region: source={cp.source.value}, N={cp.n_grid}, alpha={alpha}, J={count}, mass={mask.achieved_mass:.6f}")
        return mask

    def nested_masks(self, cp: CellProbabilities, alphas: Iterable[float], mass_tol: float = 1e-12) -> Dict[float, RegionMask]:
        """Masks for several levels on the same cells; a lower level always gives a subset."""
        return {alpha: self.greedy_region(cp, alpha, mass_tol) for alpha in sorted(alphas)}
    # endregion

    # region Comparisons
    @staticmethod
    def total_variation(first: CellProbabilities, second: CellProbabilities) -> float:
        if first.n_grid != second.n_grid:
            raise DomainError("total_variation", f"grid sizes differ: {first.n_grid} != {second.n_grid}")
        return float(0.5 * np.abs(first.p - second.p).sum())

    @staticmethod
    def symmetric_difference_area(first: RegionMask, second: RegionMask) -> float:
        """Area of the cells selected by exactly one of the masks."""
        if first.n_grid != second.n_grid:
            raise DomainError("symmetric_difference_area", f"grid sizes differ: {first.n_grid} != {second.n_grid}")
        return float(np.count_nonzero(first.delta ^ second.delta)) / (first.n_grid * first.n_grid)

    @staticmethod
    def diagonal_share(mask: RegionMask, band: int = 0) -> float:
        """Fraction of selected cells with |k − ℓ| ≤ band."""
        k, ell = np.nonzero(mask.delta)
        if k.shape[0] == 0:
            return 0.0
        return float(np.count_nonzero(np.abs(k - ell) <= band)) / k.shape[0]

    @staticmethod
    def diagonal_block_share(mask: RegionMask) -> float:
        """Fraction of selected cells inside [0, ½]² ∪ [½, 1]² (cells straddling ½ count as half)."""
        n_grid = mask.n_grid
        centers = (np.arange(n_grid) + 0.5) / n_grid
        lower = np.where(centers < 0.5, 1.0, np.where(centers > 0.5, 0.0, 0.5))
        weight = np.outer(lower, lower) + np.outer(1.0 - lower, 1.0 - lower)
        selected = mask.delta.sum()
        if selected == 0:
            return 0.0
        return float((weight * mask.delta).sum() / selected)
    # endregion
