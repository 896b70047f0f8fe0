import math
from typing import Optional, List, Tuple, Dict, Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from sce.core.enums import GeneratorKind, ProbabilitySource, ValidityCheck

MAX_SEED = 2 ** 64 - 1


def _frozen_array(values: Any, dtype: type = float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


# region BasisIndex
class BasisIndex(BaseModel):
    """
    One function e_{s,ℓ} of the dyadic sine basis.

    `s` is the scale (support width 2^-s) and `ell` the location: the support is
    [ℓ·2^-(s+1), (ℓ+2)·2^-(s+1)], so valid locations are 0 ≤ ℓ ≤ 2(2^s − 1).
    """
    model_config = ConfigDict(frozen=True)

    s: int = Field(..., ge=0, description="Scale parameter")
    ell: int = Field(..., ge=0, description="Location parameter")

    @model_validator(mode="after")
    def _check_location(self) -> "BasisIndex":
        if self.ell > 2 * (2 ** self.s - 1):
            raise ValueError(f"location ell={self.ell} outside 0..{2 * (2 ** self.s - 1)} for scale s={self.s}")
        return self

    @property
    def key(self) -> Tuple[int, int]:
        return self.s, self.ell
# endregion

# region BasisSet
class BasisSet(BaseModel):
    """
    Truncation of the basis index set to all (s, ℓ) with s ≤ s_max, sorted by (s, ℓ).

    The ordering fixes the column order of the fit matrices, so fits are reproducible.
    With s_max=4 the set holds 1 + 3 + 7 + 15 + 31 = 57 functions.
    """
    model_config = ConfigDict(frozen=True)

    s_max: int = Field(4, ge=0, le=12, description="Largest scale kept in the truncation")
    indices: Tuple[BasisIndex, ...] = Field(default=(), description="Ordered basis indices")

    @model_validator(mode="after")
    def _populate_indices(self) -> "BasisSet":
        expected = tuple(BasisIndex(s=s, ell=ell) for s in range(self.s_max + 1) for ell in range(2 ** (s + 1) - 1))
        if not self.indices:
            object.__setattr__(self, "indices", expected)
        elif tuple(i.key for i in self.indices) != tuple(i.key for i in expected):
            raise ValueError(f"indices must enumerate every (s, ell) with s <= {self.s_max} in (s, ell) order")
        return self

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def scales(self) -> np.ndarray:
        return np.array([i.s for i in self.indices], dtype=int)

    @property
    def locations(self) -> np.ndarray:
        return np.array([i.ell for i in self.indices], dtype=int)

    def position(self, index: BasisIndex) -> int:
        """Column of `index` in the fit matrices."""
        if index.s > self.s_max:
            raise KeyError(f"index {index.key} is not part of the truncation s_max={self.s_max}")
        return (2 ** (index.s + 1) - 1) - (index.s + 1) + index.ell
# endregion

# region GeneratorSpec
class GeneratorSpec(BaseModel):
    """
    A generating function ψ of the family C(u,v) = uv + ψ(u)ψ(v).

    Kinds:
        - analytic: ψ_k(x) = 1 − (x^k + (1−x)^k)^(1/k) for real k ≥ 1, or k = ∞ (ψ_∞(x) = min(x, 1−x))
        - fgm:      ψ(x) = √θ·x(1−x), θ ∈ (0, 1]
        - cubic:    ψ(x) = √θ·x(1−x)(1−2x), θ ∈ (0, 1]
        - fitted:   ψ̂(x) = Σ a_k e_k(x) over `basis`

    Examples:
        GeneratorSpec.analytic(2.0)
        GeneratorSpec.fgm(theta=1.0)
        GeneratorSpec.fitted(BasisSet(s_max=4), coefficients)
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: GeneratorKind = Field(..., description="Family of the generating function")
    k: Optional[float] = Field(None, description="Exponent of the analytic family (math.inf for the limit)")
    theta: Optional[float] = Field(None, description="Dependence parameter absorbed as √θ for fgm/cubic")
    basis: Optional[BasisSet] = Field(None, description="Basis of a fitted generator")
    coefficients: Optional[np.ndarray] = Field(None, description="Coefficients a_k of a fitted generator, basis order")

    @model_validator(mode="after")
    def _check_parameters(self) -> "GeneratorSpec":
        if self.kind is GeneratorKind.ANALYTIC:
            if self.k is None or math.isnan(self.k) or self.k < 1:
                raise ValueError(f"analytic generator needs k >= 1 (or inf), got {self.k!r}")
        elif self.kind.is_parametric:
            if self.theta is None or not (0.0 < self.theta <= 1.0):
                raise ValueError(f"{self.kind.value} generator needs theta in (0, 1], got {self.theta!r}")
        else:
            if self.basis is None or self.coefficients is None:
                raise ValueError("fitted generator needs a basis and a coefficient vector")
            coefficients = _frozen_array(self.coefficients).ravel()
            if coefficients.shape[0] != self.basis.size:
                raise ValueError(f"fitted generator has {coefficients.shape[0]} coefficients for a basis of size {self.basis.size}")
            if not np.all(np.isfinite(coefficients)):
                raise ValueError("fitted generator coefficients must be finite")
            object.__setattr__(self, "coefficients", coefficients)
        return self

    # region Constructors
    @classmethod
    def analytic(cls, k: float) -> "GeneratorSpec":
        return cls(kind=GeneratorKind.ANALYTIC, k=float(k))

    @classmethod
    def independence(cls) -> "GeneratorSpec":
        return cls.analytic(1.0)

    @classmethod
    def fgm(cls, theta: float = 1.0) -> "GeneratorSpec":
        return cls(kind=GeneratorKind.FGM, theta=float(theta))

    @classmethod
    def cubic(cls, theta: float = 1.0) -> "GeneratorSpec":
        return cls(kind=GeneratorKind.CUBIC, theta=float(theta))

    @classmethod
    def fitted(cls, basis: BasisSet, coefficients: Any) -> "GeneratorSpec":
        return cls(kind=GeneratorKind.FITTED, basis=basis, coefficients=np.asarray(coefficients, dtype=float))
    # endregion

    @property
    def is_limit(self) -> bool:
        return self.kind is GeneratorKind.ANALYTIC and math.isinf(self.k or 0.0)

    def describe(self) -> str:
        if self.kind is GeneratorKind.ANALYTIC:
            return f"analytic(k={self.k})"
        if self.kind.is_parametric:
            return f"{self.kind.value}(theta={self.theta})"
        return f"fitted(s_max={self.basis.s_max}, nnz={int(np.count_nonzero(np.abs(self.coefficients) > 1e-10))})"
# endregion

# region CopulaEvalConfig
class CopulaEvalConfig(BaseModel):
    """Grid resolution and tolerances used when validating a generator."""
    model_config = ConfigDict(frozen=True)

    grid_n: int = Field(201, ge=3, description="Validation grid resolution")
    tol_lip: Optional[float] = Field(None, gt=0, description="Lipschitz tolerance; None picks 1e-9 (closed form) or 1e-6 (fitted)")
    tol_neg: float = Field(1e-9, gt=0, description="Tolerance below zero for the nonnegativity check")

    def lipschitz_tolerance(self, kind: GeneratorKind) -> float:
        if self.tol_lip is not None:
            return self.tol_lip
        return 1e-6 if kind is GeneratorKind.FITTED else 1e-9
# endregion

# region ValidityReport
class Violation(BaseModel):
    """Worst offending point of one failed validity condition."""
    check: ValidityCheck = Field(..., description="Violated condition")
    worst_value: float = Field(..., description="Size of the worst violation")
    point: Tuple[float, ...] = Field(..., description="Grid coordinates where the violation is worst")
    message: str = Field(..., description="Human-readable description")


class ValidityReport(BaseModel):
    """Outcome of the grid validation of a generator; `violations` is empty when every check passes."""
    generator: str = Field(..., description="Description of the validated generator")
    grid_n: int = Field(..., description="Grid resolution used")
    checks: List[ValidityCheck] = Field(default_factory=list, description="Checks that were run")
    violations: List[Violation] = Field(default_factory=list, description="Failed checks with worst points")

    @property
    def passed(self) -> bool:
        return not self.violations

    def failed(self, check: ValidityCheck) -> bool:
        return any(v.check is check for v in self.violations)
# endregion

# region SampleConfig
class SampleConfig(BaseModel):
    """
    Configuration of the conditional-inversion sampler.

    The bisection stops once the conditional CDF is within `bisect_tol` of its target;
    `max_iter` must allow the bracket to shrink below that tolerance.
    """
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="Number of pairs")
    seed: int = Field(0, ge=0, le=MAX_SEED, description="64-bit unsigned seed of the Philox stream")
    bisect_tol: float = Field(1e-10, gt=0, description="Tolerance on |∂C/∂u(u, v) − t|")
    max_iter: int = Field(200, ge=1, description="Bisection iteration cap")

    @model_validator(mode="after")
    def _check_iterations(self) -> "SampleConfig":
        needed = math.ceil(math.log2(1.0 / self.bisect_tol)) if self.bisect_tol < 1 else 1
        if self.max_iter < needed:
            raise ValueError(f"max_iter={self.max_iter} cannot reach bisect_tol={self.bisect_tol} (needs >= {needed})")
        return self
# endregion

# region PseudoSample
class PseudoSample(BaseModel):
    """
    Rank-transformed observations u_i = Rank(x_i)/n, v_i = Rank(y_i)/n and
    the sorted maxima w_(1) ≤ … ≤ w_(n) of w_i = max(u_i, v_i).
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u: np.ndarray = Field(..., description="Pseudo-observations of the first margin")
    v: np.ndarray = Field(..., description="Pseudo-observations of the second margin")
    w_sorted: np.ndarray = Field(..., description="Order statistics of max(u_i, v_i)")

    @model_validator(mode="after")
    def _check_shapes(self) -> "PseudoSample":
        u, v, w = (_frozen_array(a).ravel() for a in (self.u, self.v, self.w_sorted))
        if not (u.shape == v.shape == w.shape):
            raise ValueError(f"pseudo-sample arrays disagree in length: {u.shape[0]}, {v.shape[0]}, {w.shape[0]}")
        if np.any(np.diff(w) < 0):
            raise ValueError("w_sorted must be nondecreasing")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w_sorted", w)
        return self

    @classmethod
    def from_uv(cls, u: Any, v: Any) -> "PseudoSample":
        """Wraps points already on the unit square (no ranking)."""
        u_arr = np.asarray(u, dtype=float)
        v_arr = np.asarray(v, dtype=float)
        w = np.maximum(u_arr, v_arr)
        return cls(u=u_arr, v=v_arr, w_sorted=w[np.argsort(w, kind="stable")])

    @property
    def n(self) -> int:
        return int(self.u.shape[0])
# endregion

# region FitConfig
class FitConfig(BaseModel):
    """Truncation and solver settings of the constrained least-squares fit."""
    model_config = ConfigDict(frozen=True)

    s_max: int = Field(4, ge=0, le=12, description="Basis truncation scale")
    ridge: float = Field(1e-10, ge=0, description="Tikhonov weight added to the least-squares objective")
    kkt_tol: float = Field(1e-8, gt=0, description="Tolerance on the scaled KKT residual")
    tol_feas: float = Field(1e-8, gt=0, description="Constraint feasibility tolerance")
    max_iter: Optional[int] = Field(None, ge=1, description="Iteration cap of the NNLS and active-set solvers (None: solver defaults)")
# endregion

# region FitProblem
class FitProblem(BaseModel):
    """
    Matrices of the constrained least-squares problem

        min ‖Ma − b‖²  s.t.  0 ≤ (Ma)_i,  −1 ≤ (M′a)_i ≤ 1

    with M_{i,k} = e_k(w_(i)), M′_{i,k} = e′_k(w_(i)) and b_i = sqrt(max(0, i/(n+1) − w_(i)²)).
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    M: np.ndarray = Field(..., description="Basis values at the order statistics (n × m)")
    Mp: np.ndarray = Field(..., description="Basis derivatives at the order statistics (n × m)")
    b: np.ndarray = Field(..., description="Square-root targets (n)")
    basis: BasisSet = Field(..., description="Basis defining the columns")

    @field_validator("M", "Mp", "b", mode="before")
    @classmethod
    def _as_array(cls, value: Any) -> np.ndarray:
        return np.asarray(value, dtype=float)

    @model_validator(mode="after")
    def _check_shapes(self) -> "FitProblem":
        M = _frozen_array(self.M)
        Mp = _frozen_array(self.Mp)
        b = _frozen_array(self.b).ravel()
        if M.ndim != 2 or M.shape != Mp.shape or M.shape[0] != b.shape[0]:
            raise ValueError(f"inconsistent problem shapes M{M.shape}, M'{Mp.shape}, b{b.shape}")
        if M.shape[1] != self.basis.size:
            raise ValueError(f"M has {M.shape[1]} columns for a basis of size {self.basis.size}")
        if np.any(b < 0):
            raise ValueError("b must be nonnegative")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "Mp", Mp)
        object.__setattr__(self, "b", b)
        return self

    @property
    def n(self) -> int:
        return int(self.M.shape[0])

    @property
    def m(self) -> int:
        return int(self.M.shape[1])
# endregion

# region FitResult
class FitResult(BaseModel):
    """
    Solution of the constrained least-squares problem with its optimality certificate.

    Active sets list the rows i (0-based, order-statistic order) whose constraint binds:
    `active_lower` for (Ma)_i = 0, `active_slope_upper` for (M′a)_i = 1, `active_slope_lower` for (M′a)_i = −1.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    a: np.ndarray = Field(..., description="Coefficient vector in basis order")
    active_lower: Tuple[int, ...] = Field((), description="Rows with (Ma)_i = 0")
    active_slope_upper: Tuple[int, ...] = Field((), description="Rows with (M'a)_i = 1")
    active_slope_lower: Tuple[int, ...] = Field((), description="Rows with (M'a)_i = -1")
    kkt_residual: float = Field(..., ge=0, description="Scaled stationarity + complementary slackness + infeasibility")
    objective: float = Field(..., ge=0, description="‖Ma − b‖² + ridge‖a‖²")
    max_violation: float = Field(0.0, ge=0, description="Largest constraint violation")
    nnz: int = Field(..., ge=0, description="Number of coefficients with |a_k| > 1e-10")
    n: int = Field(..., ge=0, description="Number of rows (sample size)")
    m: int = Field(..., ge=0, description="Number of basis functions")

    @field_validator("a", mode="before")
    @classmethod
    def _freeze(cls, value: Any) -> np.ndarray:
        return _frozen_array(value).ravel()

    @property
    def active_count(self) -> int:
        return len(self.active_lower) + len(self.active_slope_upper) + len(self.active_slope_lower)

    def is_feasible(self, tol_feas: float = 1e-8) -> bool:
        return self.max_violation <= tol_feas
# endregion

# region AssociationReport
class AssociationReport(BaseModel):
    """Spearman's rho by both estimators, the matching Kendall's tau (τ = 2ρ/3) and |ρ̂_NP − ρ̂_SP|."""
    model_config = ConfigDict(frozen=True)

    rho_sp: float = Field(..., description="Semiparametric Spearman's rho 12(Σ a_k β_k)²")
    rho_np: float = Field(..., description="Nonparametric Spearman's rho from concordant pairs")
    tau_sp: float = Field(..., description="Semiparametric Kendall's tau")
    tau_np: float = Field(..., description="Nonparametric Kendall's tau")
    gof_diff: float = Field(..., ge=0, description="Goodness-of-fit diagnostic |rho_np − rho_sp|")

    @classmethod
    def from_rhos(cls, rho_sp: float, rho_np: float) -> "AssociationReport":
        return cls(
            rho_sp=rho_sp,
            rho_np=rho_np,
            tau_sp=2.0 * rho_sp / 3.0,
            tau_np=2.0 * rho_np / 3.0,
            gof_diff=abs(rho_np - rho_sp),
        )

    def as_lines(self) -> List[Tuple[str, float]]:
        """Fixed field order used by every text report."""
        return [("rho_np", self.rho_np), ("tau_np", self.tau_np), ("rho_sp", self.rho_sp),
                ("tau_sp", self.tau_sp), ("gof_diff", self.gof_diff)]
# endregion

# region CellProbabilities
class CellProbabilities(BaseModel):
    """
    Probabilities p[k−1, ℓ−1] ≈ P(K_{k,ℓ}) of the N×N cells K_{k,ℓ} = ((k−1)/N, k/N] × ((ℓ−1)/N, ℓ/N].
    The first axis follows u (index k), the second follows v (index ℓ).
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n_grid: int = Field(..., ge=1, description="Grid size N")
    p: np.ndarray = Field(..., description="N×N cell probabilities")
    source: ProbabilitySource = Field(..., description="Estimator that produced the probabilities")
    clamped_cells: int = Field(0, ge=0, description="Number of negative cells set to zero before renormalizing")

    @model_validator(mode="after")
    def _check_shape(self) -> "CellProbabilities":
        p = _frozen_array(self.p)
        if p.shape != (self.n_grid, self.n_grid):
            raise ValueError(f"cell probabilities must be {self.n_grid}x{self.n_grid}, got {p.shape}")
        object.__setattr__(self, "p", p)
        return self

    @property
    def total_mass(self) -> float:
        return float(self.p.sum())
# endregion

# region RegionMask
class RegionMask(BaseModel):
    """
    Binary N×N selection δ of the J most probable cells, the estimate of the
    minimum-area region holding probability at least `alpha`.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n_grid: int = Field(..., ge=1, description="Grid size N")
    delta: np.ndarray = Field(..., description="N×N boolean selection, same axes as CellProbabilities.p")
    achieved_mass: float = Field(..., description="Probability of the selected cells")
    area: float = Field(..., ge=0, le=1, description="Selected cell count / N²")
    alpha: float = Field(..., gt=0, le=1, description="Target level")
    source: ProbabilitySource = Field(..., description="Source of the cell probabilities")
    last_cell: Tuple[int, int] = Field(..., description="1-based (k, ℓ) of the last selected cell")

    @field_validator("delta", mode="before")
    @classmethod
    def _freeze(cls, value: Any) -> np.ndarray:
        return _frozen_array(value, dtype=bool)

    @property
    def selected_count(self) -> int:
        return int(self.delta.sum())
# endregion

# region RegionConfig
class RegionConfig(BaseModel):
    """Levels and grid sizes of the region estimation."""
    model_config = ConfigDict(frozen=True)

    alphas: Tuple[float, ...] = Field((0.25, 0.5, 0.75), description="Target levels")
    n_grid: Optional[int] = Field(None, ge=1, description="Grid size; None picks 30 for sp/true and 8 for np")
    mass_tol: float = Field(1e-12, ge=0, description="Slack on the cumulative mass comparison against alpha")

    @field_validator("alphas")
    @classmethod
    def _check_alphas(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not value:
            raise ValueError("at least one alpha is required")
        for alpha in value:
            if not (0.0 < alpha <= 1.0):
                raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
        return tuple(sorted(value))

    def grid_for(self, source: ProbabilitySource) -> int:
        return self.n_grid if self.n_grid is not None else source.default_grid
# endregion

# region ExperimentConfig
class ExperimentConfig(BaseModel):
    """Monte-Carlo study reproducing the generator/rho table: per k, `reps` samples of size `n`."""
    model_config = ConfigDict(frozen=True)

    ks: Tuple[float, ...] = Field((1.0, 2.0, 4.0, 6.0, 8.0), description="Finite exponents of the analytic family")
    n: int = Field(100, ge=2, description="Sample size per repetition")
    reps: int = Field(100, ge=1, description="Repetitions per k")
    seed: int = Field(1, ge=0, le=MAX_SEED, description="Base seed; repetition r uses seed + r")
    s_max: int = Field(4, ge=0, le=12, description="Basis truncation")
    quad_points: int = Field(2001, ge=3, description="Simpson points for rho_true and the L2 error")
    workers: int = Field(1, ge=1, description="Process-pool size for the repetitions")

    @field_validator("ks")
    @classmethod
    def _check_ks(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        for k in value:
            if not math.isfinite(k) or k < 1:
                raise ValueError(f"experiment exponents must be finite and >= 1, got {k}")
        return value

    @field_validator("quad_points")
    @classmethod
    def _check_odd(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError(f"quad_points must be odd, got {value}")
        return value

    @model_validator(mode="after")
    def _check_seed_range(self) -> "ExperimentConfig":
        if self.seed + self.reps - 1 > MAX_SEED:
            raise ValueError("seed + reps - 1 exceeds the 64-bit seed range")
        return self
# endregion

# region ExperimentReport
class ExperimentRow(BaseModel):
    """Monte-Carlo summary for one exponent k."""
    k: float = Field(..., description="Exponent of the analytic generator")
    rho_true: float = Field(..., description="Spearman's rho of C_k by Simpson's rule")
    mean_rho_sp: float = Field(..., description="Mean semiparametric rho")
    std_rho_sp: float = Field(..., ge=0, description="Standard deviation of the semiparametric rho")
    mean_rho_np: float = Field(..., description="Mean nonparametric rho")
    std_rho_np: float = Field(..., ge=0, description="Standard deviation of the nonparametric rho")
    mean_eps: float = Field(..., ge=0, description="Mean L2 error of the fitted generator")
    std_eps: float = Field(..., ge=0, description="Standard deviation of the L2 error")
    mean_nnz: float = Field(..., ge=0, description="Mean number of nonzero coefficients")


class ExperimentReport(BaseModel):
    """Per-k Monte-Carlo means and standard deviations of ε, ρ̂_SP and ρ̂_NP."""
    rows: List[ExperimentRow] = Field(default_factory=list, description="One row per k, in configured order")
    n: int = Field(..., description="Sample size per repetition")
    reps: int = Field(..., ge=1, description="Repetitions per k")
    seed: int = Field(..., description="Base seed")
    s_max: int = Field(..., description="Basis truncation")
    quad_points: int = Field(..., description="Simpson points")
    extra: Optional[Dict[str, Any]] = Field(default_factory=dict, description="Optional run metadata (duration, workers)")

    def row(self, k: float) -> ExperimentRow:
        for row in self.rows:
            if row.k == k:
                return row
        raise KeyError(f"no experiment row for k={k}")
# endregion

# region WorkflowReport
class WorkflowReport(BaseModel):
    """
    Outcome of the real-data flow: rank transform, fit, association measures and
    the nested regions of every requested probability source.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int = Field(..., ge=2, description="Number of observation pairs")
    generator: GeneratorSpec = Field(..., description="Fitted generator")
    fit: FitResult = Field(..., description="Solver output with certificate")
    association: AssociationReport = Field(..., description="Spearman/Kendall estimates and the goodness-of-fit gap")
    regions: Dict[ProbabilitySource, Dict[float, RegionMask]] = Field(default_factory=dict, description="Masks per source and level")
    pqd_warning: bool = Field(False, description="True when the nonparametric rho is negative")

    def summary(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"n": self.n, "m": self.fit.m, "nnz": self.fit.nnz}
        data.update(dict(self.association.as_lines()))
        for source, masks in self.regions.items():
            for alpha, mask in masks.items():
                data[f"{source.value}_area_{alpha}"] = mask.area
        return data
# endregion
