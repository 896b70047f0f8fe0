from enum import Enum


# region GeneratorKind
class GeneratorKind(Enum):
    """
    Enumeration representing the kind of generating function ψ.

    Kinds:
        - ANALYTIC:  ψ_k(x) = 1 − (x^k + (1−x)^k)^(1/k), k ≥ 1 (k = ∞ gives min(x, 1−x))
        - FGM:       ψ(x) = √θ·x(1−x)
        - CUBIC:     ψ(x) = √θ·x(1−x)(1−2x)
        - FITTED:    ψ̂(x) = Σ a_k e_k(x) over a truncated sine basis

    Example:
        >>> GeneratorKind.FGM
        <GeneratorKind.FGM: 'fgm'>
    """
    ANALYTIC = "analytic"
    FGM = "fgm"
    CUBIC = "cubic"
    FITTED = "fitted"

    @property
    def is_parametric(self) -> bool:
        return self in (GeneratorKind.FGM, GeneratorKind.CUBIC)
# endregion

# region ValidityCheck
class ValidityCheck(Enum):
    """
    Conditions a generating function must satisfy to define a copula.

    Checks:
        - BOUNDARY:     ψ(0) = ψ(1) = 0
        - LIPSCHITZ:    |ψ(x) − ψ(y)| ≤ |x − y|
        - NONNEGATIVE:  ψ ≥ 0 (positive quadrant dependence form)
        - RECTANGLE:    every grid rectangle has nonnegative mass
    """
    BOUNDARY = "BOUNDARY"
    LIPSCHITZ = "LIPSCHITZ"
    NONNEGATIVE = "NONNEGATIVE"
    RECTANGLE = "RECTANGLE"
# endregion

# region ProbabilitySource
class ProbabilitySource(Enum):
    """
    Origin of the cell probabilities used to build high-probability regions.

    Sources:
        - SP:    semiparametric, rectangle formula with the fitted ψ̂
        - NP:    nonparametric, empirical cell frequencies of the pseudo-observations
        - TRUE:  rectangle formula with a known generator (oracle)
    """
    SP = "sp"
    NP = "np"
    TRUE = "true"

    @property
    def default_grid(self) -> int:
        return 8 if self is ProbabilitySource.NP else 30
# endregion

# region ExportType
class ExportType(Enum):
    SAMPLE_CSV = "SAMPLE_CSV"
    MASK_CSV = "MASK_CSV"
    MASK_PGM = "MASK_PGM"
    COEFFICIENTS = "COEFFICIENTS"
    REPORT_CSV = "REPORT_CSV"
    REPORT_JSON = "REPORT_JSON"
    PSI_CSV = "PSI_CSV"
# endregion
