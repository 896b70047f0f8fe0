from typing import Optional

import numpy as np


class SceError(Exception):
    """Root of every error raised by the estimator."""


class DomainError(SceError, ValueError):
    """Raised when an argument lies outside the domain of an operation."""

    def __init__(self, operation: str, detail: str):
        super().__init__(f"{operation}: {detail}")
        self.operation = operation
        self.detail = detail


class NonDifferentiableError(DomainError):
    """Raised when a derivative is requested from a generator that has none (k = ∞)."""

    def __init__(self, operation: str):
        super().__init__(operation, "non-differentiable generator (k=inf)")


class BasisIndexError(DomainError):
    """Raised for a basis index (s, ℓ) outside 0 ≤ ℓ ≤ 2(2^s − 1)."""

    def __init__(self, s: int, l: int):
        super().__init__("basis", f"invalid index (s={s}, l={l}); need s >= 0 and 0 <= l <= {2 * (2 ** max(s, 0) - 1)}")
        self.s = s
        self.l = l


class InsufficientMassError(DomainError):
    """Raised when the cell probabilities cannot reach the requested level."""

    def __init__(self, alpha: float, total_mass: float):
        super().__init__("greedy_region", f"total mass {total_mass!r} is below alpha={alpha!r}")
        self.alpha = alpha
        self.total_mass = total_mass


class BisectionError(SceError):
    """Raised when the conditional-distribution inversion cannot converge."""

    def __init__(self, message: str, u: Optional[float] = None, t: Optional[float] = None):
        super().__init__(message)
        self.u = u
        self.t = t


class SolverConvergenceError(SceError):
    """Raised when the constrained least-squares solver stops above its KKT tolerance."""

    def __init__(self, kkt_residual: float, kkt_tol: float, best_iterate: np.ndarray):
        super().__init__(f"solver did not converge: KKT residual {kkt_residual:.3e} > tolerance {kkt_tol:.1e}")
        self.kkt_residual = kkt_residual
        self.kkt_tol = kkt_tol
        self.best_iterate = best_iterate


class InputDataError(SceError, ValueError):
    """Raised for malformed user data; carries the offending row/column when known (1-based)."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[int] = None):
        location = ""
        if row is not None:
            location += f" (row {row}"
            location += f", column {column})" if column is not None else ")"
        super().__init__(f"{message}{location}")
        self.row = row
        self.column = column
