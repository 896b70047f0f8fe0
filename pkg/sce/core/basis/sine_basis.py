from typing import Union

import numpy as np

from sce.core.base import SceBase
from sce.core.exceptions import DomainError
from sce.core.models import BasisIndex, BasisSet

ArrayLike = Union[float, np.ndarray]


class SineBasis(SceBase):
    """
    Dyadic half-sine basis

        e_{s,ℓ}(x) = sin(π/2 · (2^{s+1}x − ℓ)) · 1{2^{s+1}x ∈ [ℓ, ℓ+2]}

    Every function vanishes at 0 and 1, has support width 2^-s, peak value 1 and
    integral 2^{1−s}/π. Scalars in give floats out; arrays are evaluated elementwise.

    Example:
        basis = SineBasis()
        basis.basis_eval(BasisIndex(s=0, ell=0), 0.5)   # 1.0
        basis.basis_matrix(BasisSet(s_max=4), w)        # n × 57
    """

    @staticmethod
    def _check_domain(operation: str, x: np.ndarray) -> None:
        if np.any(~np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
            raise DomainError(operation, "x must lie in [0, 1]")

    @staticmethod
    def _local_coordinate(x: np.ndarray, s: np.ndarray, ell: np.ndarray) -> np.ndarray:
        """t = 2^{s+1}x − ℓ; the support is t ∈ [0, 2]. Exact for dyadic x."""
        return np.ldexp(x, s + 1) - ell

    @staticmethod
    def _as_output(values: np.ndarray, scalar: bool) -> ArrayLike:
        return float(values) if scalar else values

    def basis_eval(self, index: BasisIndex, x: ArrayLike) -> ArrayLike:
        """Value of e_{s,ℓ}; exactly zero outside the open support, hence at 0 and 1."""
        scalar = np.ndim(x) == 0
        x_arr = np.asarray(x, dtype=float)
        self._check_domain("basis_eval", x_arr)
        t = self._local_coordinate(x_arr, np.int64(index.s), np.int64(index.ell))
        inside = (t > 0.0) & (t < 2.0)
        values = np.where(inside, np.sin(0.5 * np.pi * np.clip(t, 0.0, 2.0)), 0.0)
        return self._as_output(values, scalar)

    def basis_deriv(self, index: BasisIndex, x: ArrayLike) -> ArrayLike:
        """
        Derivative 2^s π cos(π/2 · (2^{s+1}x − ℓ)) on the closed support, 0 outside.
        At the support endpoints this is the one-sided value from inside (+2^s π left, −2^s π right).
        """
        scalar = np.ndim(x) == 0
        x_arr = np.asarray(x, dtype=float)
        self._check_domain("basis_deriv", x_arr)
        t = self._local_coordinate(x_arr, np.int64(index.s), np.int64(index.ell))
        inside = (t >= 0.0) & (t <= 2.0)
        values = np.where(inside, np.ldexp(np.pi, index.s) * np.cos(0.5 * np.pi * np.clip(t, 0.0, 2.0)), 0.0)
        return self._as_output(values, scalar)

    @staticmethod
    def basis_integral(index: BasisIndex) -> float:
        """β_{s,ℓ} = ∫_0^1 e_{s,ℓ}(x) dx = 2^{1−s}/π, independent of ℓ."""
        return float(np.ldexp(1.0, 1 - index.s) / np.pi)

    # region Vectorized assembly
    def basis_matrix(self, basis: BasisSet, x: np.ndarray) -> np.ndarray:
        """Matrix with entry [i, k] = e_k(x_i), columns in basis order."""
        x_arr = np.asarray(x, dtype=float).ravel()
        self._check_domain("basis_matrix", x_arr)
        t = self._local_coordinate(x_arr[:, None], basis.scales[None, :], basis.locations[None, :])
        inside = (t > 0.0) & (t < 2.0)
        return np.where(inside, np.sin(0.5 * np.pi * np.clip(t, 0.0, 2.0)), 0.0)

    def basis_deriv_matrix(self, basis: BasisSet, x: np.ndarray) -> np.ndarray:
        """Matrix with entry [i, k] = e′_k(x_i), one-sided at support endpoints."""
        x_arr = np.asarray(x, dtype=float).ravel()
        self._check_domain("basis_deriv_matrix", x_arr)
        scales = basis.scales[None, :]
        t = self._local_coordinate(x_arr[:, None], scales, basis.locations[None, :])
        inside = (t >= 0.0) & (t <= 2.0)
        return np.where(inside, np.ldexp(np.pi, scales) * np.cos(0.5 * np.pi * np.clip(t, 0.0, 2.0)), 0.0)

    def integrals(self, basis: BasisSet) -> np.ndarray:
        """Vector of β_k in basis order."""
        return np.ldexp(1.0, 1 - basis.scales) / np.pi
    # endregion
