from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Tuple

import numpy as np

from sce.core.base import SceBase
from sce.core.copula.copula_model import CopulaModel
from sce.core.exceptions import BisectionError, DomainError, NonDifferentiableError
from sce.core.models import GeneratorSpec, SampleConfig

_DOUBLE_SCALE = 2.0 ** -53


class PairSampler(SceBase):
    """
    Simulates pairs (u_i, v_i) from C(u,v) = uv + ψ(u)ψ(v) by conditional inversion:
    draw independent uniforms u_i and t_i, then solve t_i = ∂C/∂u (u_i, v_i) for v_i by bisection.

    Random stream:
        numpy Philox (4x64-10) keyed by the 64-bit seed. Pair i consumes raw words 2i (u_i)
        and 2i+1 (t_i); a word w becomes the double (w >> 11)·2^-53. Any slice of pairs can
        be regenerated by jumping the Philox counter, so chunked or threaded sampling returns
        the same pairs as a single pass.

    Example:
        sampler = PairSampler()
        u, v = sampler.sample_pairs(GeneratorSpec.analytic(2.0), SampleConfig(n=500, seed=1))
    """

    def __init__(self, model: Optional[CopulaModel] = None):
        super().__init__()
        self._model = model or CopulaModel()

    @property
    def model(self) -> CopulaModel:
        return self._model

    # region Random stream
    @staticmethod
    def pair_uniforms(seed: int, start: int, stop: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        Uniforms (u_i, t_i) for pairs start ≤ i < stop of the stream keyed by `seed`.

        Stream splitting: the Philox key is the seed and the counter is the pair index,
        so pair i reads words 2i and 2i + 1 (counter block i // 2). This takes the place
        of keying each pair by seed XOR pair index: any range of pairs can be produced
        on its own by jumping the counter, and the values of pair i depend only on
        (seed, i). Word w maps to (w >> 11) · 2⁻⁵³.
        """
        if start < 0 or stop < start:
            raise DomainError("pair_uniforms", f"invalid pair range [{start}, {stop})")
        # each Philox counter block yields 4 words = 2 pairs
        offset = 2 * (start % 2)
        bit_generator = np.random.Philox(key=seed, counter=start // 2)
        raw = bit_generator.random_raw(offset + 2 * (stop - start))[offset:]
        doubles = (raw >> np.uint64(11)).astype(np.float64) * _DOUBLE_SCALE
        return doubles[0::2], doubles[1::2]
    # endregion

    # region Inversion
    def invert_conditional(self, g: GeneratorSpec, u: float, t: float, cfg: SampleConfig) -> float:
        """v with |∂C/∂u (u, v) − t| ≤ bisect_tol, found by bisection on [0, 1]."""
        if not (0.0 < u < 1.0):
            raise DomainError("invert_conditional", "u must lie in (0, 1)")
        if not (0.0 <= t <= 1.0):
            raise DomainError("invert_conditional", "t must lie in [0, 1]")
        return float(self._invert(g, np.array([u]), np.array([t]), cfg)[0])

    def _invert(self, g: GeneratorSpec, u: np.ndarray, t: np.ndarray, cfg: SampleConfig) -> np.ndarray:
        if g.is_limit:
            raise NonDifferentiableError("invert_conditional")

        slope = self.model.psi_deriv(g, u)
        v = np.where(t >= 1.0, 1.0, 0.0)

        # region Bracketing: F(0) = ψ′(u)ψ(0) = 0 and F(1) = 1 + ψ′(u)ψ(1) = 1 for a valid generator
        edges = self.model.psi_values(g, np.array([0.0, 1.0]))
        if abs(edges[0]) > cfg.bisect_tol or abs(edges[1]) > cfg.bisect_tol:
            raise BisectionError(f"conditional distribution does not bracket [0, 1]: psi(0)={edges[0]!r}, psi(1)={edges[1]!r}")
        # endregion

        pending = np.flatnonzero((t > 0.0) & (t < 1.0))
        lo = np.zeros(pending.shape[0])
        hi = np.ones(pending.shape[0])
        for _ in range(cfg.max_iter):
            if pending.shape[0] == 0:
                break
            mid = 0.5 * (lo + hi)
            gap = mid + slope[pending] * self.model.psi_values(g, mid) - t[pending]
            converged = np.abs(gap) <= cfg.bisect_tol
            v[pending[converged]] = mid[converged]
            below = gap < 0.0
            lo = np.where(below, mid, lo)[~converged]
            hi = np.where(below, hi, mid)[~converged]
            pending = pending[~converged]

        if pending.shape[0]:
            first = int(pending[0])
            raise BisectionError(f"bisection did not reach tolerance {cfg.bisect_tol} within {cfg.max_iter} iterations "
                                 f"for {pending.shape[0]} pair(s)", u=float(u[first]), t=float(t[first]))
        return v
    # endregion

    def sample_pairs(self,
                     g: GeneratorSpec,
                     cfg: SampleConfig,
                     chunk_size: Optional[int] = None,
                     workers: int = 1) -> Tuple[np.ndarray, np.ndarray]:
        """
        Draws cfg.n pairs. Pairs may be produced in chunks and on a thread pool; the
        per-pair stream rule makes the output identical for every chunking.
        """
        if g.is_limit:
            raise NonDifferentiableError("sample_pairs")
        chunk = chunk_size or cfg.n
        bounds = [(start, min(start + chunk, cfg.n)) for start in range(0, cfg.n, chunk)]

        def run(bound: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
            u, t = self.pair_uniforms(cfg.seed, *bound)
            # u_i = 0 has probability 2^-53; nudge to the smallest double the conditional accepts
            u = np.where(u > 0.0, u, _DOUBLE_SCALE)
            return u, self._invert(g, u, t, cfg)

        if workers > 1 and len(bounds) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(run, bounds))
        else:
            parts = [run(bound) for bound in bounds]

        u = np.concatenate([p[0] for p in parts])
        v = np.concatenate([p[1] for p in parts])
        self.logger.debug(f"sample_pairs: {cfg.n} pairs from {g.describe()} (seed={cfg.seed}, chunks={len(bounds)})")
        return u, v
