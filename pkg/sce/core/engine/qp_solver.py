from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import null_space, qr, solve_triangular
from scipy.optimize import nnls

from sce.core.base import SceBase
from sce.core.exceptions import DomainError, SolverConvergenceError
from sce.core.models import FitProblem, FitResult


class ConstrainedLeastSquaresSolver(SceBase):
    """
    Solves the inequality-constrained least-squares problem

        min ‖Ma − b‖² + ridge‖a‖²   s.t.   (Ma)_i ≥ 0,   −1 ≤ (M′a)_i ≤ 1

    Method:
        1. stack E = [M; √ridge·I], f = [b; 0] and factor E = QR
        2. substitute z = Ra − Qᵀf, which turns the problem into the least-distance
           program min ‖z‖ s.t. G̃z ≥ h̃ with G̃ = GR⁻¹, and solve it with one
           nonnegative least-squares problem (Lawson & Hanson)
        3. keep that point if it passes the KKT certificate; otherwise run a primal
           active-set method from a = 0, seeded with the nonnegativity rows the
           least-distance point found binding
        4. certify the result with the KKT conditions

    a = 0 is always feasible, so the problem is never infeasible, and every active-set
    iterate stays feasible. Every step is a deterministic dense factorization, so equal
    inputs give equal outputs.

    Example:
        solver = ConstrainedLeastSquaresSolver()
        result = solver.solve_qp(problem)
        result.kkt_residual <= 1e-8
    """

    NNZ_THRESHOLD = 1e-10
    BREAKDOWN_TOL = 1e-10
    STEP_TOL = 1e-12
    DIRECTION_TOL = 1e-12
    MULTIPLIER_TOL = 1e-12
    BINDING_TOL = 1e-6

    def solve_qp(self,
                 prob: FitProblem,
                 kkt_tol: float = 1e-8,
                 ridge: float = 1e-10,
                 tol_feas: float = 1e-8,
                 max_iter: Optional[int] = None) -> FitResult:
        return self.solve_arrays(M=prob.M, Mp=prob.Mp, b=prob.b, kkt_tol=kkt_tol, ridge=ridge, tol_feas=tol_feas, max_iter=max_iter)

    def solve_arrays(self,
                     M: np.ndarray,
                     Mp: np.ndarray,
                     b: np.ndarray,
                     kkt_tol: float = 1e-8,
                     ridge: float = 1e-10,
                     tol_feas: float = 1e-8,
                     max_iter: Optional[int] = None) -> FitResult:
        """Same as `solve_qp` on raw matrices (any column count)."""
        M = np.asarray(M, dtype=float)
        Mp = np.asarray(Mp, dtype=float)
        b = np.asarray(b, dtype=float).ravel()
        if M.ndim != 2 or M.shape != Mp.shape or M.shape[0] != b.shape[0]:
            raise DomainError("solve_qp", f"inconsistent shapes M{M.shape}, M'{Mp.shape}, b{b.shape}")
        if not (np.all(np.isfinite(M)) and np.all(np.isfinite(Mp)) and np.all(np.isfinite(b))):
            raise DomainError("solve_qp", "problem entries must be finite")
        if ridge < 0:
            raise DomainError("solve_qp", f"ridge must be >= 0, got {ridge}")
        n, m = M.shape

        G = np.vstack([M, -Mp, Mp])
        h = np.concatenate([np.zeros(n), -np.ones(n), -np.ones(n)])

        if not np.any(b):
            a = np.zeros(m)
        else:
            E, f, Q, R = self._factor(M, b, ridge)
            start = self._least_distance_solution(Q, R, f, G, h, max_iter)
            if start is not None and self._certified(M, b, G, h, ridge, start, kkt_tol, tol_feas):
                a = start
            else:
                working = self._binding_rows(G, h, start, n)
                self.logger.debug(f"solve_qp: least-distance point not certified; active-set method from a=0 "
                                  f"with {len(working)} seeded rows")
                a = self._active_set(M, b, E, f, G, h, ridge, working, kkt_tol, tol_feas, max_iter)

        result = self._certify(M, Mp, b, G, h, ridge, a, tol_feas)
        self.logger.debug(f"solve_qp: n={n}, m={m}, nnz={result.nnz}, active={result.active_count}, "
                          f"objective={result.objective:.6e}, kkt={result.kkt_residual:.3e}")
        if result.kkt_residual > kkt_tol or result.max_violation > tol_feas:
            raise SolverConvergenceError(kkt_residual=max(result.kkt_residual, result.max_violation), kkt_tol=kkt_tol, best_iterate=result.a)
        return result

    # region Least-distance reduction
    @staticmethod
    def _factor(M: np.ndarray, b: np.ndarray, ridge: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(E, f, Q, R) with E = [M; √ridge·I] = QR and f = [b; 0]."""
        m = M.shape[1]
        if ridge > 0:
            E = np.vstack([M, np.sqrt(ridge) * np.eye(m)])
            f = np.concatenate([b, np.zeros(m)])
        else:
            E, f = M, b

        Q, R = np.linalg.qr(E)
        diagonal = np.abs(np.diag(R))
        if diagonal.min(initial=np.inf) <= np.finfo(float).eps * max(E.shape) * max(diagonal.max(initial=0.0), 1.0):
            raise DomainError("solve_qp", "M is rank deficient; use a positive ridge")
        return E, f, Q, R

    def _least_distance_solution(self,
                                 Q: np.ndarray,
                                 R: np.ndarray,
                                 f: np.ndarray,
                                 G: np.ndarray,
                                 h: np.ndarray,
                                 max_iter: Optional[int]) -> Optional[np.ndarray]:
        """Candidate from the least-distance program, or None when NNLS stalls or breaks down."""
        m = R.shape[1]
        f1 = Q.T @ f

        # G̃ = G R⁻¹ and h̃ = h − G̃ Qᵀf
        G_tilde = solve_triangular(R, G.T, trans="T", lower=False).T
        h_tilde = h - G_tilde @ f1

        E_ldp = np.vstack([G_tilde.T, h_tilde[None, :]])
        f_ldp = np.zeros(m + 1)
        f_ldp[-1] = 1.0
        try:
            u, _ = nnls(E_ldp, f_ldp, maxiter=max_iter)
        except RuntimeError as e:
            self.logger.warning(f"solve_qp: NNLS stopped early: {e}")
            return None

        fitted = E_ldp @ u
        residual = fitted - f_ldp
        if abs(residual[-1]) <= self.BREAKDOWN_TOL * max(1.0, float(np.linalg.norm(fitted))):
            self.logger.debug(f"solve_qp: least-distance breakdown, |r|={abs(residual[-1]):.3e}")
            return None
        z = residual[:m] / (-residual[-1])
        return solve_triangular(R, z + f1, lower=False)

    def _binding_rows(self, G: np.ndarray, h: np.ndarray, start: Optional[np.ndarray], n: int) -> List[int]:
        """Independent nonnegativity rows binding at `start`; all of them are active at a = 0."""
        if start is None:
            return []
        candidates = np.flatnonzero(np.abs(G[:n] @ start - h[:n]) <= self.BINDING_TOL)
        if candidates.shape[0] == 0:
            return []
        _, R, pivots = qr(G[candidates].T, mode="economic", pivoting=True)
        diagonal = np.abs(np.diag(R))
        if diagonal.shape[0] == 0 or diagonal[0] == 0.0:
            return []
        rank = int(np.count_nonzero(diagonal > self.DIRECTION_TOL * max(G.shape) * diagonal[0]))
        return sorted(int(i) for i in candidates[pivots[:rank]])
    # endregion

    # region Active set
    def _active_set(self,
                    M: np.ndarray,
                    b: np.ndarray,
                    E: np.ndarray,
                    f: np.ndarray,
                    G: np.ndarray,
                    h: np.ndarray,
                    ridge: float,
                    working: List[int],
                    kkt_tol: float,
                    tol_feas: float,
                    max_iter: Optional[int]) -> np.ndarray:
        """
        Primal active-set iteration from a = 0.

        Each pass minimizes ‖Ea − f‖ over the null space of the working rows. A blocked
        step stops at the first constraint it reaches and adds that row; an unblocked
        step lands on the subspace minimizer, where a negative multiplier drops its row.
        """
        m = M.shape[1]
        a = np.zeros(m)
        working = list(working)
        row_norms = np.linalg.norm(G, axis=1)
        scale = 1.0 + float(np.linalg.norm(2.0 * M.T @ b))
        limit = max_iter if max_iter is not None else 10 * (G.shape[0] + m) + 100

        for _ in range(limit):
            Z = null_space(G[working]) if working else np.eye(m)
            step = np.zeros(m)
            if Z.shape[1]:
                y, *_ = np.linalg.lstsq(E @ Z, f - E @ a, rcond=None)
                step = Z @ y

            step_norm = float(np.linalg.norm(step))
            if step_norm > self.STEP_TOL * (1.0 + float(np.linalg.norm(a))):
                slack = np.maximum(G @ a - h, 0.0)
                rate = G @ step
                blocking = rate < -self.DIRECTION_TOL * row_norms * step_norm
                blocking[working] = False
                ratios = np.full(G.shape[0], np.inf)
                ratios[blocking] = slack[blocking] / -rate[blocking]
                entering = int(np.argmin(ratios))
                if ratios[entering] < 1.0:
                    a = a + ratios[entering] * step
                    working.append(entering)
                    continue
                a = a + step

            if not working:
                return a
            gradient = 2.0 * E.T @ (E @ a - f)
            multipliers, *_ = np.linalg.lstsq(G[working].T, gradient, rcond=None)
            leaving = int(np.argmin(multipliers))
            if multipliers[leaving] >= -self.MULTIPLIER_TOL * scale:
                return a
            if self._certified(M, b, G, h, ridge, a, kkt_tol, tol_feas):
                return a
            working.pop(leaving)

        self.logger.error(f"solve_qp: active-set method stopped after {limit} iterations")
        optimality, max_violation, _ = self._kkt_terms(M, b, G, h, ridge, a, tol_feas)
        raise SolverConvergenceError(kkt_residual=optimality + max_violation, kkt_tol=kkt_tol, best_iterate=a)
    # endregion

    # region Certificate
    def _kkt_terms(self,
                   M: np.ndarray,
                   b: np.ndarray,
                   G: np.ndarray,
                   h: np.ndarray,
                   ridge: float,
                   a: np.ndarray,
                   tol_feas: float) -> Tuple[float, float, np.ndarray]:
        """
        (scaled stationarity + complementary slackness, max violation, active rows).

        Multipliers of the binding rows are the nonnegative least-squares fit of the
        gradient, so a zero residual certifies optimality of the convex problem.
        """
        slack = G @ a - h
        max_violation = float(max(0.0, -slack.min(initial=0.0)))
        gradient = 2.0 * (M.T @ (M @ a - b) + ridge * a)
        active = np.flatnonzero(slack <= tol_feas)
        if active.shape[0]:
            try:
                multipliers, stationarity = nnls(G[active].T, gradient)
            except RuntimeError as e:
                self.logger.error(f"solve_qp: certificate NNLS stopped early: {e}")
                raise SolverConvergenceError(kkt_residual=float("inf"), kkt_tol=0.0, best_iterate=a) from e
            complementarity = float(np.linalg.norm(multipliers * slack[active]))
        else:
            stationarity = float(np.linalg.norm(gradient))
            complementarity = 0.0
        scale = 1.0 + float(np.linalg.norm(2.0 * M.T @ b))
        return (float(stationarity) + complementarity) / scale, max_violation, active

    def _certified(self,
                   M: np.ndarray,
                   b: np.ndarray,
                   G: np.ndarray,
                   h: np.ndarray,
                   ridge: float,
                   a: np.ndarray,
                   kkt_tol: float,
                   tol_feas: float) -> bool:
        optimality, max_violation, _ = self._kkt_terms(M, b, G, h, ridge, a, tol_feas)
        return optimality + max_violation <= kkt_tol and max_violation <= tol_feas

    def _certify(self,
                 M: np.ndarray,
                 Mp: np.ndarray,
                 b: np.ndarray,
                 G: np.ndarray,
                 h: np.ndarray,
                 ridge: float,
                 a: np.ndarray,
                 tol_feas: float) -> FitResult:
        n, m = M.shape
        optimality, max_violation, active = self._kkt_terms(M, b, G, h, ridge, a, tol_feas)
        residual = M @ a - b
        return FitResult(
            a=a,
            active_lower=tuple(int(i) for i in active[active < n]),
            active_slope_upper=tuple(int(i - n) for i in active[(active >= n) & (active < 2 * n)]),
            active_slope_lower=tuple(int(i - 2 * n) for i in active[active >= 2 * n]),
            kkt_residual=optimality + max_violation,
            objective=float(residual @ residual + ridge * a @ a),
            max_violation=max_violation,
            nnz=int(np.count_nonzero(np.abs(a) > self.NNZ_THRESHOLD)),
            n=n,
            m=m,
        )
    # endregion
