"""Convex QP solver: HiGHS phase-1 feasibility check, then a Mehrotra predictor-corrector IPM.

The interior-point method works on::

    min ½ xᵀHx + fᵀx   s.t.  A x = b,  G x + s = h,  s >= 0

and solves each Newton system in the reduced (quasi-definite) form::

    [ H + GᵀWG + δI   Aᵀ  ] [dx]
    [ A              -δI  ] [dy]

with ``W = diag(z / s)``, factored by a sparse LU and cleaned up by a few
steps of iterative refinement against the unregularized system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from loguru import logger
from scipy.optimize import linprog
from scipy.sparse.linalg import splu

from navstack import metrics
from navstack.config import settings
from navstack.errors import UnboundedProblemError
from navstack.miqp.problem import QuadraticProgram, ensure_convex

_REG = 1e-9
_REG_GROWTH = 100.0
_REG_RETRIES = 4
# Slacks are floored and W entries capped before the Newton matrix is formed.
_SLACK_FLOOR = 1e-14
_W_CAP = 1e12
_STEP_FRACTION = 0.99
_REFINE_STEPS = 3
_DIVERGENCE = 1e10
# Residual level accepted when the iteration budget runs out.
_ACCEPTABLE = 1e-7


@dataclass(frozen=True)
class QPResult:
    """Primal point, objective and multipliers (``y`` equalities, ``lam`` inequalities)."""

    z: np.ndarray | None
    j: float
    feasible: bool
    iterations: int = 0
    converged: bool = True
    residual: float = 0.0
    y: np.ndarray | None = None
    lam: np.ndarray | None = None


class _SingularSystem(RuntimeError):
    pass


def _infeasible(iterations: int = 0) -> QPResult:
    metrics.qp_solves.labels(result="infeasible").inc()
    return QPResult(z=None, j=math.inf, feasible=False, iterations=iterations)


def _phase_one(qp: QuadraticProgram) -> tuple[bool, np.ndarray | None]:
    """Feasibility of the constraint set via HiGHS (zero objective)."""
    if qp.A_eq.shape[0] == 0 and qp.A_in.shape[0] == 0:
        return True, np.zeros(qp.n)
    res = linprog(
        c=np.zeros(qp.n),
        A_ub=qp.A_in if qp.A_in.shape[0] else None,
        b_ub=qp.b_in if qp.A_in.shape[0] else None,
        A_eq=qp.A_eq if qp.A_eq.shape[0] else None,
        b_eq=qp.b_eq if qp.A_eq.shape[0] else None,
        bounds=(None, None),
        method="highs",
    )
    if res.status == 2:
        return False, None
    if res.status != 0:
        logger.warning("[qp] phase-1 ended with status {} ({}); continuing", res.status, res.message)
        return True, None
    return True, np.asarray(res.x, dtype=float)


class _KKTSystem:
    """Factored reduced Newton matrix for one IPM iteration.

    The regularization starts at ``_REG`` relative to the largest entry of
    ``H + GᵀWG`` and grows by ``_REG_GROWTH`` each time the LU reports a
    singular factor.
    """

    def __init__(self, H: sp.csc_matrix, A: sp.csr_matrix, G: sp.csr_matrix, w: np.ndarray):
        self.n, self.m = H.shape[0], A.shape[0]
        self.A = A
        self.Hw = (H + G.T @ sp.diags(w) @ G).tocsc()
        scale = 1.0 + (float(abs(self.Hw).max()) if self.Hw.nnz else 0.0)
        self.reg = _REG * scale
        for attempt in range(_REG_RETRIES + 1):
            try:
                self.lu = splu(self._matrix(self.reg))
                return
            except RuntimeError as exc:
                if attempt == _REG_RETRIES:
                    raise _SingularSystem(str(exc)) from exc
                self.reg *= _REG_GROWTH
                logger.debug("[qp] singular KKT factor; regularization raised to {:.1e}", self.reg)

    def _matrix(self, reg: float) -> sp.csc_matrix:
        top = sp.hstack([self.Hw + reg * sp.identity(self.n), self.A.T])
        bottom = sp.hstack([self.A, -reg * sp.identity(self.m)])
        return sp.vstack([top, bottom]).tocsc()

    def _apply(self, v: np.ndarray) -> np.ndarray:
        dx, dy = v[: self.n], v[self.n :]
        return np.concatenate([self.Hw @ dx + self.A.T @ dy, self.A @ dx])

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        sol = self.lu.solve(rhs)
        for _ in range(_REFINE_STEPS):
            sol = sol + self.lu.solve(rhs - self._apply(sol))
        return sol


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-v[neg] / dv[neg])))


@dataclass
class _Iterate:
    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    converged: bool
    iterations: int
    residual: float


def _interior_point(qp: QuadraticProgram, x0: np.ndarray, tol: float, max_iter: int) -> _Iterate:
    H, f = qp.H, qp.f
    A, b = qp.A_eq, qp.b_eq
    G, h = qp.A_in, qp.b_in
    n, me, mi = qp.n, A.shape[0], G.shape[0]

    x = x0.copy()
    y = np.zeros(me)
    s = np.maximum(h - G @ x, 1.0)
    z = np.ones(mi)

    scale_f = 1.0 + float(np.max(np.abs(f), initial=0.0))
    scale_b = 1.0 + float(np.max(np.abs(b), initial=0.0))
    scale_h = 1.0 + float(np.max(np.abs(h), initial=0.0))

    residual = math.inf
    for it in range(1, max_iter + 1):
        r_d = H @ x + f + A.T @ y + G.T @ z
        r_e = A @ x - b
        r_i = G @ x + s - h
        mu = float(s @ z) / mi if mi else 0.0

        residual = max(
            float(np.max(np.abs(r_d), initial=0.0)) / scale_f,
            float(np.max(np.abs(r_e), initial=0.0)) / scale_b,
            float(np.max(np.abs(r_i), initial=0.0)) / scale_h,
            mu,
        )
        if residual <= tol:
            return _Iterate(x, y, z, True, it - 1, residual)
        if float(np.max(np.abs(x), initial=0.0)) > _DIVERGENCE:
            raise UnboundedProblemError("interior-point iterates diverge; QP is unbounded")

        s_safe = np.maximum(s, _SLACK_FLOOR)
        w = np.minimum(z / s_safe, _W_CAP) if mi else np.zeros(0)
        try:
            kkt = _KKTSystem(H, A, G, w)
        except _SingularSystem as exc:
            logger.warning("[qp] KKT factorization failed at iteration {}: {}", it, exc)
            return _Iterate(x, y, z, residual <= _ACCEPTABLE, it - 1, residual)

        def direction(r_c: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
            rhs_x = -r_d - G.T @ (w * r_i - r_c / s_safe) if mi else -r_d
            sol = kkt.solve(np.concatenate([rhs_x, -r_e]))
            dx, dy = sol[:n], sol[n:]
            dz = w * (G @ dx + r_i) - r_c / s_safe
            ds = -(r_c + s * dz) / z
            return dx, dy, dz, ds

        if mi == 0:
            dx, dy, _, _ = direction(np.zeros(0))
            x, y = x + dx, y + dy
            continue

        # Predictor.
        r_c = s * z
        dx, dy, dz, ds = direction(r_c)
        alpha = min(_max_step(s, ds), _max_step(z, dz))
        mu_aff = float((s + alpha * ds) @ (z + alpha * dz)) / mi
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0

        # Corrector.
        r_c = s * z + ds * dz - sigma * mu
        dx, dy, dz, ds = direction(r_c)
        alpha = _STEP_FRACTION * min(_max_step(s, ds), _max_step(z, dz))
        alpha = min(alpha, 1.0)

        x, y, z, s = x + alpha * dx, y + alpha * dy, z + alpha * dz, s + alpha * ds
        logger.trace("[qp] it={} mu={:.3e} residual={:.3e} alpha={:.3f}", it, mu, residual, alpha)

    return _Iterate(x, y, z, residual <= _ACCEPTABLE, max_iter, residual)


def solve_qp(
    qp: QuadraticProgram,
    tol: float | None = None,
    max_iter: int | None = None,
    check_convex: bool = True,
) -> QPResult:
    """Solve a convex QP; infeasible problems return ``feasible=False, j=+inf``.

    A solve that cannot reach the tolerance (iteration budget, or a Newton
    matrix that stays singular) returns its last iterate with
    ``converged=False``. Raises NonConvexProblemError for a non-PSD ``H``
    (when ``check_convex``) and UnboundedProblemError when the iterates diverge.
    """
    tol = settings.qp_tol if tol is None else tol
    max_iter = settings.qp_max_iter if max_iter is None else max_iter
    if check_convex:
        ensure_convex(qp.H)
    if qp.known_infeasible:
        return _infeasible()

    feasible, x0 = _phase_one(qp)
    if not feasible:
        return _infeasible()
    if x0 is None:
        x0 = np.zeros(qp.n)

    final = _interior_point(qp, x0, tol, max_iter)
    if not final.converged:
        logger.warning(
            "[qp] stopped after {} iterations with scaled residual {:.2e}",
            final.iterations,
            final.residual,
        )
    metrics.qp_solves.labels(result="optimal" if final.converged else "inaccurate").inc()
    return QPResult(
        z=final.x,
        j=qp.objective(final.x),
        feasible=True,
        iterations=final.iterations,
        converged=final.converged,
        residual=final.residual,
        y=final.y,
        lam=final.lam,
    )
