"""Deterministic numerical kernels: root bracketing, adaptive Runge-Kutta,
damped Newton, and Levenberg-Marquardt least squares.

All kernels are pure functions of their inputs and use no random numbers, so
identical inputs give bit-identical outputs on a given platform.  Finite
difference Jacobians use central differences with step sqrt(eps)*max(|x|, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import SolverError, StiffnessError

_EPS = float(np.finfo(float).eps)
_FD_STEP = math.sqrt(_EPS)


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and iteration limits shared by the kernels.

    rel_tol / abs_tol are interpreted per kernel: interval/residual tolerances
    for the root finder and Newton, per-component error weights for the ODE
    integrator, and step/cost convergence thresholds for least squares.
    damping_init seeds the Levenberg-Marquardt damping parameter.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_iter: int = 200
    damping_init: float = 1e-3

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


DEFAULT_SOLVER = SolverConfig()


# ---------------------------------------------------------------------------
# Bracketing root finder (Brent: bisection / secant / inverse quadratic)
# ---------------------------------------------------------------------------

def find_root(f: Callable[[float], float], bracket: Sequence[float],
              cfg: SolverConfig = DEFAULT_SOLVER) -> float:
    """Find a root of a continuous scalar function on a sign-changing bracket.

    Terminates when |f(x)| <= cfg.abs_tol or the bracket has shrunk below
    rel_tol*|x| (plus a machine-epsilon floor).  Raises SolverError when the
    bracket carries no sign change or the iteration cap is reached.
    """
    a, b = float(bracket[0]), float(bracket[1])
    fa, fb = float(f(a)), float(f(b))
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise SolverError(
            f"no sign change on bracket [{a:g}, {b:g}]: f={fa:g}, {fb:g}")

    c, fc = a, fa
    d = e = b - a
    for _ in range(cfg.max_iter):
        if math.copysign(1.0, fb) == math.copysign(1.0, fc):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * _EPS * abs(b) + 0.5 * cfg.rel_tol * abs(b)
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or abs(fb) <= cfg.abs_tol:
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            # secant (two points) or inverse quadratic (three points)
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = xm
                e = d
        else:
            d = xm
            e = d
        a, fa = b, fb
        if abs(d) > tol1:
            b += d
        else:
            b += math.copysign(tol1, xm)
        fb = float(f(b))
    raise SolverError(
        f"root iteration cap {cfg.max_iter} reached; last bracket "
        f"[{min(b, c):g}, {max(b, c):g}], f(b)={fb:g}")


# ---------------------------------------------------------------------------
# Adaptive explicit integrator: Dormand-Prince 5(4) embedded pair
# ---------------------------------------------------------------------------

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_ERR = _DP_B5 - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                             -92097 / 339200, 187 / 2100, 1 / 40])


@dataclass
class OdeResult:
    t: np.ndarray
    y: np.ndarray          # shape (len(t), dim), accepted steps
    n_accepted: int = 0
    n_rejected: int = 0
    n_eval: int = 0

    @property
    def t_final(self) -> float:
        return float(self.t[-1])

    @property
    def y_final(self) -> np.ndarray:
        return self.y[-1]


def _error_norm(err, y_old, y_new, rel_tol, abs_tol):
    scale = abs_tol + rel_tol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.max(np.abs(err) / scale))


def integrate_ode(f: Callable[[float, np.ndarray], np.ndarray],
                  y0: Sequence[float],
                  t_span: Sequence[float],
                  cfg: SolverConfig = DEFAULT_SOLVER,
                  project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                  project_slack: float = 100.0,
                  max_steps: int = 5_000_000,
                  store_trajectory: bool = True) -> OdeResult:
    """Integrate y' = f(t, y) with a Dormand-Prince 5(4) embedded pair.

    Per-component error control: a step is accepted when every component
    error is below abs_tol + rel_tol*|y|.  An optional projection callback
    (e.g. clipping to a physical region) is applied to accepted states; a
    projection that moves the state by more than project_slack error-widths
    rejects the step instead (the overshoot is treated as integration error).
    Raises StiffnessError on step-size underflow.
    """
    t0, t_end = float(t_span[0]), float(t_span[1])
    if not t_end > t0:
        raise ValueError("t_span must be increasing")
    y = np.asarray(y0, dtype=float).copy()
    dim = y.size
    t = t0
    k = np.empty((7, dim))
    k[0] = np.asarray(f(t, y), dtype=float)
    n_eval = 1

    # initial step from the local derivative scale
    scale = cfg.abs_tol + cfg.rel_tol * np.abs(y)
    d0 = float(np.max(np.abs(y) / scale)) if dim else 0.0
    d1 = float(np.max(np.abs(k[0]) / scale)) if dim else 0.0
    h = min(t_end - t0, 0.01 * d0 / d1 if (d0 > 1e-5 and d1 > 1e-5)
            else (t_end - t0) * 1e-6)
    h = max(h, 1e3 * _EPS * max(abs(t0), 1e-300))

    ts = [t0]
    ys = [y.copy()]
    res = OdeResult(t=np.empty(0), y=np.empty((0, dim)))

    while t < t_end:
        if res.n_accepted + res.n_rejected >= max_steps:
            raise SolverError(f"ODE step cap {max_steps} reached at t={t:g}")
        h = min(h, t_end - t)
        if h <= 16.0 * _EPS * max(abs(t), abs(t_end)):
            raise StiffnessError(
                f"step size underflow at t={t:g} (h={h:g}); the system is too "
                "stiff for explicit integration here, use the steady-state solver")
        for i in range(1, 7):
            yi = y + h * (k[:i].T @ _DP_A[i])
            k[i] = np.asarray(f(t + _DP_C[i] * h, yi), dtype=float)
        n_eval += 6
        y_new = y + h * (k.T @ _DP_B5)
        err = h * (k.T @ _DP_ERR)
        enorm = _error_norm(err, y, y_new, cfg.rel_tol, cfg.abs_tol)
        if not math.isfinite(enorm):
            enorm = 10.0  # force rejection and a smaller step
        if enorm <= 1.0:
            if project is not None:
                y_proj = project(y_new.copy())
                shift = _error_norm(y_proj - y_new, y_new, y_proj,
                                    cfg.rel_tol, cfg.abs_tol)
                if shift > project_slack:
                    h *= 0.5
                    res.n_rejected += 1
                    continue
                y_new = y_proj
            t += h
            y = y_new
            k[0] = np.asarray(f(t, y), dtype=float)  # refresh after projection
            n_eval += 1
            res.n_accepted += 1
            if store_trajectory:
                ts.append(t)
                ys.append(y.copy())
            h *= min(5.0, max(0.2, 0.9 * enorm ** -0.2 if enorm > 0 else 5.0))
        else:
            res.n_rejected += 1
            h *= max(0.2, 0.9 * enorm ** -0.2)

    if not store_trajectory:
        ts.append(t)
        ys.append(y.copy())
    res.t = np.asarray(ts)
    res.y = np.asarray(ys)
    res.n_eval = n_eval
    return res


# ---------------------------------------------------------------------------
# Damped Newton with line search
# ---------------------------------------------------------------------------

def fd_jacobian(F: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    """Central-difference Jacobian with step sqrt(eps)*max(|x_i|, 1)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    F0 = np.asarray(F(x), dtype=float)
    J = np.empty((F0.size, n))
    for i in range(n):
        hi = _FD_STEP * max(abs(x[i]), 1.0)
        xp = x.copy()
        xm = x.copy()
        xp[i] += hi
        xm[i] -= hi
        J[:, i] = (np.asarray(F(xp)) - np.asarray(F(xm))) / (2.0 * hi)
    return J


def _equilibrated_solve(J: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve J x = b after exact powers-of-two row/column equilibration.

    Physical rate systems routinely mix scales over many decades; rescaling
    by powers of two is lossless and keeps LU pivoting well conditioned.
    """
    row = np.max(np.abs(J), axis=1)
    if np.any(row == 0.0) or not np.all(np.isfinite(row)):
        raise np.linalg.LinAlgError("zero or non-finite Jacobian row")
    dr = np.exp2(-np.floor(np.log2(row)))
    Js = J * dr[:, None]
    col = np.max(np.abs(Js), axis=0)
    if np.any(col == 0.0):
        raise np.linalg.LinAlgError("zero Jacobian column")
    dc = np.exp2(-np.floor(np.log2(col)))
    z = np.linalg.solve(Js * dc[None, :], b * dr)
    return z * dc


def newton_solve(F: Callable[[np.ndarray], np.ndarray],
                 J: Optional[Callable[[np.ndarray], np.ndarray]],
                 x0: Sequence[float],
                 cfg: SolverConfig = DEFAULT_SOLVER,
                 check_jacobian: bool = True) -> np.ndarray:
    """Solve F(x) = 0 by damped Newton iteration with a backtracking line search.

    When an analytic Jacobian is supplied it is checked once against central
    finite differences at x0 (guard tolerance 1e-4 relative in Frobenius norm).
    Convergence: max|F| <= cfg.abs_tol.  Raises SolverError on a singular
    Jacobian, divergence, or the iteration cap.
    """
    x = np.asarray(x0, dtype=float).copy()
    jac = J if J is not None else lambda v: fd_jacobian(F, v)
    if J is not None and check_jacobian:
        Ja = np.asarray(J(x), dtype=float)
        Jf = fd_jacobian(F, x)
        ref = max(float(np.linalg.norm(Ja)), 1e-300)
        mismatch = float(np.linalg.norm(Jf - Ja)) / ref
        if mismatch > 1e-4:
            raise SolverError(
                f"analytic Jacobian disagrees with finite differences at x0 "
                f"(relative mismatch {mismatch:.2e})")

    Fx = np.asarray(F(x), dtype=float)
    for _ in range(cfg.max_iter):
        fmax = float(np.max(np.abs(Fx))) if Fx.size else 0.0
        if fmax <= cfg.abs_tol:
            return x
        Jx = np.asarray(jac(x), dtype=float)
        try:
            dx = _equilibrated_solve(Jx, -Fx)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular Jacobian at |F|={fmax:g}") from exc
        if not np.all(np.isfinite(dx)):
            raise SolverError("non-finite Newton step")
        fnorm = float(np.linalg.norm(Fx))
        lam = 1.0
        while True:
            x_try = x + lam * dx
            F_try = np.asarray(F(x_try), dtype=float)
            f_try = float(np.linalg.norm(F_try))
            if math.isfinite(f_try) and f_try <= (1.0 - 1e-4 * lam) * fnorm:
                x, Fx = x_try, F_try
                break
            lam *= 0.5
            if lam < 1e-12:
                raise SolverError(
                    f"Newton line search failed (|F|={fnorm:g}, step rejected)")
    raise SolverError(
        f"Newton iteration cap {cfg.max_iter} reached, max|F|="
        f"{float(np.max(np.abs(Fx))):g}")


# ---------------------------------------------------------------------------
# Levenberg-Marquardt least squares with box bounds
# ---------------------------------------------------------------------------

@dataclass
class LsqResult:
    params: np.ndarray
    residual: float                 # L2 norm of the residual vector
    cost: float                     # sum of squared residuals
    n_iter: int
    converged: bool
    at_bounds: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    message: str = ""

    @property
    def bound_saturated(self) -> bool:
        return bool(np.any(self.at_bounds))


def _clip_to_bounds(p, bounds):
    if bounds is None:
        return p
    lo, hi = bounds
    return np.minimum(np.maximum(p, lo), hi)


def lm_fit(residual: Callable[[np.ndarray], np.ndarray],
           params0: Sequence[float],
           bounds=None,
           cfg: SolverConfig = DEFAULT_SOLVER) -> LsqResult:
    """Levenberg-Marquardt on a residual function with optional box bounds.

    Finite-difference Jacobian (central), multiplicative damping on the
    normal-equation diagonal, trial steps clipped into the bounds.  The
    iteration order is fixed, so results are deterministic.
    """
    p = np.asarray(params0, dtype=float).copy()
    if bounds is not None:
        lo = np.asarray(bounds[0], dtype=float)
        hi = np.asarray(bounds[1], dtype=float)
        if np.any(lo >= hi):
            raise ValueError("lower bounds must be below upper bounds")
        bounds = (lo, hi)
        p = _clip_to_bounds(p, bounds)

    r = np.asarray(residual(p), dtype=float)
    if r.size < p.size:
        raise FitShapeError(p.size, r.size)
    cost = float(r @ r)
    lam = cfg.damping_init
    converged = False
    message = "iteration cap reached"
    it = 0
    for it in range(1, cfg.max_iter + 1):
        Jm = fd_jacobian(residual, p)
        A = Jm.T @ Jm
        g = Jm.T @ r
        gmax = float(np.max(np.abs(g))) if g.size else 0.0
        if gmax <= cfg.abs_tol:
            converged = True
            message = "gradient below abs_tol"
            break
        diag = np.diag(A).copy()
        if np.any(diag <= 0.0):
            raise SolverError(
                "singular normal equations: a parameter does not affect the residuals")
        improved = False
        for _ in range(50):  # damping escalation within one outer iteration
            try:
                dp = np.linalg.solve(A + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError as exc:
                raise SolverError("singular normal equations") from exc
            p_try = _clip_to_bounds(p + dp, bounds)
            r_try = np.asarray(residual(p_try), dtype=float)
            cost_try = float(r_try @ r_try)
            if math.isfinite(cost_try) and cost_try < cost:
                step = float(np.max(np.abs(p_try - p)))
                pscale = float(np.max(np.abs(p))) if p.size else 0.0
                p, r, prev_cost, cost = p_try, r_try, cost, cost_try
                lam = max(lam / 3.0, 1e-14)
                improved = True
                if (prev_cost - cost <= cfg.rel_tol * max(cost, cfg.abs_tol)
                        or step <= cfg.rel_tol * max(pscale, 1e-300)):
                    converged = True
                    message = "cost/step decrease below rel_tol"
                break
            lam *= 10.0
            if lam > 1e13:
                break
        if converged:
            break
        if not improved:
            converged = True
            message = "no further decrease possible (damping saturated)"
            break

    at_bounds = np.zeros(p.size, dtype=bool)
    if bounds is not None:
        lo, hi = bounds
        span = np.maximum(hi - lo, 1e-300)
        at_bounds = (np.abs(p - lo) <= 1e-9 * span) | (np.abs(p - hi) <= 1e-9 * span)
    return LsqResult(params=p, residual=math.sqrt(cost), cost=cost,
                     n_iter=it, converged=converged, at_bounds=at_bounds,
                     message=message)


class FitShapeError(ValueError):
    def __init__(self, n_params, n_data):
        super().__init__(
            f"need at least as many data points as parameters ({n_data} < {n_params})")


def least_squares(model: Callable[[np.ndarray, np.ndarray], np.ndarray],
                  params0: Sequence[float],
                  data,
                  bounds=None,
                  cfg: SolverConfig = DEFAULT_SOLVER) -> LsqResult:
    """Fit model(params, x) to y over data = (x, y) in the least-squares sense."""
    x, yobs = (np.asarray(data[0], dtype=float), np.asarray(data[1], dtype=float))
    if yobs.size < np.asarray(params0).size:
        raise FitShapeError(np.asarray(params0).size, yobs.size)
    return lm_fit(lambda p: np.asarray(model(p, x), dtype=float) - yobs,
                  params0, bounds=bounds, cfg=cfg)
