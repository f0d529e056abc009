"""Single-mode microlaser: closed-form steady state and threshold-curve fitting.

Two-level gain medium without re-absorption, pumped at rate P, emitting a
fraction beta of its spontaneous decay into the cavity mode.  The steady
state of

    dn/dt = -kappa*n + beta*Gamma*N*(n+1),   dN/dt = P - Gamma*N*(1+beta*n)

is the positive root of  n^2 + n*(1 - beta*P/kappa)/beta - P/kappa = 0.
The threshold pump rate is P_th = kappa/beta (vanishing linear coefficient).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, FitError
from .numerics import SolverConfig, lm_fit


@dataclass(frozen=True)
class MicrolaserParams:
    """Spontaneous-emission fraction, cavity loss, pump rate, and signal scale."""

    beta: float
    kappa: float
    P: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise ConfigError("beta must be in (0, 1]")
        if self.kappa <= 0:
            raise ConfigError("cavity loss must be positive")
        if self.P < 0:
            raise ConfigError("pump rate must be non-negative")
        if self.scale <= 0:
            raise ConfigError("scale must be positive")

    @property
    def P_th(self) -> float:
        """Threshold pump rate kappa/beta."""
        return self.kappa / self.beta


def microlaser_n(p: MicrolaserParams) -> float:
    """Steady-state photon number: the non-negative quadratic root.

    Evaluated in a cancellation-free form; below threshold (positive linear
    coefficient b) the root is 2c/(b + sqrt(b^2+4c)) rather than the textbook
    (-b + sqrt(b^2+4c))/2, which loses digits for small beta.
    """
    b = (1.0 - p.beta * p.P / p.kappa) / p.beta
    c = p.P / p.kappa
    disc = math.sqrt(b * b + 4.0 * c)
    if b > 0.0:
        return 2.0 * c / (b + disc) if disc > 0.0 else 0.0
    return 0.5 * (-b + disc)


def microlaser_curve(beta: float, kappa: float, pumps: Sequence[float],
                     scale: float = 1.0) -> np.ndarray:
    return np.array([scale * microlaser_n(MicrolaserParams(beta=beta, kappa=kappa,
                                                           P=float(P)))
                     for P in pumps])


@dataclass(frozen=True)
class MicrolaserFitResult:
    params: MicrolaserParams
    residual: float
    n_iter: int
    at_bounds: bool
    beta_identifiable: bool
    message: str = ""


def _power_law_dispersion(log_p, log_s):
    """RMS deviation of log-log data from its best straight line."""
    A = np.vstack([log_p, np.ones_like(log_p)]).T
    coef, *_ = np.linalg.lstsq(A, log_s, rcond=None)
    return float(np.sqrt(np.mean((log_s - A @ coef) ** 2)))


def fit_microlaser(data: Sequence,
                   cfg: Optional[SolverConfig] = None) -> MicrolaserFitResult:
    """Fit (beta, P_th, scale) to an input/output curve in log-log space.

    data: (pump, signal) pairs, at least 5 points spanning a decade of pump.
    kappa is eliminated through kappa = beta*P_th, so the returned kappa is
    expressed in the pump units of the data.  Data with no curvature (a pure
    power law) leave beta unidentifiable and are flagged.
    """
    pump = np.array([float(p) for p, _ in data])
    sig = np.array([float(s) for _, s in data])
    if pump.size < 5:
        raise FitError("need at least 5 data points")
    if np.any(pump <= 0) or np.any(sig <= 0):
        raise FitError("pump values and signals must be positive")
    if pump.max() / pump.min() < 10.0:
        raise FitError("pump values must span at least one decade")

    log_p, log_s = np.log(pump), np.log(sig)
    identifiable = _power_law_dispersion(log_p, log_s) > 1e-3

    def model_log(z):
        beta, p_th, scale = np.exp(z)
        beta = min(beta, 1.0)  # finite-difference probes may poke past the bound
        kappa = beta * p_th
        n = np.array([microlaser_n(MicrolaserParams(beta=beta, kappa=kappa, P=P))
                      for P in pump])
        return np.log(scale) + np.log(np.maximum(n, 1e-300))

    # knee of the log-log curve seeds P_th; low-pump signal seeds the scale
    mid = np.argsort(pump)[pump.size // 2]
    p_th0 = float(pump[mid])
    k0 = int(np.argmin(pump))
    scale0 = sig[k0] / max(pump[k0] / p_th0, 1e-12)
    z0 = np.log([0.1, p_th0, max(scale0, 1e-300)])
    bounds = (np.log([1e-8, pump.min() * 1e-3, 1e-300]),
              np.log([1.0, pump.max() * 1e3, 1e300]))

    cfg = cfg or SolverConfig(rel_tol=1e-12, abs_tol=1e-14, max_iter=500)
    res = lm_fit(lambda z: model_log(z) - log_s, z0, bounds=bounds, cfg=cfg)
    beta, p_th, scale = np.exp(res.params)
    params = MicrolaserParams(beta=beta, kappa=beta * p_th, P=0.0, scale=scale)
    return MicrolaserFitResult(params=params, residual=res.residual,
                               n_iter=res.n_iter, at_bounds=res.bound_saturated,
                               beta_identifiable=identifiable, message=res.message)
