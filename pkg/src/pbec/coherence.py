"""First-order temporal coherence of the trapped photon gas.

Multimode thermal g1(tau) as a population-weighted phase sum over resolved
trap modes (valid for non-interacting thermal light), the single-mode
driven-dissipative coherence time, Mach-Zehnder fringe visibilities, and
exponential coherence-decay fitting.

g1 is evaluated in a rotating frame at the ground-mode frequency: phases use
energies relative to the lowest mode, so revivals and envelopes are resolved
without carrying the optical carrier.  simulate_interferogram adds the
carrier phase omega*tau back when fringe positions are needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .constants import HBAR, K_B
from .core import ResolvedMode
from .errors import ConfigError, DomainError, FitError
from .numerics import SolverConfig, lm_fit

# Above roughly this ground-mode photon number the measured coherence time is
# known to fall below the single-mode prediction; outputs flag the region.
HIGH_N_DISCREPANCY_THRESHOLD = 50.0


@dataclass(frozen=True)
class CoherenceSeries:
    """Delay grid with complex g1 values; visibility is |g1|."""

    tau: np.ndarray
    g1: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        g1 = np.asarray(self.g1, dtype=complex)
        if tau.shape != g1.shape:
            raise ConfigError("tau and g1 must have the same shape")
        if np.any(np.abs(g1) > 1.0 + 1e-12):
            raise ConfigError("|g1| must not exceed 1")
        tau.setflags(write=False)
        g1.setflags(write=False)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "g1", g1)

    @property
    def visibility(self) -> np.ndarray:
        return np.abs(self.g1)


def g1_thermal(resolved: Sequence[ResolvedMode], T: Optional[float],
               tau_grid: Sequence[float],
               populations: Optional[Sequence[float]] = None,
               damping: Optional[Sequence[float]] = None) -> CoherenceSeries:
    """Thermal first-order coherence over a resolved mode list.

    g1(tau) = sum_m n_m exp(-i*(eps_m-eps_min)*tau/hbar) exp(-d_m*tau/2) / sum_m n_m

    Populations default to Boltzmann weights exp(-(eps_m-eps_min)/(k_B*T));
    pass explicit populations (e.g. Bose-Einstein or condensed) to override,
    in which case T may be None.  Optional per-mode damping rates d_m [1/s]
    model dissipative decay of the revivals.
    """
    if len(resolved) == 0:
        raise ConfigError("resolved mode list is empty")
    tau = np.asarray(tau_grid, dtype=float)
    eps = np.array([m.energy for m in resolved])
    eps_rel = eps - eps.min()
    if populations is not None:
        n = np.asarray(populations, dtype=float)
        if n.shape != eps.shape:
            raise ConfigError("populations must match the resolved mode list")
        if np.any(n < 0) or not np.any(n > 0):
            raise DomainError("populations must be non-negative with positive sum")
    else:
        if T is None or T <= 0:
            raise DomainError("need T > 0 when no explicit populations are given")
        n = np.exp(-eps_rel / (K_B * T))
    if damping is not None:
        d = np.asarray(damping, dtype=float)
        if d.shape != eps.shape:
            raise ConfigError("damping must match the resolved mode list")
        if np.any(d < 0):
            raise DomainError("damping rates must be non-negative")
    else:
        d = np.zeros_like(eps)

    phase = np.exp(-1j * np.outer(tau, eps_rel) / HBAR)
    decay = np.exp(-0.5 * np.outer(np.abs(tau), d))
    g1 = (phase * decay) @ n / n.sum()
    # guard against accumulated roundoff pushing |g1| past unity
    mag = np.abs(g1)
    over = mag > 1.0
    if np.any(over):
        g1[over] /= mag[over]
    return CoherenceSeries(tau=tau, g1=g1)


def coherence_time_single_mode(kappa: float, reabs: float) -> float:
    """Low-occupation coherence time of one driven-dissipative mode.

    Coherence decays at half the total photon-removal rate (cavity loss plus
    re-absorption), so tau_c = 2/(kappa + reabs).
    """
    if kappa <= 0:
        raise DomainError("cavity loss must be positive")
    if reabs < 0:
        raise DomainError("re-absorption rate must be non-negative")
    return 2.0 / (kappa + reabs)


def schawlow_townes_tau(n: float, tau_c0: float, crossover_n: float = 1.0) -> float:
    """Coherence time versus photon number: tau_c0*(1 + n/crossover_n).

    Exact in both limits (constant for n << crossover_n, linear growth for
    n >> crossover_n); the crossover shape itself is a declared interpolation,
    see is_high_n_discrepancy_region for the regime where the single-mode
    theory is known to fail.
    """
    if n < 0:
        raise DomainError("photon number must be non-negative")
    if tau_c0 <= 0 or crossover_n <= 0:
        raise DomainError("tau_c0 and crossover_n must be positive")
    return tau_c0 * (1.0 + n / crossover_n)


def is_high_n_discrepancy_region(n: float) -> bool:
    """True where measured coherence times are expected to deviate from the
    single-mode prediction (very large ground-mode occupation)."""
    return n >= HIGH_N_DISCREPANCY_THRESHOLD


@dataclass(frozen=True)
class Interferogram:
    i_max: float
    i_min: float
    visibility: float
    fringe_phase: float  # rad, carrier plus g1 phase, wrapped to (-pi, pi]


def simulate_interferogram(g1: complex, omega: float, tau: float,
                           arm_ratio: float = 1.0) -> Interferogram:
    """Mach-Zehnder fringe extrema and visibility at delay tau.

    I(phi) = I1 + I2 + 2*sqrt(I1*I2)*|g1|*cos(omega*tau + arg g1 + phi) with
    arm intensities in ratio I1:I2 = arm_ratio (normalized to I1+I2 = 1).
    """
    if arm_ratio <= 0:
        raise DomainError("arm intensity ratio must be positive")
    i1 = arm_ratio / (1.0 + arm_ratio)
    i2 = 1.0 / (1.0 + arm_ratio)
    amp = 2.0 * math.sqrt(i1 * i2) * abs(g1)
    phase = math.remainder(omega * tau + np.angle(g1), 2.0 * math.pi)
    return Interferogram(i_max=1.0 + amp, i_min=1.0 - amp,
                         visibility=amp, fringe_phase=phase)


@dataclass(frozen=True)
class CoherenceFit:
    tau_c: float
    tau_0: float
    amplitude: float
    residual: float
    ok: bool
    message: str = ""


def fit_exponential_coherence(series: CoherenceSeries,
                              cfg: Optional[SolverConfig] = None) -> CoherenceFit:
    """Fit amplitude*exp(-|tau - tau_0|/tau_c) to the visibility of a series.

    Needs at least 5 delay points.  Data whose visibility does not decay get
    ok=False instead of a fit.
    """
    tau = series.tau
    vis = series.visibility
    if tau.size < 5:
        raise FitError("need at least 5 delay points")
    span = float(tau.max() - tau.min())
    if span <= 0:
        raise FitError("delay grid must span a nonzero range")
    vmax = float(vis.max())
    if vmax <= 0 or float(vis.min()) > 0.9 * vmax:
        return CoherenceFit(tau_c=math.inf, tau_0=float(tau[np.argmax(vis)]),
                            amplitude=vmax, residual=float("nan"), ok=False,
                            message="visibility does not decay over the grid")

    k0 = int(np.argmax(vis))
    # width at half maximum seeds the decay time
    above = np.nonzero(vis >= 0.5 * vmax)[0]
    tau_c0 = max((tau[above[-1]] - tau[above[0]]) / (2.0 * math.log(2.0)),
                 span / tau.size)
    # fit in span-scaled variables so finite-difference steps are meaningful
    # for delays measured in seconds
    u = (tau - tau.min()) / span

    def resid(p):
        amp, u0, ltc = p
        return amp * np.exp(-np.abs(u - u0) / math.exp(ltc)) - vis

    p0 = np.array([vmax, u[k0], math.log(tau_c0 / span)])
    lo = np.array([0.0, -1.0, math.log(1e-6)])
    hi = np.array([2.0, 2.0, math.log(1e6)])
    cfg = cfg or SolverConfig(rel_tol=1e-12, abs_tol=1e-15, max_iter=500)
    res = lm_fit(resid, p0, bounds=(lo, hi), cfg=cfg)
    amp, u0, ltc = res.params
    return CoherenceFit(tau_c=math.exp(ltc) * span,
                        tau_0=float(tau.min() + u0 * span),
                        amplitude=float(amp),
                        residual=res.residual, ok=res.converged,
                        message=res.message)


def collapse_time(series: CoherenceSeries, floor: float = 0.05) -> float:
    """Earliest delay at which the visibility falls below `floor`.

    Used as the operational collapse-time estimate for thermal multimode
    series (the delay by which the initial coherence peak has fully decayed).
    Raises DomainError when the visibility never drops that far.
    """
    vis = series.visibility
    below = np.nonzero(vis < floor)[0]
    if below.size == 0:
        raise DomainError(f"visibility never falls below {floor:g}")
    k = int(below[0])
    if k == 0:
        return float(series.tau[0])
    # linear interpolation between the straddling grid points
    t0, t1 = series.tau[k - 1], series.tau[k]
    v0, v1 = vis[k - 1], vis[k]
    return float(t0 + (v0 - floor) / max(v0 - v1, 1e-300) * (t1 - t0))
