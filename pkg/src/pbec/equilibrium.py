"""Bose-Einstein statistics of the trapped photon gas.

Populations, chemical-potential inversion, distribution fitting, the
closed-form critical number of the two-dimensional harmonic trap, and the
four operational condensation criteria used to label phases:

    (i)   ground population above half the total,
    (ii)  total population above the 2DHO critical number,
    (iii) mode population above k_B*T/eps,
    (iv)  mode population above n_tot**(1/alpha).

All criteria use strict inequalities; exact equality counts as not condensed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .constants import K_B
from .core import ModeLadder
from .errors import ConfigError, DomainError, FitError
from .numerics import SolverConfig, find_root, lm_fit


@dataclass(frozen=True)
class EquilibriumParams:
    """Photon-gas temperature, chemical potential, and detection calibration.

    mu is measured relative to the ground-mode energy and must be negative;
    scale maps model photon numbers to measured signal units.
    """

    T: float
    mu: float
    scale: float = 1.0

    def __post_init__(self):
        if self.T <= 0:
            raise ConfigError("temperature must be positive")
        if self.mu >= 0:
            raise ConfigError("chemical potential must lie below the ground mode")
        if self.scale <= 0:
            raise ConfigError("detection scale must be positive")


class Criterion(str, Enum):
    I = "i"
    II = "ii"
    III = "iii"
    IV = "iv"


@dataclass(frozen=True)
class CriterionConfig:
    """Which condensation criterion to apply, and the dimensionality alpha
    entering criterion (iv)."""

    alpha: float = 2.0
    which: Criterion = Criterion.IV

    def __post_init__(self):
        if self.alpha < 1:
            raise ConfigError("dimensionality alpha must be >= 1")
        object.__setattr__(self, "which", Criterion(self.which))


class Phase(str, Enum):
    NOT_CONDENSED = "NotCondensed"
    BEC = "BEC"
    MULTIMODE = "MultimodeCondensate"
    LASER_NO_GROUND = "LaserNoGround"


@dataclass(frozen=True)
class PhaseLabel:
    phase: Phase
    condensed: tuple  # per-mode flags, ground mode first

    def __post_init__(self):
        flags = tuple(bool(x) for x in self.condensed)
        object.__setattr__(self, "condensed", flags)
        ground = flags[0] if flags else False
        excited = any(flags[1:])
        expected = {
            (False, False): Phase.NOT_CONDENSED,
            (True, False): Phase.BEC,
            (True, True): Phase.MULTIMODE,
            (False, True): Phase.LASER_NO_GROUND,
        }[(ground, excited)]
        if self.phase != expected:
            raise ConfigError(
                f"phase {self.phase} inconsistent with condensed flags {flags}")


def label_from_flags(flags: Sequence[bool]) -> PhaseLabel:
    flags = tuple(bool(x) for x in flags)
    ground = flags[0] if flags else False
    excited = any(flags[1:])
    phase = {
        (False, False): Phase.NOT_CONDENSED,
        (True, False): Phase.BEC,
        (True, True): Phase.MULTIMODE,
        (False, True): Phase.LASER_NO_GROUND,
    }[(ground, excited)]
    return PhaseLabel(phase=phase, condensed=flags)


def be_population(eps_rel: float, g: float, params: EquilibriumParams) -> float:
    """Bose-Einstein occupation g/(exp((eps_rel - mu)/(k_B*T)) - 1).

    eps_rel is the level energy above the ground mode [J]; the chemical
    potential must lie strictly below the level.
    """
    if eps_rel < 0:
        raise DomainError("eps_rel must be >= 0 (energy above the ground mode)")
    x = (eps_rel - params.mu) / (K_B * params.T)
    if x <= 0:
        raise DomainError("chemical potential at or above the level energy")
    return g / math.expm1(x)


def total_population(ladder: ModeLadder, params: EquilibriumParams) -> float:
    """Sum of Bose-Einstein occupations over the grouped ladder."""
    eps0 = ladder.eps0
    return float(sum(be_population(m.energy - eps0, m.degeneracy, params)
                     for m in ladder.modes))


def level_populations(ladder: ModeLadder, params: EquilibriumParams) -> np.ndarray:
    eps0 = ladder.eps0
    return np.array([be_population(m.energy - eps0, m.degeneracy, params)
                     for m in ladder.modes])


def solve_mu(n_tot: float, ladder: ModeLadder, T: float,
             cfg: Optional[SolverConfig] = None) -> float:
    """Chemical potential [J, relative to the ground mode] giving total
    population n_tot at temperature T.

    n_tot(mu) is strictly increasing on mu < 0, so the root is bracketed in
    u = -mu/(k_B*T) and found by Brent iteration to a relative population
    tolerance of 1e-10.
    """
    if n_tot <= 0:
        raise DomainError("target total population must be positive")
    if len(ladder) < 1:
        raise ConfigError("ladder must be non-empty")
    kT = K_B * T
    eps_rel = ladder.energies - ladder.eps0
    degs = ladder.degeneracies

    def pop_of_u(u):
        return float(np.sum(degs / np.expm1(eps_rel / kT + u)))

    u_lo, u_hi = 1e-16, 50.0
    while pop_of_u(u_lo) < n_tot:
        u_lo *= 1e-3
        if u_lo < 1e-200:
            raise DomainError("target population too large to bracket")
    while pop_of_u(u_hi) > n_tot:
        u_hi += 50.0
        if u_hi > 1e5:
            raise DomainError("target population too small to bracket")

    cfg = cfg or SolverConfig(rel_tol=1e-14, abs_tol=1e-10 * n_tot, max_iter=200)
    # root in v = ln(u) for uniform conditioning across the dilute/degenerate range
    v = find_root(lambda w: pop_of_u(math.exp(w)) - n_tot,
                  (math.log(u_lo), math.log(u_hi)), cfg)
    return -math.exp(v) * kT


def critical_number_2dho(T: float, eps: float) -> float:
    """Critical total photon number (pi^2/6)*(k_B*T/eps)^2 of a 2D harmonic
    trap with level spacing eps [J] at temperature T [K]."""
    if T <= 0 or eps <= 0:
        raise DomainError("T and eps must be positive")
    return (math.pi ** 2 / 6.0) * (K_B * T / eps) ** 2


def classify_condensation(populations: Sequence[float], T: float, eps: float,
                          cfg: CriterionConfig = CriterionConfig()) -> PhaseLabel:
    """Apply one condensation criterion to grouped level populations.

    Criterion (i) tests only the ground level; (ii) tests the total against
    the 2DHO critical number and by construction marks the ground level;
    (iii) and (iv) are evaluated per level.  Flags map to a phase label:
    ground only -> BEC, ground plus excited -> multimode condensate, excited
    only -> condensation/lasing without the ground mode.
    """
    pops = np.asarray(populations, dtype=float)
    if pops.size == 0:
        raise DomainError("population list is empty")
    if np.any(pops < 0):
        raise DomainError("populations must be non-negative")
    if not np.any(pops > 0):
        raise DomainError("at least one population must be positive")
    n_tot = float(np.sum(pops))
    which = cfg.which
    if which == Criterion.I:
        flags = [pops[0] > 0.5 * n_tot] + [False] * (pops.size - 1)
    elif which == Criterion.II:
        fired = n_tot > critical_number_2dho(T, eps)
        flags = [fired] + [False] * (pops.size - 1)
    elif which == Criterion.III:
        thr = K_B * T / eps
        flags = list(pops > thr)
    else:  # Criterion.IV
        thr = n_tot ** (1.0 / cfg.alpha)
        flags = list(pops > thr)
    return label_from_flags(flags)


@dataclass(frozen=True)
class BeFitResult:
    params: EquilibriumParams
    residual: float
    n_iter: int
    at_bounds: bool
    message: str = ""


# z-space bounds for the internal fit parameters (ln T, ln u, ln scale)
_BE_BOUNDS = (np.log([1.0, 1e-12, 1e-12]), np.log([1e4, 1e3, 1e12]))


def fit_be(observed: Sequence, ladder: ModeLadder,
           cfg: Optional[SolverConfig] = None) -> BeFitResult:
    """Least-squares Bose-Einstein fit of (T, mu, scale) to measured level signals.

    observed: sequence of (level_index, signal) pairs, signals > 0, at least
    three distinct levels.  Residuals are taken between log model and log
    signal because populations span decades.  Initial guesses: T = 300 K,
    mu from solve_mu on the signal sum, scale from the lowest observed level.
    """
    idx = np.array([int(i) for i, _ in observed])
    sig = np.array([float(s) for _, s in observed])
    if len(set(idx.tolist())) < 3:
        raise FitError("need at least 3 distinct observed levels")
    if np.any(sig <= 0):
        raise FitError("all observed signals must be positive")
    if np.allclose(sig, sig[0], rtol=1e-12, atol=0.0):
        raise FitError("degenerate data: all level signals are equal")
    if np.any(idx < 0) or np.any(idx >= len(ladder)):
        raise FitError("observed level index outside the ladder")

    eps_rel = ladder.energies[idx] - ladder.eps0
    degs = ladder.degeneracies[idx]
    log_sig = np.log(sig)

    def model_log(z):
        T, u, scale = np.exp(z)
        return np.log(scale * degs) - np.log(np.expm1(eps_rel / (K_B * T) + u))

    T0 = 300.0
    mu0 = solve_mu(float(np.sum(sig)), ladder, T0)
    u0 = -mu0 / (K_B * T0)
    kmin = int(np.argmin(idx))
    n_model0 = degs[kmin] / math.expm1(eps_rel[kmin] / (K_B * T0) + u0)
    z0 = np.log([T0, u0, max(sig[kmin] / n_model0, 1e-12)])

    cfg = cfg or SolverConfig(rel_tol=1e-12, abs_tol=1e-14, max_iter=500)
    res = lm_fit(lambda z: model_log(z) - log_sig, z0, bounds=_BE_BOUNDS, cfg=cfg)
    T, u, scale = np.exp(res.params)
    params = EquilibriumParams(T=T, mu=-u * K_B * T, scale=scale)
    return BeFitResult(params=params, residual=res.residual, n_iter=res.n_iter,
                       at_bounds=res.bound_saturated, message=res.message)
