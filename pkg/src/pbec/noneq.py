"""Driven-dissipative multimode rate model of the dye-microcavity photon gas.

Photon level populations n_m (totals over the g_m = m+1 degenerate modes of
level m) are coupled to molecular excitation fractions f_j on concentric
annular spatial bins:

    dn_m/dt = -kappa*n_m + sum_j M_j eta[m,j] [E_m f_j (n_m+g_m) - A_m (1-f_j) n_m]
    df_j/dt = P_j (1-f_j) - gamma_down f_j
              - sum_m eta[m,j] [E_m f_j (n_m+g_m) - A_m (1-f_j) n_m]

(equivalently, each of the g_m degenerate modes carries population n_m/g_m
with the usual single-mode (nu+1) stimulated-plus-spontaneous factor; the
grouped form keeps one variable per level).  M_j is the molecule count of bin
j, eta[m,j] the dimensionless mode/bin intensity overlap, P_j the local pump
rate per molecule, and A_m / E_m per-molecule absorption and emission rates
per mode.  E_m/A_m follows the emission/absorption detailed-balance ratio at
the detuning of level m from the dye zero-phonon line, and A_0 is normalized
so that the total ground-mode re-absorption rate equals
n_mol*sigma(lambda_0)*c*, making the thermalisation ratio gamma the single
thermalisation dial.

Exact excitation bookkeeping gives the balance identity

    sum_m dn_m/dt + sum_j M_j df_j/dt
        = sum_j M_j P_j (1-f_j) - gamma_down sum_j M_j f_j - kappa sum_m n_m.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (UM, CavityConfig, DyeModel, ModeLadder,
                   build_mode_ladder, kennard_stepanov_ratio)
from .equilibrium import CriterionConfig, Phase, PhaseLabel, label_from_flags, \
    classify_condensation
from .errors import ConfigError, CoverageError, SolverError
from .numerics import SolverConfig, integrate_ode, newton_solve

DEFAULT_N_BINS = 64
GRID_EXTENT_FACTOR = 6.0
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True)
class PumpConfig:
    """Gaussian pump spot: 1/e^2 intensity radius [um] and peak molecular
    excitation rate [1/s]."""

    waist_um: float
    rate: float

    def __post_init__(self):
        if self.waist_um <= 0:
            raise ConfigError("pump waist must be positive")
        if self.rate < 0:
            raise ConfigError("pump rate must be non-negative")


@dataclass(frozen=True)
class SpatialGrid:
    """Concentric annular bins holding the molecular reservoir.

    r_edges_um: bin edges starting at 0, strictly increasing.
    M: molecules per bin.  P: pump rate per molecule per bin [1/s].
    """

    r_edges_um: np.ndarray
    M: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.r_edges_um, dtype=float)
        M = np.asarray(self.M, dtype=float)
        P = np.asarray(self.P, dtype=float)
        if edges.size < 2 or edges[0] != 0.0 or np.any(np.diff(edges) <= 0):
            raise ConfigError("bin edges must start at 0 and increase strictly")
        if M.size != edges.size - 1 or P.size != M.size:
            raise ConfigError("M and P must have one entry per bin")
        if np.any(M <= 0):
            raise ConfigError("molecule counts must be positive")
        if np.any(P < 0):
            raise ConfigError("pump rates must be non-negative")
        for name, arr in (("r_edges_um", edges), ("M", M), ("P", P)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_bins(self) -> int:
        return self.M.size

    @property
    def r_centers_um(self) -> np.ndarray:
        return 0.5 * (self.r_edges_um[1:] + self.r_edges_um[:-1])

    @property
    def areas_m2(self) -> np.ndarray:
        r = self.r_edges_um * UM
        return math.pi * (r[1:] ** 2 - r[:-1] ** 2)

    @property
    def total_molecules(self) -> float:
        return float(self.M.sum())


@dataclass(frozen=True)
class OverlapMatrix:
    """Mode-group/bin coupling weights.

    eta[m, j] is the mode-m intensity fraction in bin j divided by the bin's
    fractional area, so sum_j eta[m, j] * (S_j/S_tot) equals the covered
    intensity fraction (close to 1), and a uniform molecular density gives
    sum_j eta[m, j]*M_j = M_tot * coverage_m.
    """

    eta: np.ndarray
    area_frac: np.ndarray   # S_j / S_tot
    coverage: np.ndarray    # per-mode intensity fraction inside the grid

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        if np.any(eta < 0):
            raise ConfigError("overlap weights must be non-negative")
        for name in ("eta", "area_frac", "coverage"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class SimState:
    """Level populations, bin excitation fractions, and the time stamp."""

    n: np.ndarray
    f: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        n = np.array(self.n, dtype=float)
        f = np.array(self.f, dtype=float)
        scale = max(float(np.max(n, initial=0.0)), 1.0)
        if np.any(n < -1e-9 * scale):
            raise ConfigError("negative photon population")
        if np.any(f < -1e-9) or np.any(f > 1.0 + 1e-9):
            raise ConfigError("excitation fractions must lie in [0, 1]")
        n = np.maximum(n, 0.0)
        f = np.clip(f, 0.0, 1.0)
        n.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "f", f)

    @property
    def n_tot(self) -> float:
        return float(self.n.sum())

    @property
    def ground_fraction(self) -> float:
        tot = self.n_tot
        return float(self.n[0] / tot) if tot > 0 else 0.0


@dataclass(frozen=True)
class NoneqParams:
    """Full parameter set of the rate model.

    A and E are per-molecule, per-group absorption and emission rates [1/s].
    Wherever both rates are positive, E_m/A_m must equal the detailed-balance
    ratio at the detuning of level m from the dye zero-phonon line (1e-12
    relative); rows with A_m = 0 (absorption off, the microlaser limit) or
    E_m = 0 (emission off, pure photon decay) are the documented switch-off
    limits and are exempt.
    """

    cavity: CavityConfig
    dye: DyeModel
    ladder: ModeLadder
    pump: PumpConfig
    grid: SpatialGrid
    eta: OverlapMatrix
    A: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        E = np.asarray(self.E, dtype=float)
        n_modes = len(self.ladder)
        if A.size != n_modes or E.size != n_modes:
            raise ConfigError("A and E need one rate per ladder level")
        if np.any(A < 0) or np.any(E < 0):
            raise ConfigError("rates must be non-negative")
        if self.eta.eta.shape != (n_modes, self.grid.n_bins):
            raise ConfigError("overlap matrix shape does not match ladder/grid")
        eps_zpl = self.dye.eps_zpl
        for m, mode in enumerate(self.ladder.modes):
            if A[m] == 0.0 or E[m] == 0.0:
                continue
            ks = kennard_stepanov_ratio(mode.energy - eps_zpl, self.dye.T_dye)
            if abs(E[m] / A[m] - ks) > 1e-12 * ks:
                raise ConfigError(
                    f"E/A ratio at level {m} violates detailed balance: "
                    f"{E[m] / A[m]:.6e} vs {ks:.6e}")
        A.setflags(write=False)
        E.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "E", E)

    @property
    def gamma(self) -> float:
        """Thermalisation ratio at the cutoff: ground-mode re-absorption over
        cavity loss."""
        reabs = float(self.A[0] * np.sum(self.grid.M * self.eta.eta[0]))
        return reabs / self.cavity.kappa

    def with_pump_rate(self, rate: float) -> "NoneqParams":
        """Same system with the pump peak rate rescaled (profile unchanged)."""
        if self.pump.rate > 0:
            P = self.grid.P * (rate / self.pump.rate)
        else:
            P = _pump_profile(self.grid.r_edges_um, self.pump.waist_um) * rate
        grid = SpatialGrid(r_edges_um=self.grid.r_edges_um, M=self.grid.M, P=P)
        return dataclasses.replace(
            self, pump=PumpConfig(waist_um=self.pump.waist_um, rate=rate),
            grid=grid)


# ---------------------------------------------------------------------------
# Geometry: mode intensity profiles, spatial grid, overlaps
# ---------------------------------------------------------------------------

def _hermite_sq(n_max: int, x: np.ndarray) -> np.ndarray:
    """Squared normalized harmonic-oscillator wavefunctions h_k(x)^2 for
    k = 0..n_max, in oscillator-length units."""
    h = np.empty((n_max + 1, x.size))
    h[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        h[1] = math.sqrt(2.0) * x * h[0]
    for k in range(2, n_max + 1):
        h[k] = math.sqrt(2.0 / k) * x * h[k - 1] - math.sqrt((k - 1) / k) * h[k - 2]
    return h ** 2


def mode_intensity_profiles(cavity: CavityConfig, n_levels: int,
                            r_m: np.ndarray) -> np.ndarray:
    """Degeneracy-averaged radial intensity [1/m^2] of each level group.

    The sum of |psi|^2 over the degenerate states of one level is radially
    symmetric; dividing by the degeneracy gives a unit-normalized profile
    (integral of I*2*pi*r dr = 1).  Evaluated from 1D oscillator functions
    along the (r, 0) axis, which carries the full radial profile.
    """
    a = cavity.oscillator_length_m
    rho = np.asarray(r_m, dtype=float) / a
    hsq = _hermite_sq(n_levels - 1, rho)
    hsq0 = _hermite_sq(n_levels - 1, np.zeros(1))[:, 0]
    out = np.empty((n_levels, rho.size))
    for i in range(n_levels):
        acc = np.zeros(rho.size)
        for k in range(i + 1):
            if hsq0[i - k] != 0.0:
                acc += hsq[k] * hsq0[i - k]
        out[i] = acc / ((i + 1) * a * a)
    return out


def _pump_profile(r_edges_um: np.ndarray, waist_um: float) -> np.ndarray:
    """Bin-averaged Gaussian exp(-2 r^2/w^2) (peak value 1)."""
    r = np.asarray(r_edges_um, dtype=float)
    w = waist_um
    gauss_integral = (math.pi * w * w / 2.0) * (
        np.exp(-2.0 * r[:-1] ** 2 / w ** 2) - np.exp(-2.0 * r[1:] ** 2 / w ** 2))
    areas = math.pi * (r[1:] ** 2 - r[:-1] ** 2)
    return gauss_integral / areas


def make_spatial_grid(cavity: CavityConfig, dye: DyeModel, pump: PumpConfig,
                      n_bins: int = DEFAULT_N_BINS,
                      r_max_um: Optional[float] = None) -> SpatialGrid:
    """Equal-width annular bins out to 6x the pump waist or 6x the ground-mode
    oscillator length, whichever is larger.

    Molecule counts use the effective areal density n_mol * cavity length;
    pump rates are the bin-averaged Gaussian profile times the peak rate.
    """
    if n_bins < 1:
        raise ConfigError("need at least one bin")
    if r_max_um is None:
        r_max_um = GRID_EXTENT_FACTOR * max(pump.waist_um,
                                            cavity.oscillator_length_m / UM)
    edges = np.linspace(0.0, r_max_um, n_bins + 1)
    areas = math.pi * ((edges[1:] * UM) ** 2 - (edges[:-1] * UM) ** 2)
    M = dye.n_mol * cavity.length_m * areas
    P = pump.rate * _pump_profile(edges, pump.waist_um)
    return SpatialGrid(r_edges_um=edges, M=M, P=P)


def build_overlaps(ladder: ModeLadder, pump: PumpConfig, grid: SpatialGrid,
                   cavity: CavityConfig) -> OverlapMatrix:
    """Integrate the level intensity profiles over the annular bins.

    eta[m, j] = (intensity fraction of mode m in bin j) / (fractional bin
    area); a single all-covering bin therefore gives eta = 1 exactly.  The
    grid must capture at least 99% of both the ground-mode intensity and the
    pump power.
    """
    if grid.n_bins < 1 or len(ladder) < 1:
        raise ConfigError("grid and ladder must be non-empty")
    n_levels = len(ladder)
    edges_m = grid.r_edges_um * UM
    # composite Gauss-Legendre: panels no wider than half the oscillator
    # length, so even a single huge bin resolves the mode profiles
    panel_cap = 0.5 * cavity.oscillator_length_m

    w = np.empty((n_levels, grid.n_bins))
    for j in range(grid.n_bins):
        lo, hi = edges_m[j], edges_m[j + 1]
        n_panels = min(400, max(1, int(math.ceil((hi - lo) / panel_cap))))
        bounds = np.linspace(lo, hi, n_panels + 1)
        half = 0.5 * (bounds[1:] - bounds[:-1])
        mid = 0.5 * (bounds[1:] + bounds[:-1])
        r = (half[:, None] * _GL_NODES[None, :] + mid[:, None]).ravel()
        wts = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
        intens = mode_intensity_profiles(cavity, n_levels, r)
        w[:, j] = intens @ (2.0 * math.pi * r * wts)

    coverage = w.sum(axis=1)
    if coverage[0] < 0.99:
        raise CoverageError(
            f"grid covers only {coverage[0]:.3%} of the ground-mode intensity; "
            "extend r_max or add bins")
    # a pump spot narrower than one bin cannot be resolved by the annuli
    bin_width = float(np.min(np.diff(grid.r_edges_um)))
    if pump.waist_um < bin_width:
        raise CoverageError(
            f"pump waist {pump.waist_um:g} um is below the bin width "
            f"{bin_width:g} um; refine the grid")

    areas = grid.areas_m2
    area_frac = areas / areas.sum()
    eta = w / area_frac[None, :]
    return OverlapMatrix(eta=eta, area_frac=area_frac, coverage=coverage)


def make_noneq_params(cavity: CavityConfig, dye: DyeModel,
                      pump: PumpConfig,
                      n_levels: int = 20,
                      grid: Optional[SpatialGrid] = None,
                      n_bins: int = DEFAULT_N_BINS,
                      r_max_um: Optional[float] = None) -> NoneqParams:
    """Assemble the full rate model for a cavity/dye/pump combination.

    Absorption rates are pinned to the thermalisation-ratio definition:
    A_0 * sum_j M_j eta[0, j] = n_mol * sigma(lambda_0) * c*, with the
    spectral shape A_m proportional to sigma(lambda_m); emission rates follow
    from detailed balance at the dye temperature.
    """
    ladder = build_mode_ladder(cavity, n_levels)
    if grid is None:
        grid = make_spatial_grid(cavity, dye, pump, n_bins=n_bins,
                                 r_max_um=r_max_um)
    eta = build_overlaps(ladder, pump, grid, cavity)
    sigma = np.array([dye.sigma(m.lambda_nm) for m in ladder.modes])
    m_eff0 = float(np.sum(grid.M * eta.eta[0]))
    A = dye.n_mol * sigma * cavity.c_star / m_eff0
    eps_zpl = dye.eps_zpl
    ks = np.array([kennard_stepanov_ratio(m.energy - eps_zpl, dye.T_dye)
                   for m in ladder.modes])
    E = A * ks
    return NoneqParams(cavity=cavity, dye=dye, ladder=ladder, pump=pump,
                       grid=grid, eta=eta, A=A, E=E)


def single_mode_params(cavity: CavityConfig, dye: DyeModel, total_molecules: float,
                       emission_rate: float, pump_rate: float,
                       absorption_rate: float = 0.0) -> NoneqParams:
    """One mode, one all-covering bin: the microlaser geometry.

    With absorption_rate = 0 this is exactly the single-mode zero-absorption
    limit whose steady state matches the closed-form microlaser model with
    beta = E/(gamma_down + E) and an effective pump M*p*(1-f).
    """
    ladder = build_mode_ladder(cavity, 1)
    pump = PumpConfig(waist_um=1.0, rate=pump_rate)
    grid = SpatialGrid(r_edges_um=np.array([0.0, 1.0]),
                       M=np.array([total_molecules]),
                       P=np.array([pump_rate]))
    eta = OverlapMatrix(eta=np.array([[1.0]]), area_frac=np.array([1.0]),
                        coverage=np.array([1.0]))
    if absorption_rate > 0.0:
        ks = kennard_stepanov_ratio(ladder.eps0 - dye.eps_zpl, dye.T_dye)
        emission_rate = absorption_rate * ks
    return NoneqParams(cavity=cavity, dye=dye, ladder=ladder, pump=pump,
                       grid=grid, eta=eta,
                       A=np.array([absorption_rate]),
                       E=np.array([emission_rate]))


# ---------------------------------------------------------------------------
# Dynamics
# ---------------------------------------------------------------------------

def _unpack(y: np.ndarray, n_modes: int):
    return y[:n_modes], y[n_modes:]


def rate_derivatives(state: SimState, p: NoneqParams):
    """Time derivatives (dn/dt, df/dt) of the rate model."""
    dn, df = _derivs(state.n, state.f, p)
    return dn, df


def _derivs(n, f, p: NoneqParams):
    g = p.ladder.degeneracies
    em = p.E * (n + g)          # per-molecule emission weight, per mode
    ab = p.A * n                # per-molecule absorption weight, per mode
    bracket = np.outer(em, f) - np.outer(ab, 1.0 - f)
    eta = p.eta.eta
    exch = eta * bracket
    dn = -p.cavity.kappa * n + exch @ p.grid.M
    df = p.grid.P * (1.0 - f) - p.dye.gamma_down * f - exch.sum(axis=0)
    return dn, df


def _rhs(p: NoneqParams):
    n_modes = len(p.ladder)

    def f_ode(_t, y):
        n, f = _unpack(y, n_modes)
        dn, df = _derivs(n, f, p)
        return np.concatenate([dn, df])

    return f_ode


def _jacobian(y: np.ndarray, p: NoneqParams) -> np.ndarray:
    n_modes = len(p.ladder)
    n, f = _unpack(y, n_modes)
    g = p.ladder.degeneracies
    eta = p.eta.eta
    M = p.grid.M
    gain = np.outer(p.E, f) - np.outer(p.A, 1.0 - f)   # d bracket / d n_m
    stim = p.E * (n + g) + p.A * n                     # d bracket / d f_j factor

    J = np.zeros((y.size, y.size))
    J[:n_modes, :n_modes] = np.diag(-p.cavity.kappa + (eta * gain) @ M)
    J[:n_modes, n_modes:] = (eta * M[None, :]) * stim[:, None]
    J[n_modes:, :n_modes] = -(eta * gain).T
    J[n_modes:, n_modes:] = np.diag(-p.grid.P - p.dye.gamma_down
                                    - eta.T @ stim)
    return J


def _project(n_modes: int):
    def proj(y):
        y[:n_modes] = np.maximum(y[:n_modes], 0.0)
        y[n_modes:] = np.clip(y[n_modes:], 0.0, 1.0)
        return y
    return proj


def evolve(state: SimState, p: NoneqParams, t_final: float,
           cfg: Optional[SolverConfig] = None,
           store_trajectory: bool = False,
           max_steps: int = 5_000_000):
    """Integrate the rate equations from state.t to t_final.

    Adaptive embedded Runge-Kutta with relative tolerance 1e-8 and absolute
    1e-12 by default; populations and excitation fractions are projected back
    into their physical ranges on harmless overshoots.  Returns the final
    SimState, or (SimState, OdeResult) when store_trajectory is set.
    """
    if t_final <= state.t:
        raise ConfigError("t_final must exceed the state time")
    cfg = cfg or SolverConfig(rel_tol=1e-8, abs_tol=1e-12, max_iter=200)
    n_modes = len(p.ladder)
    y0 = np.concatenate([state.n, state.f])
    res = integrate_ode(_rhs(p), y0, (state.t, t_final), cfg=cfg,
                        project=_project(n_modes),
                        store_trajectory=store_trajectory,
                        max_steps=max_steps)
    n, f = _unpack(res.y_final, n_modes)
    out = SimState(n=n, f=f, t=res.t_final)
    return (out, res) if store_trajectory else out


def _analytic_seed(p: NoneqParams) -> SimState:
    f0 = p.grid.P / (p.grid.P + p.dye.gamma_down + 1e-300)
    return SimState(n=np.full(len(p.ladder), 1e-9), f=f0, t=0.0)


def _residual_scales(p: NoneqParams, n0: np.ndarray, f0: np.ndarray):
    """Characteristic one-way rates per equation, frozen for one Newton run.

    Dividing the residual rows by these turns them into dimensionless
    imbalances, so a single absolute tolerance is meaningful across photon
    and molecular equations whose raw rates differ by many decades.
    """
    g = p.ladder.degeneracies
    eta = p.eta.eta
    em = p.E * (n0 + g)
    ab = p.A * n0
    oneway = np.outer(em, f0) + np.outer(ab, 1.0 - f0)
    s_n = p.cavity.kappa * np.maximum(n0, 1.0) + (eta * oneway) @ p.grid.M
    s_f = p.grid.P + p.dye.gamma_down + eta.T @ (em + ab) + 1e-300
    return s_n, s_f


def steady_state(p: NoneqParams, seed: Optional[SimState] = None,
                 tol_factor: float = 1e-10,
                 cfg: Optional[SolverConfig] = None) -> SimState:
    """Stationary point of the rate equations.

    Damped Newton with the analytic Jacobian (checked once against finite
    differences), seeded either by the caller, by the photonless pump balance,
    or by relaxation runs of increasing length when Newton stalls.  Each
    equation's residual is driven below tol_factor times its characteristic
    rate, i.e. the relative imbalance of every equation falls below tol_factor.
    """
    if float(np.max(p.grid.P, initial=0.0)) == 0.0 and seed is None:
        return SimState(n=np.zeros(len(p.ladder)), f=np.zeros(p.grid.n_bins))
    n_modes = len(p.ladder)
    rhs = _rhs(p)

    state = seed if seed is not None else _analytic_seed(p)
    x0 = np.concatenate([state.n, state.f])
    last_err: Exception = SolverError("steady state not attempted")
    # relaxation budgets between Newton attempts: start cheap (photon
    # transients settle within a few thousand stability-limited steps) and
    # escalate only if Newton keeps stalling
    budgets = (2_000, 20_000, 120_000)
    for attempt in range(len(budgets) + 1):
        n0, f0 = _unpack(x0, n_modes)
        s_n, s_f = _residual_scales(p, np.maximum(n0, 0.0),
                                    np.clip(f0, 0.0, 1.0))
        s = np.concatenate([s_n, s_f])
        G = lambda y: rhs(0.0, y) / s
        JG = lambda y: _jacobian(y, p) / s[:, None]
        run_cfg = cfg or SolverConfig(rel_tol=1e-12, abs_tol=tol_factor,
                                      max_iter=120)
        try:
            y = newton_solve(G, JG, x0, cfg=run_cfg)
            n, f = _unpack(y, n_modes)
            if np.min(n) < -1e-9 * max(float(np.max(n)), 1.0) \
                    or np.min(f) < -1e-9 or np.max(f) > 1.0 + 1e-9:
                raise SolverError("Newton left the physical region")
            return SimState(n=np.maximum(n, 0.0), f=np.clip(f, 0.0, 1.0))
        except SolverError as err:
            last_err = err
        if attempt == len(budgets):
            break
        # the explicit step size is stability-limited at ~1/(stiffest rate)
        t_slow = 5.0 / max(p.dye.gamma_down,
                           float(np.max(p.grid.P, initial=0.0)),
                           1e-6 * p.cavity.kappa)
        h_est = 2.5 / max(float(np.max(s_n / np.maximum(n0, 1.0))),
                          float(np.max(s_f)))
        t_relax = min(t_slow, budgets[attempt] * h_est)
        relax = evolve(SimState(n=np.maximum(x0[:n_modes], 0.0),
                                f=np.clip(x0[n_modes:], 0.0, 1.0)),
                       p, t_relax, max_steps=4 * budgets[attempt])
        x0 = np.concatenate([relax.n, relax.f])
    raise SolverError(f"steady state did not converge: {last_err}")


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepResult:
    """Steady states along a pump-rate scan of one configuration."""

    pump_rates: np.ndarray
    states: tuple
    labels: tuple
    gamma: float
    criterion: CriterionConfig

    @property
    def populations(self) -> np.ndarray:
        return np.array([s.n for s in self.states])

    @property
    def n_tot(self) -> np.ndarray:
        return np.array([s.n_tot for s in self.states])

    @property
    def ground_fraction(self) -> np.ndarray:
        return np.array([s.ground_fraction for s in self.states])

    @property
    def f_max(self) -> np.ndarray:
        return np.array([float(s.f.max()) for s in self.states])

    @property
    def threshold_rate(self) -> Optional[float]:
        """First pump rate whose label is condensed under the criterion."""
        for rate, label in zip(self.pump_rates, self.labels):
            if label.phase != Phase.NOT_CONDENSED:
                return float(rate)
        return None

    @property
    def max_truncation_fraction(self) -> float:
        """Largest population fraction in the top two ladder levels; values
        above 0.5% indicate the ladder is cut too short."""
        worst = 0.0
        for s in self.states:
            tot = s.n_tot
            if tot > 0 and s.n.size >= 2:
                worst = max(worst, float((s.n[-1] + s.n[-2]) / tot))
        return worst


def _classify_state(state: SimState, p: NoneqParams,
                    criterion: CriterionConfig) -> PhaseLabel:
    if state.n_tot <= 0.0:
        return label_from_flags([False] * len(p.ladder))
    return classify_condensation(state.n, p.dye.T_dye, p.ladder.spacing,
                                 criterion)


def sweep_pump(p: NoneqParams, rates: Sequence[float],
               criterion: CriterionConfig = CriterionConfig(),
               tol_factor: float = 1e-10) -> SweepResult:
    """Continuation scan over pump rates (strictly increasing), each steady
    state seeding the next; states are classified with the given criterion."""
    rates = np.asarray(rates, dtype=float)
    if rates.size == 0 or np.any(np.diff(rates) <= 0):
        raise ConfigError("pump rates must be strictly increasing")
    states = []
    labels = []
    seed = None
    for k, rate in enumerate(rates):
        pk = p.with_pump_rate(float(rate))
        try:
            st = steady_state(pk, seed=seed, tol_factor=tol_factor)
        except SolverError as err:
            raise SolverError(f"sweep failed at rate index {k} "
                              f"(pump {rate:g}/s): {err}") from err
        states.append(st)
        labels.append(_classify_state(st, pk, criterion))
        seed = st
    return SweepResult(pump_rates=rates, states=tuple(states),
                       labels=tuple(labels), gamma=p.gamma, criterion=criterion)


@dataclass(frozen=True)
class PhaseMapResult:
    """Pump sweeps repeated over a cutoff-wavelength list."""

    lambda0_nm: np.ndarray
    sweeps: tuple

    def rows(self):
        """Flattened (lambda0, pump_rate, gamma, label, ground_fraction) rows."""
        out = []
        for lam, sweep in zip(self.lambda0_nm, self.sweeps):
            for rate, label, gf in zip(sweep.pump_rates, sweep.labels,
                                       sweep.ground_fraction):
                out.append((float(lam), float(rate), sweep.gamma, label, gf))
        return out


def sweep_cutoff(base: NoneqParams, lambda0_list: Sequence[float],
                 rates: Sequence[float],
                 criterion: CriterionConfig = CriterionConfig(),
                 max_workers: int = 1) -> PhaseMapResult:
    """Rebuild the ladder and rates for each cutoff wavelength and sweep the
    pump; sweeps are independent continuation chains and may run in parallel."""
    lams = np.asarray(lambda0_list, dtype=float)
    if lams.size == 0:
        raise ConfigError("need at least one cutoff wavelength")

    def one(lam: float) -> SweepResult:
        cav = base.cavity.with_cutoff(float(lam))
        pk = make_noneq_params(cav, base.dye, base.pump,
                               n_levels=len(base.ladder),
                               n_bins=base.grid.n_bins,
                               r_max_um=float(base.grid.r_edges_um[-1]))
        return sweep_pump(pk, rates, criterion=criterion)

    if max_workers > 1 and lams.size > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            sweeps = tuple(pool.map(one, lams))
    else:
        sweeps = tuple(one(lam) for lam in lams)
    return PhaseMapResult(lambda0_nm=lams, sweeps=sweeps)
