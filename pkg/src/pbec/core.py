"""Cavity and dye configuration, transverse mode ladder, and thermalisation rates.

Conventions: wavelengths in nm (vacuum), trap frequencies in THz, rates in 1/s,
energies in J.  Photon energies always refer to the vacuum wavelength
(eps = h*c/lambda); the medium only enters through the reduced speed of light
c* = c/n_medium and the cavity length.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .constants import C, H, HBAR, K_B
from .errors import ConfigError, DomainError

NM = 1e-9
UM = 1e-6
THZ = 1e12


@dataclass(frozen=True)
class CavityConfig:
    """Microcavity geometry and loss.

    q: longitudinal mode number (half wavelengths along the axis).
    lambda0_nm: cutoff vacuum wavelength of the lowest transverse mode.
    f_x_thz, f_y_thz: transverse trap frequencies of the mirror-defined
        harmonic potential.
    kappa: cavity photon loss rate [1/s].
    n_medium: refractive index of the intracavity medium.
    roc_um: optional mirror radius of curvature, used by
        derive_trap_frequency(); direct f_x/f_y settings always apply.
    """

    q: int
    lambda0_nm: float
    f_x_thz: float
    f_y_thz: float
    kappa: float
    n_medium: float = 1.0
    roc_um: Optional[float] = None

    def __post_init__(self):
        if self.q < 1:
            raise ConfigError(f"longitudinal mode number q must be >= 1, got {self.q}")
        if self.lambda0_nm <= 0:
            raise ConfigError("cutoff wavelength must be positive")
        if self.f_x_thz <= 0 or self.f_y_thz <= 0:
            raise ConfigError("trap frequencies must be positive")
        if self.kappa <= 0:
            raise ConfigError("cavity loss rate must be positive")
        if self.n_medium < 1:
            raise ConfigError("refractive index must be >= 1")
        if self.roc_um is not None:
            if self.length_m >= self.roc_um * UM:
                raise ConfigError(
                    f"cavity length {self.length_m / UM:.3g} um must be below the "
                    f"mirror radius of curvature {self.roc_um:.3g} um")

    @property
    def length_m(self) -> float:
        """Geometric cavity length q*lambda_medium/2."""
        return self.q * (self.lambda0_nm * NM / self.n_medium) / 2.0

    @property
    def c_star(self) -> float:
        """Speed of light in the medium."""
        return C / self.n_medium

    @property
    def f_mean_thz(self) -> float:
        return 0.5 * (self.f_x_thz + self.f_y_thz)

    @property
    def eps0(self) -> float:
        """Cutoff photon energy h*c/lambda0 [J]."""
        return H * C / (self.lambda0_nm * NM)

    @property
    def photon_mass_kg(self) -> float:
        """Effective transverse photon mass hbar*k_z/c* = h*n^2/(lambda0*c)."""
        return H * self.n_medium ** 2 / (self.lambda0_nm * NM * C)

    @property
    def oscillator_length_m(self) -> float:
        """Ground-mode length scale sqrt(hbar/(m*omega)) of the transverse trap."""
        omega = 2.0 * math.pi * self.f_mean_thz * THZ
        return math.sqrt(HBAR / (self.photon_mass_kg * omega))

    def with_frequency(self, f_thz: float) -> "CavityConfig":
        return CavityConfig(q=self.q, lambda0_nm=self.lambda0_nm, f_x_thz=f_thz,
                            f_y_thz=f_thz, kappa=self.kappa,
                            n_medium=self.n_medium, roc_um=self.roc_um)

    def with_cutoff(self, lambda0_nm: float) -> "CavityConfig":
        return CavityConfig(q=self.q, lambda0_nm=lambda0_nm, f_x_thz=self.f_x_thz,
                            f_y_thz=self.f_y_thz, kappa=self.kappa,
                            n_medium=self.n_medium, roc_um=self.roc_um)


def derive_trap_frequency(cavity: CavityConfig) -> float:
    """Transverse trap frequency [THz] from the plano-concave cavity geometry.

    Paraxial mode-spacing approximation f = c* / (2*pi*sqrt(L*R)) for a cavity
    of length L closed by a mirror of curvature radius R.  Requires roc_um.
    """
    if cavity.roc_um is None:
        raise ConfigError("derive_trap_frequency needs a mirror radius of curvature")
    L = cavity.length_m
    roc = cavity.roc_um * UM
    if L >= roc:
        raise ConfigError("cavity length must be below the mirror curvature radius")
    return cavity.c_star / (2.0 * math.pi * math.sqrt(L * roc)) / THZ


@dataclass(frozen=True)
class DyeModel:
    """Dye absorption spectrum and molecular-reservoir parameters.

    wavelengths_nm / sigma_m2: tabulated absorption cross-section on a strictly
        increasing vacuum-wavelength grid.
    lambda_zpl_nm: zero-phonon line, the pivot of the emission/absorption
        detailed-balance ratio.
    T_dye: dye/solvent temperature [K].
    n_mol: effective molecular number density [1/m^3].
    gamma_down: total non-cavity decay rate of an excited molecule
        (free-space emission plus nonradiative) [1/s].
    """

    wavelengths_nm: np.ndarray
    sigma_m2: np.ndarray
    lambda_zpl_nm: float
    T_dye: float
    n_mol: float
    gamma_down: float

    def __post_init__(self):
        wl = np.asarray(self.wavelengths_nm, dtype=float)
        sg = np.asarray(self.sigma_m2, dtype=float)
        if wl.size < 2:
            raise ConfigError("dye spectrum needs at least 2 grid points")
        if wl.size != sg.size:
            raise ConfigError("wavelength and cross-section arrays differ in length")
        if np.any(np.diff(wl) <= 0):
            raise ConfigError("dye wavelength grid must be strictly increasing")
        if np.any(sg < 0):
            raise ConfigError("absorption cross-sections must be non-negative")
        if self.T_dye <= 0:
            raise ConfigError("dye temperature must be positive")
        if self.n_mol <= 0:
            raise ConfigError("molecular density must be positive")
        if self.gamma_down < 0:
            raise ConfigError("non-cavity decay rate must be non-negative")
        wl.setflags(write=False)
        sg.setflags(write=False)
        object.__setattr__(self, "wavelengths_nm", wl)
        object.__setattr__(self, "sigma_m2", sg)

    @property
    def eps_zpl(self) -> float:
        return H * C / (self.lambda_zpl_nm * NM)

    def sigma(self, lambda_nm: float) -> float:
        """Linearly interpolated absorption cross-section [m^2] at lambda_nm."""
        wl = self.wavelengths_nm
        if lambda_nm < wl[0] or lambda_nm > wl[-1]:
            raise DomainError(
                f"wavelength {lambda_nm:g} nm outside tabulated range "
                f"[{wl[0]:g}, {wl[-1]:g}] nm")
        return float(np.interp(lambda_nm, wl, self.sigma_m2))


def thermalisation_ratio(dye: DyeModel, cavity: CavityConfig,
                         lambda_nm: float) -> float:
    """Ratio of photon re-absorption to cavity loss, n_mol*sigma(lambda)*c*/kappa."""
    return dye.n_mol * dye.sigma(lambda_nm) * cavity.c_star / cavity.kappa


def kennard_stepanov_ratio(delta: float, T: float) -> float:
    """Emission/absorption rate ratio exp(-delta/(k_B*T)) at detuning delta [J]
    from the zero-phonon line, for a dye bath at temperature T [K]."""
    if T <= 0:
        raise DomainError("temperature must be positive")
    return math.exp(-delta / (K_B * T))


@dataclass(frozen=True)
class ModeGroup:
    index: int
    energy: float        # [J], vacuum photon energy
    degeneracy: int
    lambda_nm: float     # vacuum wavelength of the group


@dataclass(frozen=True)
class ResolvedMode:
    j_x: int
    j_y: int
    energy: float        # [J]


@dataclass(frozen=True)
class ModeLadder:
    """Transverse mode spectrum, grouped by level with degeneracy i+1.

    For anisotropic traps a resolved (j_x, j_y) listing accompanies the
    grouped view; populations always live on the grouped ladder.
    """

    modes: tuple
    resolved: Optional[tuple] = None

    def __post_init__(self):
        energies = [m.energy for m in self.modes]
        if any(e2 <= e1 for e1, e2 in zip(energies, energies[1:])):
            raise ConfigError("mode energies must be strictly increasing")
        for i, m in enumerate(self.modes):
            if m.degeneracy != i + 1:
                raise ConfigError("grouped ladder must have degeneracy i+1")

    def __len__(self):
        return len(self.modes)

    @property
    def energies(self) -> np.ndarray:
        return np.array([m.energy for m in self.modes])

    @property
    def degeneracies(self) -> np.ndarray:
        return np.array([m.degeneracy for m in self.modes], dtype=float)

    @property
    def wavelengths_nm(self) -> np.ndarray:
        return np.array([m.lambda_nm for m in self.modes])

    @property
    def eps0(self) -> float:
        return self.modes[0].energy

    @property
    def spacing(self) -> float:
        """Grouped level spacing h*f_mean [J]."""
        return self.modes[1].energy - self.modes[0].energy if len(self.modes) > 1 \
            else 0.0


def build_mode_ladder(cavity: CavityConfig, n_levels: int) -> ModeLadder:
    """Grouped 2D-harmonic-oscillator ladder above the cavity cutoff.

    Level i sits at eps_0 + i*h*f with f = (f_x+f_y)/2 and degeneracy i+1;
    eps_0 = h*c/lambda0.  For anisotropic traps (f_x != f_y) the resolved
    (j_x, j_y) levels at eps_0 + h*(f_x*j_x + f_y*j_y) are attached as well.
    Frequencies differing by more than 50% are rejected: the grouped
    degeneracy would be meaningless.
    """
    if n_levels < 1:
        raise ConfigError(f"n_levels must be >= 1, got {n_levels}")
    fx, fy = cavity.f_x_thz, cavity.f_y_thz
    if abs(fx - fy) > 0.5 * min(fx, fy):
        raise ConfigError(
            f"trap frequencies {fx:g} and {fy:g} THz differ by more than 50%; "
            "a grouped degenerate ladder is not meaningful")
    eps0 = cavity.eps0
    step = H * cavity.f_mean_thz * THZ
    modes = tuple(
        ModeGroup(index=i, energy=eps0 + i * step, degeneracy=i + 1,
                  lambda_nm=H * C / (eps0 + i * step) / NM)
        for i in range(n_levels))
    resolved = None
    if fx != fy:
        resolved = tuple(resolved_mode_list(cavity, n_levels))
    return ModeLadder(modes=modes, resolved=resolved)


def resolved_mode_list(cavity: CavityConfig, n_levels: int) -> list:
    """All (j_x, j_y) modes with j_x + j_y < n_levels, ordered by (j_x+j_y, j_x)."""
    if n_levels < 1:
        raise ConfigError(f"n_levels must be >= 1, got {n_levels}")
    eps0 = cavity.eps0
    out = []
    for total in range(n_levels):
        for jx in range(total + 1):
            jy = total - jx
            energy = eps0 + H * (cavity.f_x_thz * jx + cavity.f_y_thz * jy) * THZ
            out.append(ResolvedMode(j_x=jx, j_y=jy, energy=energy))
    return out


# ---------------------------------------------------------------------------
# Dye spectra file I/O
# ---------------------------------------------------------------------------
# Format: plain text, '#' comments, one "wavelength_nm<TAB or ,>sigma_m2" row
# per grid point, wavelengths strictly increasing.

def _parse_spectra_rows(text: str):
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t") if "\t" in line else line.split(",")
        if len(parts) != 2:
            raise ConfigError(f"line {lineno}: expected 2 columns, got {len(parts)}")
        try:
            wl, sg = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: non-numeric entry") from exc
        rows.append((wl, sg))
    return rows


def load_dye_spectra(source: Union[str, Path, io.TextIOBase], *,
                     lambda_zpl_nm: float, T_dye: float, n_mol: float,
                     gamma_down: float) -> DyeModel:
    """Read an absorption table and build a DyeModel.

    The file carries only the (wavelength, cross-section) grid; the
    zero-phonon line, dye temperature, molecular density and non-cavity decay
    rate are not part of the table and must be supplied.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    rows = _parse_spectra_rows(text)
    if len(rows) < 2:
        raise ConfigError(f"dye spectrum needs at least 2 rows, got {len(rows)}")
    wl = np.array([r[0] for r in rows])
    sg = np.array([r[1] for r in rows])
    if np.any(np.diff(wl) == 0):
        raise ConfigError("duplicate wavelength rows in dye spectrum")
    if np.any(np.diff(wl) < 0):
        raise ConfigError("dye spectrum wavelengths must be increasing")
    return DyeModel(wavelengths_nm=wl, sigma_m2=sg, lambda_zpl_nm=lambda_zpl_nm,
                    T_dye=T_dye, n_mol=n_mol, gamma_down=gamma_down)


def save_dye_spectra(dye: DyeModel, path: Union[str, Path],
                     comment: str = "") -> None:
    """Write the absorption table in the plain-text format load_dye_spectra reads.

    Values are written with full float precision so a round trip is bit-exact.
    """
    lines = []
    if comment:
        for c in comment.splitlines():
            lines.append(f"# {c}")
    lines.append("# wavelength_nm\tsigma_m2")
    for wl, sg in zip(dye.wavelengths_nm, dye.sigma_m2):
        lines.append(f"{float(wl)!r}\t{float(sg)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


# Reference dye calibration: with these parameters and 1/kappa = 5 ps in a
# n = 1.44 medium, the bundled table gives thermalisation ratios of 6.7, 2.7
# and 0.15 at cutoffs of 557, 563 and 580 nm.  gamma_down is the strongly
# mirror-suppressed free-space loss (most spontaneous emission is recaptured).
REFERENCE_DYE_PARAMS = dict(lambda_zpl_nm=545.0, T_dye=300.0, n_mol=3.0e23,
                            gamma_down=1.0e7)


def reference_dye(**overrides) -> DyeModel:
    """Bundled reference dye: rhodamine-like absorption spectrum, calibrated
    against the three thermalisation-ratio anchors (see REFERENCE_DYE_PARAMS)."""
    params = dict(REFERENCE_DYE_PARAMS)
    params.update(overrides)
    ref = resources.files("pbec.data").joinpath("dye_reference.tsv")
    with resources.as_file(ref) as path:
        return load_dye_spectra(path, **params)
