"""Run configuration: hierarchical YAML with explicit unit suffixes in key names.

Every physical key carries its unit (``lambda0_nm``, ``kappa_per_s``,
``waist_um``, ...); unknown keys are rejected so typos cannot silently change
a run.  ``dye.spectra_file`` is either ``builtin:reference`` (the bundled
calibrated table) or a path resolved relative to the config file.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .core import CavityConfig, DyeModel, load_dye_spectra, reference_dye
from .equilibrium import Criterion, CriterionConfig
from .errors import ConfigError
from .noneq import PumpConfig

_SECTIONS = {
    "cavity": {"q", "lambda0_nm", "f_x_thz", "f_y_thz", "kappa_per_s",
               "n_medium", "roc_um"},
    "dye": {"spectra_file", "lambda_zpl_nm", "t_dye_k", "n_mol_per_m3",
            "gamma_down_per_s"},
    "pump": {"waist_um"},
    "ladder": {"n_levels"},
    "grid": {"n_bins", "r_max_um"},
    "sweep": {"pump_rate_min_per_s", "pump_rate_max_per_s", "n_points",
              "spacing", "lambda0_list_nm"},
    "criterion": {"which", "alpha"},
    "coherence": {"n_levels", "tau_max_ps", "n_tau", "include_damping",
                  "populations_t_k"},
    "solver": {"rel_tol", "abs_tol"},
}
_REQUIRED = ("cavity", "dye", "pump")


@dataclass(frozen=True)
class RunConfig:
    cavity: CavityConfig
    dye: DyeModel
    pump_waist_um: float
    n_levels: int
    n_bins: int
    r_max_um: Optional[float]
    sweep_rates: Optional[np.ndarray]
    lambda0_list_nm: Optional[tuple]
    criterion: CriterionConfig
    coh_n_levels: int
    coh_tau_max_ps: float
    coh_n_tau: int
    coh_include_damping: bool
    coh_populations_t_k: Optional[float]
    config_hash: str
    source_path: str

    def pump(self, rate: float = 0.0) -> PumpConfig:
        return PumpConfig(waist_um=self.pump_waist_um, rate=rate)


def _check_keys(section: str, entries: dict) -> None:
    allowed = _SECTIONS[section]
    unknown = set(entries) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) {sorted(unknown)} in section '{section}' "
            f"(allowed: {sorted(allowed)})")


def _get(entries: dict, key: str, kind=float, default=None, required=True):
    if key not in entries:
        if required and default is None:
            raise ConfigError(f"missing required key '{key}'")
        return default
    try:
        return kind(entries[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"key '{key}': expected {kind.__name__}") from exc


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw_bytes = path.read_bytes()
    try:
        doc = yaml.safe_load(raw_bytes)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping of sections")
    unknown = set(doc) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown section(s): {sorted(unknown)}")
    for sec in _REQUIRED:
        if sec not in doc:
            raise ConfigError(f"missing required section '{sec}'")
    for sec, entries in doc.items():
        if not isinstance(entries, dict):
            raise ConfigError(f"section '{sec}' must be a mapping")
        _check_keys(sec, entries)

    cav = doc["cavity"]
    cavity = CavityConfig(
        q=_get(cav, "q", int),
        lambda0_nm=_get(cav, "lambda0_nm"),
        f_x_thz=_get(cav, "f_x_thz"),
        f_y_thz=_get(cav, "f_y_thz"),
        kappa=_get(cav, "kappa_per_s"),
        n_medium=_get(cav, "n_medium", float, default=1.0, required=False),
        roc_um=_get(cav, "roc_um", float, default=None, required=False),
    )

    dy = doc["dye"]
    dye_kwargs = dict(
        lambda_zpl_nm=_get(dy, "lambda_zpl_nm"),
        T_dye=_get(dy, "t_dye_k"),
        n_mol=_get(dy, "n_mol_per_m3"),
        gamma_down=_get(dy, "gamma_down_per_s"),
    )
    spectra = _get(dy, "spectra_file", str)
    if spectra == "builtin:reference":
        dye = reference_dye(**dye_kwargs)
    else:
        spectra_path = (path.parent / spectra).resolve()
        if not spectra_path.exists():
            raise ConfigError(f"dye spectra file not found: {spectra_path}")
        dye = load_dye_spectra(spectra_path, **dye_kwargs)

    pump_waist = _get(doc["pump"], "waist_um")

    ladder = doc.get("ladder", {})
    n_levels = _get(ladder, "n_levels", int, default=20, required=False)

    grid = doc.get("grid", {})
    n_bins = _get(grid, "n_bins", int, default=64, required=False)
    r_max = _get(grid, "r_max_um", float, default=None, required=False)

    sweep_rates = None
    lambda0_list = None
    if "sweep" in doc:
        sw = doc["sweep"]
        lo = _get(sw, "pump_rate_min_per_s")
        hi = _get(sw, "pump_rate_max_per_s")
        n = _get(sw, "n_points", int, default=25, required=False)
        spacing = _get(sw, "spacing", str, default="log", required=False)
        if not (0 < lo < hi) or n < 1:
            raise ConfigError("sweep needs 0 < min < max and n_points >= 1")
        if spacing == "log":
            sweep_rates = np.geomspace(lo, hi, n)
        elif spacing == "linear":
            sweep_rates = np.linspace(lo, hi, n)
        else:
            raise ConfigError("sweep.spacing must be 'log' or 'linear'")
        lam_list = sw.get("lambda0_list_nm")
        if lam_list is not None:
            lambda0_list = tuple(float(x) for x in lam_list)

    crit = doc.get("criterion", {})
    criterion = CriterionConfig(
        alpha=_get(crit, "alpha", float, default=2.0, required=False),
        which=Criterion(_get(crit, "which", str, default="iv", required=False)),
    )

    coh = doc.get("coherence", {})
    coh_n_levels = _get(coh, "n_levels", int, default=40, required=False)
    coh_tau_max = _get(coh, "tau_max_ps", float, default=1.2, required=False)
    coh_n_tau = _get(coh, "n_tau", int, default=600, required=False)
    coh_damping = bool(coh.get("include_damping", False))
    coh_pop_t = _get(coh, "populations_t_k", float, default=None, required=False)

    return RunConfig(
        cavity=cavity, dye=dye, pump_waist_um=pump_waist,
        n_levels=n_levels, n_bins=n_bins, r_max_um=r_max,
        sweep_rates=sweep_rates, lambda0_list_nm=lambda0_list,
        criterion=criterion,
        coh_n_levels=coh_n_levels, coh_tau_max_ps=coh_tau_max,
        coh_n_tau=coh_n_tau, coh_include_damping=coh_damping,
        coh_populations_t_k=coh_pop_t,
        config_hash=hashlib.sha256(raw_bytes).hexdigest()[:16],
        source_path=str(path),
    )
