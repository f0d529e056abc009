"""Command-line front end: sweeps, phase maps, fits, and coherence series.

All commands are deterministic and idempotent: no random numbers are used
anywhere in the package, outputs carry the config hash, and rerunning a
command with the same inputs reproduces the files bit for bit.

Exit codes: 0 success, 2 configuration/schema error, 3 solver failure,
4 fit failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .coherence import (CoherenceSeries, coherence_time_single_mode,
                        collapse_time, fit_exponential_coherence, g1_thermal,
                        is_high_n_discrepancy_region)
from .config import RunConfig, load_config
from .constants import H, K_B, C as C_LIGHT
from .core import NM, resolved_mode_list, thermalisation_ratio
from .equilibrium import fit_be
from .errors import ConfigError, DomainError, FitError, PbecError, SolverError
from .microlaser import fit_microlaser
from .noneq import make_noneq_params, sweep_cutoff, sweep_pump
from .core import build_mode_ladder

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_FIT = 4

# Determinism guard for --seedless: the package links no RNG sources; any
# future stochastic feature must register itself here.
RNG_SOURCES: tuple = ()


def _assert_seedless():
    if RNG_SOURCES:
        raise ConfigError(
            f"--seedless requested but RNG sources are linked: {RNG_SOURCES}")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, meta: dict, header: list, rows) -> None:
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _meta(command: str, cfg: RunConfig) -> dict:
    return {
        "generator": f"pbec {__version__}",
        "command": command,
        "config": Path(cfg.source_path).name,
        "config_hash": cfg.config_hash,
    }


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require_sweep(cfg: RunConfig):
    if cfg.sweep_rates is None:
        raise ConfigError("config has no 'sweep' section")
    return cfg.sweep_rates


def _build_params(cfg: RunConfig, lambda0_nm=None):
    cavity = cfg.cavity if lambda0_nm is None else cfg.cavity.with_cutoff(lambda0_nm)
    return make_noneq_params(cavity, cfg.dye, cfg.pump(rate=1.0),
                             n_levels=cfg.n_levels, n_bins=cfg.n_bins,
                             r_max_um=cfg.r_max_um)


def cmd_sweep_pump(args) -> int:
    cfg = load_config(args.config)
    rates = _require_sweep(cfg)
    out = _outdir(args)
    p = _build_params(cfg)
    sweep = sweep_pump(p, rates, criterion=cfg.criterion)

    k = len(p.ladder)
    header = (["pump_rate_per_s", "n_tot"] + [f"n_{i}" for i in range(k)]
              + ["f_max", "phase_label", "gamma"])
    rows = []
    for rate, state, label in zip(sweep.pump_rates, sweep.states, sweep.labels):
        rows.append([rate, state.n_tot] + list(state.n)
                    + [float(state.f.max()), label.phase.value, sweep.gamma])
    csv_path = out / "sweep_pump.csv"
    _write_csv(csv_path, _meta("sweep-pump", cfg), header, rows)

    thr_rate = sweep.threshold_rate
    thr_ntot = None
    if thr_rate is not None:
        idx = int(np.nonzero(sweep.pump_rates == thr_rate)[0][0])
        thr_ntot = float(sweep.n_tot[idx])
    summary = {
        "command": "sweep-pump",
        "config_hash": cfg.config_hash,
        "criterion": cfg.criterion.which.value,
        "alpha": cfg.criterion.alpha,
        "gamma": sweep.gamma,
        "n_points": int(rates.size),
        "threshold_pump_rate_per_s": thr_rate,
        "threshold_n_tot": thr_ntot,
        "ground_fraction_peak": float(sweep.ground_fraction.max()),
        "max_truncation_fraction": sweep.max_truncation_fraction,
        "csv": csv_path.name,
        "seedless": bool(args.seedless),
    }
    _write_json(out / "sweep_pump.json", summary)
    print(f"wrote {csv_path} ({rates.size} points, gamma={sweep.gamma:.3g})")
    return EXIT_OK


def cmd_phase_map(args) -> int:
    cfg = load_config(args.config)
    rates = _require_sweep(cfg)
    if args.lambda0_list:
        lam_list = tuple(float(x) for x in args.lambda0_list.split(","))
    elif cfg.lambda0_list_nm:
        lam_list = cfg.lambda0_list_nm
    else:
        raise ConfigError("no cutoff list: pass --lambda0-list or set "
                          "sweep.lambda0_list_nm")
    out = _outdir(args)
    base = _build_params(cfg, lambda0_nm=lam_list[0])
    pm = sweep_cutoff(base, lam_list, rates, criterion=cfg.criterion,
                      max_workers=max(1, args.threads))

    header = ["lambda0_nm", "pump_rate_per_s", "gamma", "phase_label",
              "ground_fraction"]
    rows = [[lam, rate, gamma, label.phase.value, gf]
            for (lam, rate, gamma, label, gf) in pm.rows()]
    csv_path = out / "phase_map.csv"
    _write_csv(csv_path, _meta("phase-map", cfg), header, rows)

    summary = {
        "command": "phase-map",
        "config_hash": cfg.config_hash,
        "criterion": cfg.criterion.which.value,
        "lambda0_nm": list(lam_list),
        "gamma": [s.gamma for s in pm.sweeps],
        "top_phase": [s.labels[-1].phase.value for s in pm.sweeps],
        "ground_fraction_peak": [float(s.ground_fraction.max()) for s in pm.sweeps],
        "csv": csv_path.name,
        "seedless": bool(args.seedless),
    }
    _write_json(out / "phase_map.json", summary)
    print(f"wrote {csv_path} ({len(lam_list)} cutoffs x {rates.size} pump points)")
    return EXIT_OK


def _read_data_csv(path, n_cols: int, what: str) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"data file not found: {path}")
    rows = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != n_cols:
            raise ConfigError(
                f"{what} data line {lineno}: expected {n_cols} columns "
                f"({path.name})")
        if not rows and not all(_is_float(p) for p in parts):
            continue  # leading header row
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ConfigError(f"{what} data line {lineno}: non-numeric entry")
    if not rows:
        raise ConfigError(f"{what} data file has no rows")
    return np.asarray(rows)


def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def cmd_fit(args) -> int:
    out = _outdir(args)
    kind = args.kind
    report = {"command": f"fit {kind}", "data": Path(args.data).name}
    if kind == "be":
        if not args.config:
            raise ConfigError("fit be needs --config for the mode ladder")
        cfg = load_config(args.config)
        data = _read_data_csv(args.data, 2, "be")
        ladder = build_mode_ladder(cfg.cavity, cfg.n_levels)
        res = fit_be([(int(i), s) for i, s in data], ladder)
        report.update({
            "config_hash": cfg.config_hash,
            "T_K": res.params.T,
            "mu_J": res.params.mu,
            "mu_over_kT": res.params.mu / (K_B * res.params.T),
            "scale": res.params.scale,
            "residual": res.residual,
            "n_iter": res.n_iter,
            "at_bounds": res.at_bounds,
        })
    elif kind == "microlaser":
        data = _read_data_csv(args.data, 2, "microlaser")
        res = fit_microlaser([(p, s) for p, s in data])
        report.update({
            "beta": res.params.beta,
            "P_th": res.params.P_th,
            "kappa_pump_units": res.params.kappa,
            "scale": res.params.scale,
            "residual": res.residual,
            "n_iter": res.n_iter,
            "at_bounds": res.at_bounds,
            "beta_identifiable": res.beta_identifiable,
        })
    elif kind == "coherence":
        data = _read_data_csv(args.data, 2, "coherence")
        series = CoherenceSeries(tau=data[:, 0],
                                 g1=np.minimum(data[:, 1], 1.0).astype(complex))
        res = fit_exponential_coherence(series)
        if not res.ok:
            raise FitError(f"coherence fit failed: {res.message}")
        report.update({
            "tau_c_s": res.tau_c,
            "tau_0_s": res.tau_0,
            "amplitude": res.amplitude,
            "residual": res.residual,
        })
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown fit kind {kind}")
    path = out / f"fit_{kind}.json"
    _write_json(path, report)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_coherence(args) -> int:
    cfg = load_config(args.config)
    out = _outdir(args)
    tau = np.linspace(0.0, cfg.coh_tau_max_ps * 1e-12, cfg.coh_n_tau)
    meta = _meta(f"coherence --mode {args.mode}", cfg)

    if args.mode == "multimode":
        resolved = resolved_mode_list(cfg.cavity, cfg.coh_n_levels)
        damping = None
        if cfg.coh_include_damping:
            damping = [0.5 * (cfg.cavity.kappa
                              + cfg.dye.n_mol
                              * cfg.dye.sigma(H * C_LIGHT / m.energy / NM)
                              * cfg.cavity.c_star)
                       for m in resolved]
        T = cfg.coh_populations_t_k or cfg.dye.T_dye
        series = g1_thermal(resolved, T, tau, damping=damping)
        sidecar = {
            "command": "coherence",
            "mode": "multimode",
            "config_hash": cfg.config_hash,
            "T_K": T,
            "n_levels": cfg.coh_n_levels,
            "include_damping": cfg.coh_include_damping,
        }
        try:
            sidecar["collapse_time_s"] = collapse_time(series)
        except DomainError:
            sidecar["collapse_time_s"] = None
    else:
        lam0 = cfg.cavity.lambda0_nm
        reabs = cfg.dye.n_mol * cfg.dye.sigma(lam0) * cfg.cavity.c_star
        tau_c = coherence_time_single_mode(cfg.cavity.kappa, reabs)
        series = CoherenceSeries(tau=tau, g1=np.exp(-np.abs(tau) / tau_c)
                                 .astype(complex))
        fit = fit_exponential_coherence(series)
        sidecar = {
            "command": "coherence",
            "mode": "single",
            "config_hash": cfg.config_hash,
            "gamma": thermalisation_ratio(cfg.dye, cfg.cavity, lam0),
            "tau_c_s": tau_c,
            "tau_c_fit_s": fit.tau_c if fit.ok else None,
            "low_n_only": True,
            "high_n_discrepancy_note": (
                "the linear-in-n coherence-time growth is not expected to "
                "hold for ground-mode occupations beyond ~50 photons; that "
                "region is flagged by is_high_n_discrepancy_region()"),
        }

    header = ["tau_s", "re_g1", "im_g1", "abs_g1"]
    rows = [[t, g.real, g.imag, abs(g)] for t, g in zip(series.tau, series.g1)]
    csv_path = out / f"coherence_{args.mode}.csv"
    _write_csv(csv_path, meta, header, rows)
    _write_json(out / f"coherence_{args.mode}.json", sidecar)
    print(f"wrote {csv_path} ({tau.size} delays)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pbec",
        description="Photon condensation laboratory: rate-model sweeps, "
                    "equilibrium and microlaser fits, coherence series.",
        epilog="CSV column orders are fixed: sweep-pump -> pump_rate_per_s, "
               "n_tot, n_0..n_{K-1}, f_max, phase_label, gamma; phase-map -> "
               "lambda0_nm, pump_rate_per_s, gamma, phase_label, "
               "ground_fraction; coherence -> tau_s, re_g1, im_g1, abs_g1.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for independent sweep chains")
        p.add_argument("--seedless", action="store_true",
                       help="assert that no random number source is linked "
                            "(all runs are deterministic either way)")

    p = sub.add_parser("sweep-pump", help="steady states along a pump scan")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(func=cmd_sweep_pump)

    p = sub.add_parser("phase-map", help="pump scans over a cutoff-wavelength list")
    p.add_argument("--config", required=True)
    p.add_argument("--lambda0-list", default=None,
                   help="comma-separated cutoff wavelengths [nm]")
    common(p)
    p.set_defaults(func=cmd_phase_map)

    p = sub.add_parser("fit", help="least-squares fits of measured curves")
    p.add_argument("kind", choices=["be", "microlaser", "coherence"])
    p.add_argument("--data", required=True,
                   help="CSV: be -> level_index,signal; microlaser -> "
                        "pump,signal; coherence -> tau_s,visibility")
    p.add_argument("--config", default=None,
                   help="run config (required for 'be': supplies the ladder)")
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("coherence", help="first-order coherence series")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", choices=["multimode", "single"], default="multimode")
    common(p)
    p.set_defaults(func=cmd_coherence)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seedless:
            _assert_seedless()
        return args.func(args)
    except (ConfigError, DomainError) as err:
        print(f"pbec: config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except FitError as err:
        print(f"pbec: fit error: {err}", file=sys.stderr)
        return EXIT_FIT
    except SolverError as err:
        print(f"pbec: solver error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except PbecError as err:
        print(f"pbec: error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
