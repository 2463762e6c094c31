"""Command-line front end: ``diracloc <experiment> [flags]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis
from .config import EXPERIMENTS, OUT_ENV, ConfigError, RunConfig, parse_config
from .disorder import DisorderSpec
from .dynamics import moment_series
from .lattice import LatticeConfig
from .transfer import critical_energies, energy_sweep, lyapunov_exponent, write_sweep_csv


def _spec(cfg: RunConfig) -> DisorderSpec:
    if cfg.v == 0:
        return DisorderSpec(kind="constant_zero", seed=cfg.seed)
    return DisorderSpec(v=cfg.v, p=cfg.p, seed=cfg.seed)


def _run_lyapunov_sweep(cfg):
    spec = _spec(cfg)
    estimates = energy_sweep(cfg.energy_grid(), spec, cfg.mass, cfg.c, cfg.n_steps,
                             cfg.n_realizations or 8, refine=spec.kind != "constant_zero",
                             threads=cfg.threads)
    report = analysis.ExperimentReport("lyapunov-sweep", dict(m=cfg.mass, c=cfg.c, v=cfg.v, p=cfg.p))
    critical = critical_energies(cfg.mass, cfg.c, cfg.v).energies if cfg.v > 0 else ()
    for est in estimates:
        if any(np.isclose(est.energy, e, rtol=1e-12, atol=1e-12) for e in critical):
            report.check(f"gamma_E{est.energy:.6g}", est.gamma, est.gamma <= 1e-3, "<= 1e-3")
    report.measured["n_energies"] = len(estimates)
    return report, lambda out: [write_sweep_csv(estimates, out / "sweep.csv")]


def _run_critical(cfg):
    cset = critical_energies(cfg.mass, cfg.c, cfg.v)
    report = analysis.ExperimentReport("critical-energies", dict(m=cfg.mass, c=cfg.c, v=cfg.v, p=cfg.p))
    report.measured.update(regime=cset.regime, energies=list(cset.energies))
    if cfg.check:
        for e in cset.energies:
            est = lyapunov_exponent(e, _spec(cfg), cfg.mass, cfg.c, cfg.n_steps,
                                    cfg.n_realizations or 8, threads=cfg.threads)
            report.measured[f"gamma_E{e:.6g}"] = est.gamma
            report.check(f"gamma_E{e:.6g}", est.gamma, est.gamma <= 1e-3, "<= 1e-3")
    return report, None


def _run_moments(cfg):
    n = cfg.n_sites or 401
    grid = cfg.time_grid(1.0, analysis.light_cone_time(n, cfg.c), 40)
    config = LatticeConfig(n, cfg.boundary, cfg.mass, cfg.c)
    series = moment_series(config, _spec(cfg), grid, cfg.n_realizations or 4,
                           initial=cfg.initial, threads=cfg.threads)
    report = analysis.ExperimentReport("moments", dict(m=cfg.mass, c=cfg.c, v=cfg.v, p=cfg.p,
                                                       n_sites=n, initial=cfg.initial))
    report.series["moments"] = series
    report.measured["n_flagged"] = int(series.flagged.sum())
    report.measured["M_final"] = float(series.values[-1])
    try:
        fit = analysis.fit_growth_exponent(series, (grid[len(grid) // 2], grid[-1]))
        report.measured.update(alpha_late=fit.exponent, r2_late=fit.r_squared)
    except ValueError as exc:
        report.measured["fit"] = str(exc)
    report.check("unflagged", report.measured["n_flagged"], report.measured["n_flagged"] == 0, "== 0")
    return report, None


def _run_delocalization(cfg):
    n = cfg.n_sites or 2001
    grid = None if cfg.times is None and cfg.t_max is None else \
        cfg.time_grid(1.0, analysis.light_cone_time(n, cfg.c), 40)
    return analysis.delocalization_experiment(
        cfg.v, cfg.c, cfg.p, sizes=(n,), t_grid=grid, seed=cfg.seed,
        n_realizations=cfg.n_realizations or 16, initial=cfg.initial, threads=cfg.threads), None


def _run_localization(cfg):
    return analysis.localization_experiment(
        cfg.mass, cfg.v, cfg.c, cfg.p, t_grid=cfg.time_grid(1.0, 1e5, 41), seed=cfg.seed,
        n_sites=cfg.n_sites or 201, n_realizations=cfg.n_realizations or 16,
        threads=cfg.threads), None


def _run_mass_gap(cfg):
    return analysis.mass_gap_experiment(
        cfg.masses or (1e-3,), cfg.c, cfg.v, cfg.p, t_grid=cfg.time_grid(0.05, 50.0, 40),
        seed=cfg.seed, n_sites=cfg.n_sites or 301, n_realizations=cfg.n_realizations or 4,
        threads=cfg.threads), None


def _run_nrl(cfg):
    times = cfg.times if cfg.times is not None else (0.0, 1.0, 2.0, 5.0)
    return analysis.nrl_experiment(cfg.mass or 1.0, cfg.c_list or (5.0, 10.0, 20.0), cfg.v, cfg.p,
                                   times, cfg.seed, cfg.n_sites or 201), None


def _run_zitter(cfg):
    grid = np.asarray(cfg.times) if cfg.times is not None else np.arange(0.0, 40.0, 0.05)
    return analysis.zitterbewegung_experiment(cfg.mass, cfg.c, grid, cfg.n_sites or 401), None


def _run_eigenfunctions(cfg):
    config = LatticeConfig(cfg.n_sites or 801, "open", cfg.mass, cfg.c)
    return analysis.eigenfunction_decay(config, _spec(cfg), n_steps=cfg.n_steps), None


RUNNERS = {
    "lyapunov-sweep": _run_lyapunov_sweep, "critical-energies": _run_critical,
    "moments": _run_moments, "delocalization": _run_delocalization,
    "localization": _run_localization, "mass-gap": _run_mass_gap, "nrl": _run_nrl,
    "zitter": _run_zitter, "eigenfunctions": _run_eigenfunctions,
}


def write_manifest(cfg: RunConfig, out: Path) -> Path:
    lines = [f"version={__version__}", *cfg.canonical()]
    for origin in ("file", "flag"):
        given = {k: v[origin] for k, v in sorted(cfg.sources.items()) if origin in v}
        if given:
            lines.append(f"[{origin}]")
            lines += [f"{k}={v}" for k, v in given.items()]
    path = out / "manifest.txt"
    path.write_text("\n".join(lines) + "\n")
    return path


def run(cfg: RunConfig) -> int:
    """Execute one experiment, write its artifacts and return the exit status."""
    out = cfg.output_dir()
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    report, extra_writer = RUNNERS[cfg.experiment](cfg)
    report.provenance.setdefault("version", __version__)
    report.provenance["seed"] = cfg.seed
    write_manifest(cfg, out)
    written = report.write(out)
    if extra_writer:
        written += extra_writer(out)
    csvs = [p.name for p in written if p.suffix == ".csv"]
    if csvs:
        analysis.write_plot_script(out, csvs)
    status = "PASS" if report.passed else "FAIL"
    print(f"{cfg.experiment}: {status} -> {out}")
    for name, c in report.checks.items():
        print(f"  [{'ok' if c['passed'] else 'FAIL'}] {name}: {json.dumps(c['value'])} ({c['threshold']})")
    if cfg.check and not report.passed:
        return 1
    return 0


HELP = {
    "lyapunov-sweep": "Lyapunov exponent over an energy grid (e_min, e_max, n_energies)",
    "critical-energies": "catalogue of zero-exponent energies; --check measures them",
    "moments": "disorder-averaged time-averaged second moment M(t)",
    "delocalization": "massless growth exponent with a localized contrast",
    "localization": "saturation of M(t) and size stability",
    "mass-gap": "deviation of small-mass moments from the massless ones",
    "nrl": "upper component against Schrodinger evolution as c grows",
    "zitter": "velocity oscillation of a free packet",
    "eigenfunctions": "eigenfunction decay rates against the Lyapunov exponent",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diracloc", description="Localization experiments for the disordered lattice Dirac operator.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=HELP[name], description=HELP[name])
        sp.add_argument("--config", type=Path, help="key=value configuration file")
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<experiment>)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--realizations", type=int, dest="n_realizations")
        sp.add_argument("--sites", type=int, dest="n_sites")
        sp.add_argument("--mass", type=float)
        sp.add_argument("--c", type=float)
        sp.add_argument("--v", type=float)
        sp.add_argument("--p", type=float)
        sp.add_argument("--threads", type=int, help="worker threads, 0 = one per CPU")
        sp.add_argument("--check", action="store_const", const=True,
                        help="exit nonzero when any acceptance check fails")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="any other configuration key")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "set") and v is not None}
    for item in args.set:
        if "=" not in item:
            parser.error(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        flags[key.strip().replace("-", "_")] = value.strip()
    text = None
    if args.config:
        try:
            text = args.config.read_text()
        except OSError as exc:
            parser.error(f"cannot read {args.config}: {exc}")
    try:
        cfg = parse_config(text, flags, origin=str(args.config) if args.config else "<config>")
    except ConfigError as exc:
        print(f"diracloc: error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
