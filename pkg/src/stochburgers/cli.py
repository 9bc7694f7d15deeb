"""Command-line entry point: ``simulate``, ``verify`` and ``analyze``.

Exit status: 0 success, 1 a verification check failed, 2 configuration or
input error, 3 every trajectory blew up, 4 statistics inconclusive.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from . import persistence as io
from .analytic import first_near_zero
from .config import RunConfig, load_config, parse_grid
from .linear import EnsembleRun
from .spectral import ConfigurationError
from .verification import SUITES, run_ensemble, run_suite

logger = logging.getLogger("stochburgers")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BLOWUP, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4

DIAGNOSTICS = ("mean_energy", "norm_squared", "energy_difference", "correlation",
               "lengthscale", "power_law")


def _window(text: str | None):
    if text is None:
        return None
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError as err:
        raise ConfigurationError(f"window must be 'a,b', got {text!r}") from err
    if not 0 < lo < hi:
        raise ConfigurationError("window must satisfy 0 < a < b")
    return lo, hi


def _statistic(cfg: RunConfig, run: EnsembleRun, name: str, out: Path, *, r_grid=None,
               window=None, threshold=None) -> Path | None:
    """Compute one diagnostic and write its CSV into ``out``."""
    if name == "mean_energy":
        res = dg.ensemble_mean_energy(run)
        return io.write_csv(out / "mean_energy.csv", io.MEAN_ENERGY_COLUMNS, io.mean_energy_rows(res))
    if name == "norm_squared":
        res = dg.ensemble_norm_squared(run)
        return io.write_csv(out / "norm_squared.csv", io.MEAN_ENERGY_COLUMNS, io.mean_energy_rows(res))
    if name == "energy_difference":
        res = dg.energy_difference(run)
        return io.write_csv(out / "energy_difference.csv", io.MEAN_ENERGY_COLUMNS,
                            io.mean_energy_rows(res))
    if name in ("correlation", "lengthscale"):
        r = cfg.r_grid() if r_grid is None else r_grid
        if r is None:
            raise ConfigurationError(f"{name} needs an r grid (config diagnostics.r_grid or --r-grid)")
        table = dg.ensemble_correlation(run, r)
        if name == "correlation":
            return io.write_csv(out / "correlation.csv", io.CORRELATION_COLUMNS,
                                io.correlation_rows(table))
        thr = cfg.diagnostics.threshold if threshold is None else threshold
        rows = []
        for i, t in enumerate(table.times):
            if not table.averaged[i, 0] > 0:
                continue
            r_star = first_near_zero(r, table.normalized[i], thr)
            rows.append((t, np.nan if r_star is None else r_star))
        return io.write_csv(out / "lengthscale.csv", ("t", "r_star"), rows)
    if name == "power_law":
        win = cfg.diagnostics.fit_window if window is None else window
        res = dg.ensemble_mean_energy(run)
        fit = dg.fit_power_law(res, win)
        return io.write_csv(out / "fits.csv", io.FIT_COLUMNS, io.fit_rows([fit]))
    raise ConfigurationError(f"unknown diagnostic {name!r}; choose from {DIAGNOSTICS}")


def _run_arrays(run: EnsembleRun) -> dict:
    arrays = {"times": run.times, "coeffs": run.coeffs}
    if run.companion is not None:
        arrays["companion"] = run.companion
    return arrays


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run = run_ensemble(cfg, threads=args.threads)
    files = [io.save_trajectories(out / "trajectories.npz", **_run_arrays(run))]
    resolved = cfg.model_dump(mode="json")
    extra = {"truncation_modes": cfg.discretization.modes}
    if len(run.blowups) == run.n_trajectories:
        io.write_manifest(out, resolved, files, run.blowups, extra | {"status": "all_blew_up"})
        print(f"error: all {run.n_trajectories} trajectories blew up; see {out / 'manifest.yaml'}",
              file=sys.stderr)
        return EXIT_BLOWUP
    names = ["mean_energy", "norm_squared"]
    if run.companion is not None:
        names.append("energy_difference")
    if cfg.r_grid() is not None:
        names.append("correlation")
    if cfg.diagnostics.fit_window is not None:
        names.append("power_law")
    for name in names:
        try:
            files.append(_statistic(cfg, run, name, out))
        except ArithmeticError as err:
            logger.warning("skipping %s: %s", name, err)
    io.write_manifest(out, resolved, files, run.blowups, extra | {"status": "ok"})
    for f in files:
        print(f)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    report = run_suite(args.suite, cfg, threads=args.threads)
    doc = report.to_dict()
    text = json.dumps(doc, indent=2)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"verify_{args.suite}.json").write_text(text + "\n")
    print(text)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {args.suite}.{c.name}: "
              f"measured {c.measured:.6g}, tolerance {c.tolerance:.6g}", file=sys.stderr)
    if report.inconclusive:
        print("inconclusive: differences are within Monte Carlo noise; increase M "
              "(ensemble.trajectories)", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_analyze(args) -> int:
    src = Path(args.input)
    if not (src / "manifest.yaml").is_file() or not (src / "trajectories.npz").is_file():
        print(f"error: {src} has no manifest.yaml and trajectories.npz from simulate",
              file=sys.stderr)
        return EXIT_CONFIG
    cfg = load_config(io.read_manifest(src))
    data = io.load_trajectories(src / "trajectories.npz")
    if data["coeffs"].size == 0:
        print("error: the archive holds no trajectories", file=sys.stderr)
        return EXIT_CONFIG
    run = EnsembleRun(cfg.build_basis(), data["times"], data["coeffs"], cfg.ensemble.master_seed,
                      cfg.ensemble.antithetic, data.get("companion"))
    out = src / "analysis"
    out.mkdir(exist_ok=True)
    r = None if args.r_grid is None else parse_grid(args.r_grid)
    path = _statistic(cfg, run, args.diagnostic, out, r_grid=r, window=_window(args.window),
                      threshold=args.threshold)
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stochburgers",
                                description="Stochastic Burgers ensembles and their diagnostics.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the ensemble a config describes")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=sorted(SUITES))
    v.add_argument("--config", required=True)
    v.add_argument("--out")
    v.add_argument("--threads", type=int, default=1)
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("analyze", help="recompute a diagnostic from a simulate directory")
    a.add_argument("--in", dest="input", required=True)
    a.add_argument("--diagnostic", required=True, choices=DIAGNOSTICS)
    a.add_argument("--r-grid", help="'lin:a:b:n', 'geom:a:b:n' or comma-separated values")
    a.add_argument("--window", help="fit window 'a,b'")
    a.add_argument("--threshold", type=float, help="near-zero threshold for lengthscale")
    a.set_defaults(func=cmd_analyze)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "r_grid", None) and "," in args.r_grid and ":" not in args.r_grid:
        args.r_grid = [float(v) for v in args.r_grid.split(",")]
    try:
        return args.func(args)
    except ConfigurationError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
