"""Command-line front end.

    optosta simulate <config> [-o DIR]
    optosta cost <config> [-o DIR]        | optosta cost --preset fig4 [-o DIR]
    optosta sweep <spec> [-o DIR] [--jobs N]
    optosta validate [--list]
    optosta --preset fig1|fig2|fig3|fig4 <command> ...

Exit codes: 0 success, 1 validation failure, 2 config error, 3 divergence,
4 domain error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import output
from .errors import ConfigError, DivergenceError, DomainError, OptostaError
from .counterdiabatic import degeneracy_threshold, theta
from .metrics import FIG4_THETAS, cost_integral, cost_report, fig4_curve
from .model import build_dynamic_matrix
from .pulses import sample
from .scenarios import (
    FIG4_BANNER,
    apply_parameter,
    config_from_dict,
    load_config,
    load_sweep,
    preset_config,
    run,
)
from .validate import CHECKS, run_checks

log = logging.getLogger("optosta")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_DOMAIN = 0, 1, 2, 3, 4
FIG4_G0 = np.geomspace(0.1, 1000.0, 401)


def _obtain_config(args):
    if args.config is not None:
        return load_config(args.config), None
    if args.preset:
        return preset_config(args.preset)
    raise ConfigError("a config file or --preset is required")


def _cost_files(cfg, outdir: Path) -> dict:
    """Write costs.csv and cost_report.json; return the JSON payload."""
    schedule = cfg.schedule()
    report = cost_report(schedule, cfg.params, cfg.cd_convention)
    p = sample(schedule, report.times)
    th = theta(p, degeneracy_threshold(schedule))
    paper = report.instantaneous_paper
    rows = ((t, p.g1[k], p.g2[k], th[k], None if paper is None else paper[k],
             report.instantaneous_frobenius[k]) for k, t in enumerate(report.times))
    output.write_atomic(outdir / "costs.csv", output.csv_text(output.COST_COLUMNS, rows))
    payload = report.to_json()
    output.write_atomic(outdir / "cost_report.json", output.json_text(payload))
    return payload


def _eigen_file(cfg, traj, outdir: Path) -> None:
    p = traj.pulses
    mats = build_dynamic_matrix(cfg.params, p.g1, p.g2)
    vals = np.linalg.eigvals(mats)
    rows = []
    eps = cfg.generator().eps_g
    for k, t in enumerate(traj.times):
        ev = vals[k][np.lexsort((vals[k].imag, vals[k].real))]
        g0 = p.g0[k]
        if g0 > eps:
            dark = np.array([-p.g2[k] / g0, 0.0, p.g1[k] / g0])
            a = traj.states[k]
            pd = abs(np.vdot(dark, a)) ** 2
        else:
            pd = None
        rows.append((t, ev[0].real, ev[0].imag, ev[1].real, ev[1].imag,
                     ev[2].real, ev[2].imag, pd))
    output.write_atomic(outdir / "eigen.csv", output.csv_text(output.EIGEN_COLUMNS, rows))


def simulate(cfg, outdir: Path, banner: str | None = None) -> dict:
    """Run one scenario and write its files; returns the summary dict."""
    result = run(cfg)
    traj = result.trajectory
    outdir.mkdir(parents=True, exist_ok=True)
    resolved = result.config
    if "trajectory" in resolved.outputs:
        output.write_atomic(outdir / "trajectory.csv",
                            output.csv_text(output.TRAJECTORY_COLUMNS, output.trajectory_rows(traj)))
        output.write_atomic(outdir / "plot.gp",
                            output.population_plot_script("trajectory.csv", resolved.protocol))
    if "eigen" in resolved.outputs:
        _eigen_file(resolved, traj, outdir)
    final = traj.populations[-1]
    summary = {
        "config": resolved.to_json(),
        "interpretation": banner,
        "final_populations": {"a1": final[0], "b": final[1], "a2": final[2]},
        "fidelity": result.fidelity,
        "convergence_estimate": result.estimate,
        "converged": result.converged,
        "max_mechanical_population": float(np.max(traj.populations[:, 1])),
    }
    if "cost" in resolved.outputs:
        cost = _cost_files(resolved, outdir)
        summary["cost"] = {k: cost[k] for k in ("C_frobenius", "C_spectral", "discrepancy_flag")}
    output.write_atomic(outdir / "summary.json", output.json_text(summary))
    return summary


def cmd_simulate(args) -> int:
    cfg, banner = _obtain_config(args)
    if banner:
        print(banner)
    summary = simulate(cfg, Path(args.output), banner)
    if not summary["converged"]:
        log.warning("step-halving did not reach the 1e-9 target (estimate %.3g)",
                    summary["convergence_estimate"])
    print(f"fidelity |a2|^2 = {summary['fidelity']:.10f}  "
          f"(convergence estimate {summary['convergence_estimate']:.2e})")
    return EXIT_OK


def fig4(outdir: Path) -> dict:
    outdir.mkdir(parents=True, exist_ok=True)
    files = []
    curves = {}
    for th in FIG4_THETAS:
        label = f"{th / math.pi:.1f}pi"
        name = f"fig4_theta_{label.replace('.', 'p')}.csv"
        c = fig4_curve(FIG4_G0, th)
        rows = ((g, th, v) for g, v in zip(FIG4_G0, c))
        output.write_atomic(outdir / name, output.csv_text(output.FIG4_COLUMNS, rows))
        files.append((name, f"theta = {label}"))
        curves[label] = {"file": name, "min": float(c.min()), "max": float(c.max())}
    output.write_atomic(outdir / "fig4.gp", output.fig4_plot_script(files))
    summary = {"interpretation": FIG4_BANNER, "kappa_ratio": 0.01, "curves": curves,
               "adiabatic_limit": math.sqrt(2 - 3e-4 / 4)}
    output.write_atomic(outdir / "fig4_summary.json", output.json_text(summary))
    return summary


def cmd_cost(args) -> int:
    outdir = Path(args.output)
    if args.config is None and args.preset == "fig4":
        print(FIG4_BANNER)
        fig4(outdir)
        return EXIT_OK
    cfg, banner = _obtain_config(args)
    if banner:
        print(banner)
    outdir.mkdir(parents=True, exist_ok=True)
    payload = _cost_files(cfg, outdir)
    print(f"C_frobenius = {payload['C_frobenius']:.12g}  C_spectral = {payload['C_spectral']}  "
          f"discrepancy = {payload['discrepancy_flag']}")
    return EXIT_OK


def _sweep_point(job):
    index, parameter, value, base_json, outdir = job
    row = {"index": index, "parameter": parameter, "value": value, "status": "ok", "error": ""}
    try:
        cfg = apply_parameter(config_from_dict(base_json), parameter, value)
        point_dir = Path(outdir) / "points" / f"point_{index:04d}"
        cfg.outputs = [o for o in cfg.outputs if o != "cost"]
        summary = simulate(cfg, point_dir)
        fp = summary["final_populations"]
        row.update(p_a1=fp["a1"], p_b=fp["b"], p_a2=fp["a2"], fidelity=summary["fidelity"],
                   convergence_estimate=summary["convergence_estimate"])
        sched = cfg.schedule()
        conv = cfg.cd_convention
        row["C_frobenius"] = cost_integral(sched, cfg.params, "frobenius", conv)
        try:
            row["C_spectral"] = cost_integral(sched, cfg.params, "paper", conv)
        except OptostaError as exc:
            row["C_spectral"] = None
            row["error"] = f"spectral cost: {exc}"
    except Exception as exc:  # one bad point must not sink the sweep
        row["status"] = "failed"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


SWEEP_COLUMNS = ("index", "parameter", "value", "status", "p_a1", "p_b", "p_a2", "fidelity",
                 "C_frobenius", "C_spectral", "convergence_estimate", "error")


def sweep(spec, outdir: Path, jobs: int = 1) -> list:
    outdir.mkdir(parents=True, exist_ok=True)
    work = [(i, spec.parameter, v, spec.base.to_json(), str(outdir)) for i, v in enumerate(spec.grid)]
    if jobs <= 1 or len(work) == 1:
        rows = [_sweep_point(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, work))
    lines = [",".join(SWEEP_COLUMNS)]
    for r in rows:
        cells = []
        for c in SWEEP_COLUMNS:
            v = r.get(c)
            if c == "index":
                cells.append(str(v))
            elif isinstance(v, str):
                cells.append('"' + v.replace('"', '""') + '"' if ("," in v or '"' in v) else v)
            else:
                cells.append(output.fmt(v))
        lines.append(",".join(cells))
    output.write_atomic(outdir / "summary.csv", "\n".join(lines) + "\n")
    return rows


def cmd_sweep(args) -> int:
    spec = load_sweep(args.spec)
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    rows = sweep(spec, Path(args.output), jobs)
    failed = sum(r["status"] != "ok" for r in rows)
    if failed:
        log.warning("%d of %d sweep points failed; see summary.csv", failed, len(rows))
    print(f"{len(rows)} points, {failed} failed")
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.list:
        for c in CHECKS:
            print(f"{c.name:24s} {c.description}")
        return EXIT_OK
    results = run_checks(debug_coarse_dt=args.debug_coarse_dt)
    width = max(len(n) for n, _, _ in results)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name:{width}s}  {detail}")
    failed = sum(not ok for _, ok, _ in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    presets = ["fig1", "fig2", "fig3", "fig4"]
    parser = argparse.ArgumentParser(prog="optosta", description=__doc__.split("\n\n")[0])
    parser.add_argument("--preset", choices=presets, help="use a figure preset instead of a config")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one scenario")
    p.add_argument("config", nargs="?")
    p.add_argument("--preset", dest="sub_preset", choices=presets[:3])
    p.add_argument("-o", "--output", default="out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("cost", help="energetic cost of a scenario, or the fig4 curves")
    p.add_argument("config", nargs="?")
    p.add_argument("--preset", dest="sub_preset", choices=presets)
    p.add_argument("-o", "--output", default="out")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("sweep", help="run a scenario over a parameter grid")
    p.add_argument("spec")
    p.add_argument("-o", "--output", default="out")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="run the property checks")
    p.add_argument("--list", action="store_true", help="list checks without running them")
    p.add_argument("--debug-coarse-dt", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "sub_preset", None):
        args.preset = args.sub_preset
    try:
        return args.func(args)
    except ConfigError as exc:
        where = []
        if exc.field:
            where.append(f"field {exc.field}")
        if exc.line:
            where.append(f"line {exc.line}")
        suffix = f" ({', '.join(where)})" if where else ""
        print(f"config error: {exc}{suffix}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"divergence: {exc} (last good t = {exc.last_good_time})", file=sys.stderr)
        return EXIT_DIVERGENCE
    except DomainError as exc:
        print(f"domain error: {exc}; parameters {exc.parameters}", file=sys.stderr)
        return EXIT_DOMAIN
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
