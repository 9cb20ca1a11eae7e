"""Scenario runner and command-line entry point.

Subcommands:

    run <config|preset>      execute one scenario, write artifacts
    sweep <config|preset>    run a cross product of parameter overrides
    converge <config|preset> refinement study against the analytic oracle
    compare <snapA> <snapB>  diff two snapshot files

Artifacts land in the output directory: ``snapshot_<step>.csv`` profiles
with a ``snapshots.csv`` index, ``diagnostics.ndjson``, ``stability.json``,
``manifest.json`` (config echo plus resolved values; the only file with a
timestamp), ``error_series.csv`` for scenarios with an exact solution, and
SVG figures under ``plots/`` when plotting is enabled.

Exit codes: 0 success, 2 bad configuration, 3 step-size gate failure
without an override, 4 divergence (partial outputs are kept).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import datetime
import itertools
import json
import os
import sys

import numpy as np
import yaml

from . import __version__
from .config import ConfigError, RunConfig, load_config, scenario_presets
from .diagnostics import convergence_study
from .plot import line_plot_svg
from .scheme import IntegrationResult, integrate
from .stability import StabilityError

__all__ = ["main", "run", "read_snapshot"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GATE = 3
EXIT_DIVERGED = 4


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _write_snapshot(path: str, x: np.ndarray, theta: np.ndarray) -> None:
    n_modes = theta.shape[0]
    header = "x," + ",".join(f"theta{k + 1}" for k in range(n_modes))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for i in range(x.shape[0]):
            fh.write(",".join([_fmt(x[i])] + [_fmt(theta[k, i]) for k in range(n_modes)]) + "\n")


def read_snapshot(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Load a snapshot file back into (x, theta) arrays."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1:].T


def _write_artifacts(config: RunConfig, result: IntegrationResult, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    x = result.grid.x

    index_lines = ["step,t,file"]
    for snap in result.snapshots:
        name = f"snapshot_{snap.step:010d}.csv"
        _write_snapshot(os.path.join(out_dir, name), x, snap.state.theta)
        index_lines.append(f"{snap.step},{_fmt(snap.t)},{name}")
    with open(os.path.join(out_dir, "snapshots.csv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(index_lines) + "\n")

    with open(os.path.join(out_dir, "diagnostics.ndjson"), "w", encoding="utf-8") as fh:
        for step, sample in result.diagnostics:
            row = {"step": step}
            row.update(sample.to_dict())
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    if result.stability_report is not None:
        with open(os.path.join(out_dir, "stability.json"), "w", encoding="utf-8") as fh:
            json.dump(result.stability_report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    if result.error_series is not None:
        n_modes = result.final_state.n_modes
        lines = ["t," + ",".join(f"err_pct_mode{k + 1}" for k in range(n_modes))]
        for t, err in result.error_series:
            lines.append(",".join([_fmt(t)] + [_fmt(e) for e in err]))
        with open(os.path.join(out_dir, "error_series.csv"), "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    manifest = {
        "config": config.to_dict(),
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "version": __version__,
        "resolved": {
            "tau": result.tau,
            "n_points": result.grid.n_points,
            "steps_planned": result.steps_planned,
            "steps_completed": result.steps_completed,
            "initial_amplitude": result.initial_amplitude,
            "final_t": result.final_state.t,
            "max_percent_error": result.max_percent_error,
        },
        "status": "diverged" if result.diverged else "ok",
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if config.plot:
        _write_plots(config, result, out_dir)


def _write_plots(config: RunConfig, result: IntegrationResult, out_dir: str) -> None:
    from .analytic import hs_one_soliton
    from .config import analytic_oracle

    plots = os.path.join(out_dir, "plots")
    os.makedirs(plots, exist_ok=True)
    x = result.grid.x
    oracle = analytic_oracle(config)
    for snap in result.snapshots:
        curves = [
            (f"theta{k + 1}", snap.state.theta[k])
            for k in range(snap.state.n_modes)
        ]
        line_plot_svg(
            os.path.join(plots, f"profile_{snap.step:010d}.svg"),
            x, curves,
            title=f"t = {snap.t:.6g}",
            xlabel="x", ylabel="amplitude",
        )
        if oracle is not None:
            exact = np.stack(hs_one_soliton(x, snap.t, oracle))
            gaps = [
                (f"mode {k + 1}", np.abs(exact[k] - snap.state.theta[k]))
                for k in range(snap.state.n_modes)
            ]
            line_plot_svg(
                os.path.join(plots, f"error_{snap.step:010d}.svg"),
                x, gaps,
                title=f"|exact - numeric| at t = {snap.t:.6g}",
                xlabel="x", ylabel="absolute error",
            )
    if result.error_series:
        ts = [t for t, _ in result.error_series]
        n_modes = result.final_state.n_modes
        err_curves = [
            (f"mode {k + 1}", np.array([err[k] for _, err in result.error_series]))
            for k in range(n_modes)
        ]
        line_plot_svg(
            os.path.join(plots, "error_vs_t.svg"),
            np.array(ts), err_curves,
            title="percent error vs time", xlabel="t", ylabel="% error",
        )
    conserved = [
        (step, sample.conserved_hs)
        for step, sample in result.diagnostics
        if sample.conserved_hs is not None
    ]
    if conserved:
        ts = np.array([result.tau * step for step, _ in conserved])
        vals = np.array([v for _, v in conserved])
        line_plot_svg(
            os.path.join(plots, "conserved_vs_t.svg"),
            ts, [("conserved", vals)],
            title="conserved integral vs time", xlabel="t", ylabel="value",
        )


def run(config: RunConfig, out_dir: str | None = None) -> int:
    """Execute one scenario and write its artifacts; returns an exit code."""
    out = out_dir if out_dir is not None else config.out_dir
    try:
        result = integrate(config)
    except StabilityError as err:
        print(f"[ckdv] step-size gate: {err}", file=sys.stderr)
        return EXIT_GATE
    _write_artifacts(config, result, out)
    name = config.scenario or "scenario"
    if result.diverged:
        print(
            f"[ckdv] {name}: DIVERGED after {result.steps_completed} of "
            f"{result.steps_planned} steps; partial outputs in {out}"
        )
        return EXIT_DIVERGED
    summary = (
        f"[ckdv] {name}: {result.steps_completed} steps, tau={result.tau:.6g}, "
        f"t={result.final_state.t:.6g}"
    )
    if result.max_percent_error is not None:
        summary += f", max %error={result.max_percent_error:.4g}"
    print(summary + f" -> {out}")
    return EXIT_OK


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    changes = {}
    if getattr(args, "out", None):
        changes["out_dir"] = args.out
    if getattr(args, "alpha", None) is not None:
        changes["alpha"] = args.alpha
    if getattr(args, "force_unstable", False):
        changes["force_unstable"] = True
    if getattr(args, "tau", None) is not None:
        changes["tau"] = args.tau
    if getattr(args, "plot", False):
        changes["plot"] = True
    return config.replace(**changes) if changes else config


def _set_by_path(data: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        if key not in node or not isinstance(node[key], dict):
            raise ConfigError(f"unknown config section {key!r} in {dotted!r}")
        node = node[key]
    node[keys[-1]] = value


def _sweep_worker(args: tuple[dict, str]) -> int:
    data, out = args
    return run(RunConfig.from_dict(data), out_dir=out)


def _cmd_run(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    return run(config)


def _cmd_sweep(args) -> int:
    base = _apply_overrides(load_config(args.config), args)
    axes = []
    for entry in args.vary:
        key, _, raw = entry.partition("=")
        if not raw:
            raise ConfigError(f"--vary needs key=v1,v2,...; got {entry!r}")
        values = [yaml_scalar(v) for v in raw.split(",")]
        axes.append((key.strip(), values))
    jobs = []
    out_root = base.out_dir
    for combo in itertools.product(*[vals for _, vals in axes]):
        data = base.to_dict()
        tags = []
        for (key, _), value in zip(axes, combo):
            _set_by_path(data, key, value)
            tags.append(f"{key.split('.')[-1]}-{value}")
        sub = os.path.join(out_root, "_".join(tags))
        data["output"]["directory"] = sub
        RunConfig.from_dict(data)  # validate before spawning
        jobs.append((data, sub))
    workers = args.jobs if args.jobs else min(len(jobs), os.cpu_count() or 1)
    print(f"[ckdv] sweep: {len(jobs)} runs, {workers} workers")
    if workers <= 1:
        codes = [_sweep_worker(job) for job in jobs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            codes = list(pool.map(_sweep_worker, jobs))
    return max(codes) if codes else EXIT_OK


def yaml_scalar(text: str):
    """Parse one sweep value the way the config file would."""
    return yaml.safe_load(text)


def _cmd_converge(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    h_list = [float(v) for v in args.h_list.split(",")]
    rows = convergence_study(config, h_list, t0=args.t0)
    out = args.out or config.out_dir
    os.makedirs(out, exist_ok=True)
    lines = ["h,tau,error_pct,order_estimate,diverged"]
    print(f"[ckdv] {'h':>8} {'tau':>12} {'error %':>12} {'order':>8}")
    for row in rows:
        order = "" if row.order_estimate is None else _fmt(row.order_estimate)
        lines.append(
            f"{_fmt(row.h)},{_fmt(row.tau)},{_fmt(row.error)},{order},{row.diverged}"
        )
        shown = "diverged" if row.diverged else f"{row.error:12.6f}"
        order_shown = "" if row.order_estimate is None else f"{row.order_estimate:8.3f}"
        print(f"[ckdv] {row.h:8.4g} {row.tau:12.4e} {shown:>12} {order_shown:>8}")
    path = os.path.join(out, "convergence.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"[ckdv] table -> {path}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    xa, ta = read_snapshot(args.first)
    xb, tb = read_snapshot(args.second)
    if xa.shape != xb.shape or not np.allclose(xa, xb, rtol=0, atol=1e-12):
        print("[ckdv] snapshots live on different meshes", file=sys.stderr)
        return EXIT_CONFIG
    if ta.shape != tb.shape:
        print("[ckdv] snapshots have different mode counts", file=sys.stderr)
        return EXIT_CONFIG
    worst = 0.0
    for k in range(ta.shape[0]):
        gap = np.abs(ta[k] - tb[k])
        rms = float(np.sqrt((gap**2).mean()))
        print(f"[ckdv] mode {k + 1}: max |diff| = {gap.max():.6e}, rms = {rms:.6e}")
        worst = max(worst, float(gap.max()))
    return EXIT_OK if worst <= args.tol else 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ckdv",
        description="Coupled KdV solver: explicit two-step scheme with "
        "stability gating and diagnostics.",
    )
    parser.add_argument("--version", action="version", version=f"ckdv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="path to a YAML scenario or a preset name "
                        f"({', '.join(sorted(scenario_presets()))})")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--alpha", type=float, help="step-rule constant override")
    common.add_argument("--tau", type=float, help="explicit time step override")
    common.add_argument("--force-unstable", action="store_true",
                        help="run even when the step-size gate fails")
    common.add_argument("--plot", action="store_true", help="emit SVG figures")

    sub.add_parser("run", parents=[common], help="execute one scenario")

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="run a cross product of overrides concurrently")
    p_sweep.add_argument("--vary", action="append", required=True,
                         metavar="KEY=V1,V2,...",
                         help="dotted config key and values, e.g. ic.m=0.8,1.0")
    p_sweep.add_argument("--jobs", type=int, default=0,
                         help="worker processes (default: one per run, capped)")

    p_conv = sub.add_parser("converge", parents=[common],
                            help="refinement study against the exact solution")
    p_conv.add_argument("--h-list", required=True,
                        help="comma-separated spatial steps, finest last")
    p_conv.add_argument("--t0", type=float, default=None,
                        help="duration override for the study")

    p_cmp = sub.add_parser("compare", help="diff two snapshot files")
    p_cmp.add_argument("first")
    p_cmp.add_argument("second")
    p_cmp.add_argument("--tol", type=float, default=0.0,
                       help="max |diff| treated as equal (default 0)")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "converge":
            return _cmd_converge(args)
        if args.command == "compare":
            return _cmd_compare(args)
    except ConfigError as err:
        print(f"[ckdv] config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except StabilityError as err:
        print(f"[ckdv] step-size gate: {err}", file=sys.stderr)
        return EXIT_GATE
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
