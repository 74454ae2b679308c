"""Operator entry point.

Subcommands: simulate one initial condition, run a seeded campaign, generate
a ground-truth grid, run the four-method label-efficiency benchmark, or serve
the HTTP campaign API. Exit codes: 0 success, 2 configuration error, 3
runtime (non-convergence) error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import evaluation as eval_mod
from .campaign import dump_event_log, estimate_raster, run_campaign
from .config import ConfigError, RunConfig, load_config_file, parse_config
from .domain import denormalize, make_grid_pool
from .dynamics import SimulatedOracle, find_attractors, simulate
from .errors import BasinLearnError, NonConvergenceError
from .evaluation import ground_truth, labels_to_f1_table, macro_f1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load_run_config(path: str | None) -> RunConfig:
    if path is None:
        return parse_config({})
    return load_config_file(path)


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def cmd_simulate(args) -> int:
    cfg = _load_run_config(args.config)
    attractors = find_attractors(cfg.system, cfg.domain)
    traj = simulate(
        np.array([args.x0, args.v0]), cfg.system, cfg.sim, cfg.domain, attractors
    )
    out = Path(args.out) if args.out else None
    if out:
        _write_csv(
            out, ["t", "x", "v"],
            ((repr(float(t)), repr(float(s[0])), repr(float(s[1])))
             for t, s in zip(traj.times, traj.states)),
        )
    print(f"label={traj.label} steps={len(traj.states) - 1} duration={traj.duration:.3f}s"
          + (f" trajectory={out}" if out else ""))
    return EXIT_OK


def cmd_campaign_run(args) -> int:
    cfg = _load_run_config(args.config)
    hal = cfg.hal
    if args.seed is not None:
        hal = replace(hal, seed=args.seed)
    if args.episodes is not None:
        hal = replace(hal, episodes=args.episodes)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    attractors = find_attractors(cfg.system, cfg.domain)
    oracle = SimulatedOracle(cfg.system, cfg.sim, cfg.domain, attractors)
    eval_grid = None
    if cfg.evaluate:
        grid = ground_truth(cfg.domain, hal.n_per_dim, cfg.system, cfg.sim)
        eval_grid = (grid.unit_states, grid.labels)
    state, metrics = run_campaign(hal, oracle, cfg.domain, eval_grid=eval_grid, f1_fn=macro_f1)

    (out_dir / "events.jsonl").write_text(dump_event_log(state.events))
    _write_csv(
        out_dir / "metrics.csv", ["queries", "labeled", "macro_f1"],
        ((m["queries"], m["labeled"], "" if m["macro_f1"] is None else repr(m["macro_f1"]))
         for m in metrics),
    )

    res = args.resolution
    raster = estimate_raster(state, res)
    units = make_grid_pool(cfg.domain, res).candidates
    phys = denormalize(units, cfg.domain)
    _write_csv(
        out_dir / "estimate.csv", ["x", "v", "decision", "label"],
        ((repr(float(p[0])), repr(float(p[1])), repr(d), l)
         for p, d, l in zip(phys, raster["decision"], raster["labels"])),
    )
    raster["suggestion"] = None
    (out_dir / "estimate.json").write_text(json.dumps(raster))
    print(f"queries={state.queries} labeled={len(state.labeled)} "
          f"episodes={state.episode} out={out_dir}")
    return EXIT_OK


def cmd_ground_truth(args) -> int:
    cfg = _load_run_config(args.config)
    grid = ground_truth(cfg.domain, args.resolution, cfg.system, cfg.sim)
    phys = denormalize(grid.unit_states, cfg.domain)
    _write_csv(
        Path(args.out), ["x", "v", "label"],
        ((repr(float(p[0])), repr(float(p[1])), int(l)) for p, l in zip(phys, grid.labels)),
    )
    counts = {int(k): int(v) for k, v in zip(*np.unique(grid.labels, return_counts=True))}
    print(f"resolution={args.resolution} nodes={len(grid.labels)} counts={counts} out={args.out}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    cfg = _load_run_config(args.config)
    methods = args.methods.split(",") if args.methods else list(eval_mod.BENCHMARK_METHODS)
    seeds = list(range(args.seeds))
    attractors = find_attractors(cfg.system, cfg.domain)
    grid = ground_truth(cfg.domain, cfg.hal.n_per_dim, cfg.system, cfg.sim)

    def oracle_factory():
        return SimulatedOracle(cfg.system, cfg.sim, cfg.domain, attractors)

    hal_kwargs = {
        "p": cfg.hal.p, "spacing": cfg.hal.spacing, "n_per_dim": cfg.hal.n_per_dim,
        "svm_c": cfg.hal.svm_c, "svm_gamma": cfg.hal.svm_gamma,
    }
    table = labels_to_f1_table(
        methods, seeds, cfg.domain, oracle_factory,
        grid.unit_states, grid.labels,
        cap=args.cap, uniform_k_max=args.uniform_k_max, hal_kwargs=hal_kwargs,
    )
    thresholds = eval_mod.F1_THRESHOLDS
    rows = []
    for method in methods:
        row = [method]
        for thr in thresholds:
            v = table[method][thr]
            row.append(f"> {args.cap}" if v is None else v)
        rows.append(row)
    _write_csv(Path(args.out), ["method"] + [f"f1_{t}" for t in thresholds], rows)
    for row in rows:
        print("  ".join(str(v) for v in row))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    _load_run_config(args.config)  # fail fast on a bad config file
    port = int(os.environ.get("BASINLEARN_PORT", args.port))
    data_dir = os.environ.get("BASINLEARN_DATA_DIR", args.data_dir)
    Path(data_dir).mkdir(parents=True, exist_ok=True)
    app = create_app(data_dir)
    uvicorn.run(app, host=args.host, port=port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="basinlearn")
    parser.add_argument("--config", help="JSON config file (defaults reproduce the reference setup)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one initial condition to its attractor")
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--v0", type=float, required=True)
    p.add_argument("--out", help="trajectory CSV path")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("campaign-run", help="run a seeded sampling campaign")
    p.add_argument("--seed", type=int)
    p.add_argument("--episodes", type=int)
    p.add_argument("--out", default="campaign_out")
    p.add_argument("--resolution", type=int, default=100, help="estimate raster resolution")
    p.set_defaults(fn=cmd_campaign_run)

    p = sub.add_parser("ground-truth", help="label a reference grid by simulation")
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--out", default="ground_truth.csv")
    p.set_defaults(fn=cmd_ground_truth)

    p = sub.add_parser("benchmark", help="label-efficiency comparison of sampling methods")
    p.add_argument("--methods", help="comma-separated subset of "
                   + ",".join(eval_mod.BENCHMARK_METHODS))
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--cap", type=int, default=eval_mod.DEFAULT_QUERY_CAP)
    p.add_argument("--uniform-k-max", type=int, default=eval_mod.DEFAULT_UNIFORM_K_MAX)
    p.add_argument("--out", default="benchmark.csv")
    p.set_defaults(fn=cmd_benchmark)

    p = sub.add_parser("serve", help="run the campaign HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8350)
    p.add_argument("--data-dir", default="campaign_data")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except BasinLearnError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
