"""Command-line entry point.

Subcommands:

* run     integrate a configured scenario and emit profile/energy CSVs
* mms     manufactured-solution convergence study
* verify  seeded property suites, exit 1 on any failure
* sweep   grid-refinement boundedness sweep

Exit codes: 0 ok, 1 verification failure, 2 configuration error,
3 diverged trajectory.  All CSV outputs start with a comment line echoing
the config hash, use '.' decimals and 17 significant digits, and are
byte-identical across reruns with the same config and seed.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import ConfigError, RunConfig, load_config, scenario_config
from .diagnostics import MONITORED, energy_record, refinement_sweep
from .grids import GridSpec
from .integrator import DivergedError, integrate
from .interpolation import manufactured_default, mms_convergence
from .model import AssumptionError, project_initial, unshifted_u1
from .verify import run_all


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _write_csv(path: str, header: list[str], rows, config_hash: str) -> None:
    lines = [f"# config {config_hash}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def _load(args) -> RunConfig:
    seed = args.seed if getattr(args, "seed", None) is not None else None
    if args.config is not None:
        return load_config(args.config, seed_override=seed)
    return scenario_config("fig1", seed=seed if seed is not None else 0)


def cmd_run(args) -> int:
    cfg = _load(args)
    os.makedirs(args.out, exist_ok=True)
    chash = cfg.config_hash()
    state0 = project_initial(cfg.initial, cfg.params, cfg.grid)
    traj = integrate(state0, cfg.params, cfg.grid, cfg.time)

    x = cfg.grid.x_nodes()
    rows = []
    for s in traj.snapshots:
        u1 = unshifted_u1(s, cfg.params)
        rows.extend((s.t, x[i], u1[i], s.u4[i]) for i in range(x.size))
    _write_csv(os.path.join(args.out, "macro_profiles.csv"),
               ["t", "x", "u1", "u4"], rows, chash)

    if cfg.micro_slice_x is not None:
        i_star = int(np.argmin(np.abs(x - cfg.micro_slice_x)))
        y = cfg.grid.y_nodes()
        rows = []
        for s in traj.snapshots:
            rows.extend((s.t, y[j], s.u2[i_star, j], s.u3[i_star, j])
                        for j in range(y.size))
        _write_csv(os.path.join(args.out, f"micro_slice_{cfg.micro_slice_x:g}.csv"),
                   ["t", "y", "u2", "u3"], rows, chash)

    energy_rows = []
    for s in traj.snapshots:
        rec = energy_record(cfg.grid, s)
        energy_rows.append((rec.t, rec.n1, rec.n2, rec.n3, rec.n4,
                            rec.g1, rec.g2, rec.g3))
    _write_csv(os.path.join(args.out, "energy.csv"),
               ["t", "n1", "n2", "n3", "n4", "g1", "g2", "g3"],
               energy_rows, chash)

    lines = [f"config {chash}", f"scenario {cfg.scenario}", ""]
    for section, entries in sorted(cfg.resolved.items()):
        for key, val in sorted(entries.items()):
            lines.append(f"{section}.{key} = {val}")
    stats = traj.stats
    lines += ["",
              f"steps_accepted {stats.accepted}",
              f"steps_rejected {stats.rejected}",
              f"rhs_evaluations {stats.rhs_evals}",
              f"last_dt {_fmt(stats.last_dt)}",
              f"snapshots {len(traj.snapshots)}"]
    with open(os.path.join(args.out, "summary.txt"), "w") as handle:
        handle.write("\n".join(lines) + "\n")
    print(f"run complete: {stats.accepted} steps, "
          f"{len(traj.snapshots)} snapshots")
    return 0


def cmd_mms(args) -> int:
    # the forced problem carries its own horizon; a config contributes only
    # the base grid resolution
    if args.levels < 2:
        raise ConfigError("mms needs --levels >= 2 to measure orders")
    t_end = 0.5
    if args.config is not None:
        cfg = load_config(args.config)
        base = GridSpec(1.0, 1.0, cfg.grid.n_x, cfg.grid.n_y)
        chash = cfg.config_hash()
    else:
        base = GridSpec(1.0, 1.0, 8, 8)
        chash = "builtin-mms"
    os.makedirs(args.out, exist_ok=True)
    table = mms_convergence(manufactured_default(base.length, base.cell_length),
                            base, args.levels, t_end)
    header = ["level", "N_x", "N_y",
              "e_u1", "e_u2", "e_u3", "e_u4",
              "p_u1", "p_u2", "p_u3", "p_u4"]
    rows = []
    for idx, row in enumerate(table.rows):
        orders = [table.orders[f][idx - 1] if idx > 0 else float("nan")
                  for f in ("u1", "u2", "u3", "u4")]
        rows.append((row.level, row.n_x, row.n_y,
                     row.e_u1, row.e_u2, row.e_u3, row.e_u4, *orders))
    _write_csv(os.path.join(args.out, "mms.csv"), header, rows, chash)
    for row in rows:
        print("level", row[0], "N", row[1],
              "errors", " ".join(_fmt(v) for v in row[3:7]))
    return 0


def cmd_verify(args) -> int:
    cfg = _load(args) if args.config is not None else None
    seed = args.seed if args.seed is not None else (cfg.seed if cfg else 0)
    results = run_all(seed, fig1_cfg=cfg)
    os.makedirs(args.out, exist_ok=True)
    rows = [(r.name, r.max_residual, r.threshold, int(r.passed))
            for r in results]
    _write_csv(os.path.join(args.out, "verify_report.csv"),
               ["suite", "max_residual", "threshold", "passed"],
               rows, cfg.config_hash() if cfg else f"seed-{seed}")
    failures = []
    for r in results:
        print(r.line())
        if not r.passed:
            failures.append(r.name)
    if failures:
        print("FAILED:", " ".join(failures))
        return 1
    print("all suites passed")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    os.makedirs(args.out, exist_ok=True)
    chash = cfg.config_hash()
    result = refinement_sweep(cfg.grid, cfg.params, cfg.initial, cfg.time,
                              levels=args.levels)
    rows = [(lvl.level, lvl.n_x, lvl.n_y,
             *(lvl.quantities[name] for name in MONITORED))
            for lvl in result.levels]
    _write_csv(os.path.join(args.out, "sweep.csv"),
               ["level", "N_x", "N_y", *MONITORED], rows, chash)
    ratio_rows = [(name, result.ratios[name], result.threshold,
                   int(result.ratios[name] <= result.threshold))
                  for name in MONITORED]
    _write_csv(os.path.join(args.out, "sweep_ratios.csv"),
               ["quantity", "max_growth_ratio", "threshold", "passed"],
               ratio_rows, chash)
    for name, ratio, thr, ok in ratio_rows:
        print(f"{name:22s} ratio={_fmt(ratio)} threshold={thr} "
              f"{'PASS' if ok else 'FAIL'}")
    return 0 if result.passed() else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrosim",
        description="Two-scale finite-difference sulfate corrosion simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, levels=False):
        p.add_argument("--config", help="path to an INI run configuration")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="seed overriding the config value")
        if levels:
            p.add_argument("--levels", type=int, default=3,
                           help="number of refinement levels")

    add_common(sub.add_parser("run", help="integrate a scenario"))
    add_common(sub.add_parser("mms", help="convergence-order study"), levels=True)
    add_common(sub.add_parser("verify", help="property suites"))
    add_common(sub.add_parser("sweep", help="boundedness refinement sweep"),
               levels=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "mms": cmd_mms,
                "verify": cmd_verify, "sweep": cmd_sweep}
    try:
        return handlers[args.command](args)
    except (ConfigError, AssumptionError, ValueError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except DivergedError as err:
        print(f"diverged: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
