"""Command line: ``recloop {simulate,sweep,movielens,verify,plot}``.

Exit codes: 0 success, 1 a run failed, 2 bad configuration.
Relative output paths are placed under ``$RECLOOP_OUTPUT_DIR`` when set.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .dynamics import WorldConfig, Simulation
from .recommender import score_vector
from .sweep import PRESETS, SweepSpec, format_csv, run_sweep

OUTPUT_ENV = "RECLOOP_OUTPUT_DIR"

# flag name -> WorldConfig field
CONFIG_FLAGS = {
    "N": "n_users", "M": "n_items", "G": "n_genres", "k": "k", "phi": "phi", "f1": "f1",
    "T": "updates_per_user", "burn_in": "burn_in", "mode": "mode", "similarity": "similarity",
    "bias": "bias", "bias_scope": "bias_scope", "seed": "master_seed", "instance": "instance_index",
    "init": "init", "probe_repetitions": "probe_repetitions", "ratings": "ratings_path",
}
GRID_FLAGS = {"phi_grid": "phi", "G_grid": "n_genres", "k_grid": "k", "f1_grid": "f1",
              "b_grid": "bias", "similarity_grid": "similarity"}


class ConfigError(Exception):
    pass


def _out_path(path):
    if path is None:
        return None
    base = os.environ.get(OUTPUT_ENV)
    return os.path.join(base, path) if base and not os.path.isabs(path) else path


def _parse_list(text, cast):
    """``"0.1,0.2"`` or ``"start:stop:step"`` (inclusive)."""
    if ":" in text:
        a, b, step = (float(x) for x in text.split(":"))
        n = int(round((b - a) / step))
        return [cast(round(a + i * step, 10)) for i in range(n + 1)]
    return [cast(x) for x in text.split(",") if x]


def _add_config_flags(p):
    p.add_argument("--config", help="JSON file with config fields (and optionally grid/instances)")
    p.add_argument("--preset", choices=sorted(PRESETS), help="desk or paper scale")
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--G", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--phi", type=float)
    p.add_argument("--f1", type=float)
    p.add_argument("--T", type=int, help="updates per user")
    p.add_argument("--burn-in", dest="burn_in", type=float)
    p.add_argument("--mode", choices=["single_taste", "two_taste", "replay"])
    p.add_argument("--similarity", choices=["cn", "cosine"])
    p.add_argument("--bias", type=float)
    p.add_argument("--bias-scope", dest="bias_scope", choices=["score", "everywhere"])
    p.add_argument("--seed", type=int)
    p.add_argument("--instance", type=int)
    p.add_argument("--init", choices=["uniform", "taste_matched"])
    p.add_argument("--probe-repetitions", dest="probe_repetitions", type=int)
    p.add_argument("--probe-reuse-similarity", action="store_true", default=None)
    p.add_argument("--exclude-ineligible-edges", action="store_true", default=None)
    p.add_argument("--ratings", help="MovieLens u.data file")


def _add_grid_flags(p):
    p.add_argument("--phi-grid", help="e.g. 0:1:0.05 or 0.1,0.5")
    p.add_argument("--G-grid")
    p.add_argument("--k-grid")
    p.add_argument("--f1-grid")
    p.add_argument("--b-grid")
    p.add_argument("--similarity-grid")
    p.add_argument("--instances", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", help="CSV path")


def _load(args):
    """Resolve preset < config file < flags into (config dict, extras from the file)."""
    values, extras = {}, {}
    preset = args.preset
    file_cfg = {}
    if args.config:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        preset = preset or file_cfg.pop("preset", None)
        for key in ("grid", "instances", "workers", "output"):
            if key in file_cfg:
                extras[key] = file_cfg.pop(key)
    if preset:
        values.update(PRESETS[preset]["config"])
        extras.setdefault("instances", PRESETS[preset]["instances"])
    values.update(file_cfg)
    for flag, fld in CONFIG_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[fld] = v
    for flag in ("probe_reuse_similarity", "exclude_ineligible_edges"):
        if getattr(args, flag, None):
            values[flag] = True
    return values, extras


def _config(values) -> WorldConfig:
    try:
        return WorldConfig.from_dict(values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_simulate(args):
    values, _ = _load(args)
    cfg = _config(values)
    sim = Simulation(cfg)
    trace_rows = []
    if args.dump_scores is not None and args.dump_at is not None:
        sim.advance(args.dump_at)
        _dump_scores(sim, args.dump_scores, _out_path(args.dump_scores_file))
    tr = sim.advance(trace=bool(args.trace))
    if args.dump_scores is not None and args.dump_at is None:
        _dump_scores(sim, args.dump_scores, _out_path(args.dump_scores_file))
    if args.trace:
        genre = sim.item_genre
        mask_cache = {}
        for s, u, ch, a, st in zip(tr.step, tr.user, tr.channel, tr.item, tr.status):
            if u not in mask_cache:
                mask_cache[u] = sim.targets.correct_mask(u)
            g = int(genre[a]) if genre is not None and a >= 0 else -1
            match = int(bool(mask_cache[u][a])) if a >= 0 else 0
            trace_rows.append([int(s), int(u), "selection" if ch == 0 else "recommendation",
                               int(a), g, match])
        with open(_out_path(args.trace), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "user", "channel", "item", "genre", "match"])
            w.writerows(trace_rows)
    report = sim.report()
    if args.snapshot:
        sim.state.write_snapshot(_out_path(args.snapshot))
    row = report.row()
    row["error"] = ""
    if cfg.mode == "replay":
        row["G"] = row["k"] = ""
    text = format_csv([row], {"config": cfg.as_dict()})
    if args.output:
        with open(_out_path(args.output), "w", newline="") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def _dump_scores(sim, user, path):
    scores = score_vector(sim.state, user, sim.config.recommender)
    held = sim.state.held[user]
    out = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["step", "user", "item", "held", "score"])
        for a, s in enumerate(scores):
            w.writerow([sim.steps_done, user, a, int(held[a]), repr(float(s))])
    finally:
        if path:
            out.close()


def _sweep_spec(args, force_mode=None):
    values, extras = _load(args)
    if force_mode:
        values["mode"] = force_mode
    base = _config(values)
    grid = {k: list(v) for k, v in extras.get("grid", {}).items()}
    casts = {"phi": float, "n_genres": int, "k": int, "f1": float, "bias": float, "similarity": str}
    for flag, key in GRID_FLAGS.items():
        text = getattr(args, flag, None)
        if text:
            grid[key] = _parse_list(text, casts[key])
    instances = args.instances or extras.get("instances", 1)
    output = _out_path(args.output or extras.get("output")
                       or ("movielens.csv" if force_mode else "sweep.csv"))
    try:
        return SweepSpec(base, grid, instances, output, args.workers or extras.get("workers", 1))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_sweep(args, force_mode=None):
    spec = _sweep_spec(args, force_mode)
    result = run_sweep(spec)
    n_fail = sum(1 for r in result.rows if r["error"])
    print(f"wrote {spec.output}: {len(spec.runs())} runs, {n_fail} failed")
    return 1 if n_fail else 0


def cmd_movielens(args):
    if not args.ratings:
        raise ConfigError("--ratings is required")
    return cmd_sweep(args, force_mode="replay")


def cmd_verify(args):
    from .verify import run_checks

    results = run_checks(seed=args.seed or 0)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


def cmd_plot(args):
    from .plotting import render_plots

    out = _out_path(args.output or os.path.splitext(os.path.basename(args.csv))[0] + f"_{args.kind}.svg")
    try:
        render_plots(args.csv, args.kind, out, by=args.by)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(f"wrote {out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="recloop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one run")
    _add_config_flags(p)
    p.add_argument("--output", help="CSV path for the report row")
    p.add_argument("--trace", help="per-event trace CSV (small runs only)")
    p.add_argument("--snapshot", help="final edge list CSV")
    p.add_argument("--dump-scores", dest="dump_scores", type=int, metavar="USER",
                   help="dump the score vector of USER")
    p.add_argument("--dump-at", dest="dump_at", type=int, metavar="STEP",
                   help="dump after STEP events (default: at the end)")
    p.add_argument("--dump-scores-file", dest="dump_scores_file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="grid of runs")
    _add_config_flags(p)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("movielens", help="replay sweep on a ratings file")
    _add_config_flags(p)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_movielens)

    p = sub.add_parser("verify", help="oracle and property checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="SVG from a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--kind", required=True, choices=["omega-phi", "auc-phi", "omega1-f1"])
    p.add_argument("--by", help="column to draw one line per value of")
    p.add_argument("--output")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
