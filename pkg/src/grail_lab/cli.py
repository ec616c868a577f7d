"""grail-lab command line.

Exit codes: 0 success, 1 runtime / I/O failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Optional, Sequence

from .config import PRESETS, ExperimentConfig, load_config, preset, with_overrides
from .env import ConfigError, goal_name
from .experiment import replicate, run_experiment
from .results import SchemaError, read_summary, write_aggregate, write_run
from .selectors import SELECTOR_KINDS
from .skills import BACKEND_KINDS

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

PRESET_NOTES = {
    "exp1": "context gate: a,c,e need the feature on, b,d,f off; reset every trial; 4000 trials",
    "exp2": "goal chain c -> f -> a; reset every epoch of 4 trials; 1500 epochs",
}


class UsageError(Exception):
    pass


def _add_config_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS, help="built-in experiment")
    src.add_argument("--config", help="experiment JSON file")
    p.add_argument("--selector", choices=SELECTOR_KINDS)
    p.add_argument("--backend", choices=BACKEND_KINDS)
    p.add_argument("--eval-interval", type=int, dest="eval_interval")
    p.add_argument("--out", help="output directory (default: $GRAIL_LAB_OUT/<name> or results/<name>)")
    p.add_argument("--plot", action="store_true", help="also render PNG performance figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grail-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    _add_config_args(run)
    run.add_argument("--seed", type=int)

    rep = sub.add_parser("replicate", help="run several seeds and aggregate")
    _add_config_args(rep)
    rep.add_argument("--seed", type=int, help="first seed when --seeds is a count")
    rep.add_argument("--seeds", required=True, help="a count N, or a comma-separated seed list")
    rep.add_argument("--jobs", type=int, default=1)

    pre = sub.add_parser("presets", help="list built-in presets")
    pre.add_argument("--show", choices=PRESETS, help="print the resolved JSON of one preset")

    summ = sub.add_parser("summarize", help="summarize a run or aggregate directory")
    summ.add_argument("path")
    summ.add_argument("--format", choices=("table", "csv"), default="table")
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = preset(args.preset) if args.preset else load_config(args.config)
    return with_overrides(
        cfg,
        selector=args.selector,
        backend=args.backend,
        seed=getattr(args, "seed", None) if args.command == "run" else None,
        eval_interval=args.eval_interval,
    )


def default_out(cfg: ExperimentConfig, suffix: str) -> str:
    root = os.environ.get("GRAIL_LAB_OUT", "results")
    name = cfg.preset or "custom"
    return os.path.join(root, f"{name}-{cfg.selector_kind}-{suffix}")


def parse_seeds(text: str, first: int) -> list[int]:
    try:
        if "," in text:
            seeds = [int(s) for s in text.split(",") if s.strip()]
        else:
            n = int(text)
            if n < 1:
                raise UsageError("--seeds must be >= 1")
            seeds = list(range(first, first + n))
    except ValueError:
        raise UsageError(f"--seeds: expected a count or a comma-separated list, got {text!r}") from None
    if not seeds or len(set(seeds)) != len(seeds) or min(seeds) < 0:
        raise UsageError("--seeds: need distinct non-negative seeds")
    return seeds


def _fmt(value) -> str:
    if value is None:
        return "-"
    return f"{value:g}" if isinstance(value, float) else str(value)


def print_criterion_table(per_goal, all_goals, final, tpe: int, out=None) -> None:
    out = out or sys.stdout
    epoch_col = tpe > 1
    head = f"{'goal':<6}{'trials_to_criterion':>21}"
    head += f"{'epochs':>9}" if epoch_col else ""
    head += f"{'final_success':>15}"
    print(head, file=out)
    rows = [(goal_name(g), t, f) for g, (t, f) in enumerate(zip(per_goal, final))]
    rows.append(("all", all_goals, min(final) if final else None))
    for name, t, f in rows:
        line = f"{name:<6}{_fmt(t):>21}"
        if epoch_col:
            line += f"{_fmt(None if t is None else -(-t // tpe)):>9}"
        line += f"{_fmt(f):>15}"
        print(line, file=out)


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    out = args.out or default_out(cfg, f"seed{cfg.seed}")
    result = run_experiment(cfg)
    write_run(result, out, plot=args.plot)
    print(f"wrote {out}")
    print_criterion_table(
        result.trials_to_criterion, result.all_goals_criterion,
        list(result.evals[-1].success), cfg.world.trials_per_epoch,
    )
    return EXIT_OK


def cmd_replicate(args) -> int:
    cfg = resolve_config(args)
    first = args.seed if args.seed is not None else cfg.seed
    seeds = parse_seeds(args.seeds, first)
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    out = args.out or default_out(cfg, f"{len(seeds)}seeds")
    agg = replicate(cfg, seeds, jobs=args.jobs, out_dir=out, plot=args.plot)
    write_aggregate(agg, out, plot=args.plot)
    summary = read_summary(out)
    print(f"wrote {out} ({len(seeds)} seeds)")
    print_criterion_table(
        summary.trials_to_criterion, summary.all_goals, summary.final_success,
        cfg.world.trials_per_epoch,
    )
    return EXIT_OK


def cmd_presets(args) -> int:
    if args.show:
        sys.stdout.write(preset(args.show).to_json())
        return EXIT_OK
    for name in PRESETS:
        print(f"{name:<6}{PRESET_NOTES[name]}")
    return EXIT_OK


def _trials_per_epoch(path: str) -> int:
    try:
        with open(os.path.join(path, "config.resolved.json")) as fh:
            return int(json.load(fh)["world"]["trials_per_epoch"])
    except (OSError, ValueError, KeyError, TypeError):
        return 1


def cmd_summarize(args) -> int:
    if not os.path.isdir(args.path):
        raise SchemaError(f"{args.path}: not a directory")
    summary = read_summary(args.path)
    if args.format == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["goal", "trials_to_criterion", "final_success"])
        for g, (t, f) in enumerate(zip(summary.trials_to_criterion, summary.final_success)):
            w.writerow([g, "" if t is None else _fmt(t), repr(f)])
        w.writerow(["all", "" if summary.all_goals is None else _fmt(summary.all_goals),
                    repr(min(summary.final_success))])
        return EXIT_OK
    label = "run" if summary.kind == "run" else f"aggregate of {summary.n_seeds} seeds (medians)"
    print(f"{args.path}: {label}")
    print_criterion_table(
        summary.trials_to_criterion, summary.all_goals, summary.final_success,
        _trials_per_epoch(args.path),
    )
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "replicate": cmd_replicate,
    "presets": cmd_presets,
    "summarize": cmd_summarize,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, SchemaError, UsageError) as exc:
        print(f"grail-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"grail-lab: I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
