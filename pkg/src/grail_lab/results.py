"""CSV outputs for single runs and replicated aggregates.

Run directory::

    trials.csv        trial,epoch,key_before,goal,reached,achieved,reward,key_after
    evals.csv         trial,goal_0,...,goal_{N-1}
    values.csv        kind,key,goal,value           (final selector table)
    values_history.csv trial,kind,key,goal,value    (only with values_interval > 0)
    tracker.csv       key,goal,c_fast,c_slow
    summary.csv       goal,trials_to_criterion       (last row: goal "all")
    config.resolved.json

Aggregate directory (``replicate``)::

    aggregate.csv     trial,goal_0_median,goal_0_q25,goal_0_q75,...
    criterion.csv     seed,goal_0,...,goal_{N-1},all
    seed_<s>/         one run directory per seed

Floats are written with ``repr`` so files round-trip exactly; a criterion that
was never reached is an empty cell.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .experiment import Aggregate, RunResult

TRIALS_HEADER = ["trial", "epoch", "key_before", "goal", "reached", "achieved", "reward", "key_after"]
SUMMARY_HEADER = ["goal", "trials_to_criterion"]


class SchemaError(ValueError):
    """A results file is missing or does not carry the documented header."""


def evals_header(n_goals: int) -> list[str]:
    return ["trial"] + [f"goal_{g}" for g in range(n_goals)]


def aggregate_header(n_goals: int) -> list[str]:
    cols = ["trial"]
    for g in range(n_goals):
        cols += [f"goal_{g}_median", f"goal_{g}_q25", f"goal_{g}_q75"]
    return cols


def criterion_header(n_goals: int) -> list[str]:
    return ["seed"] + [f"goal_{g}" for g in range(n_goals)] + ["all"]


def _cell(value: Optional[int]) -> str:
    return "" if value is None else str(value)


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_run(result: RunResult, out_dir: str, plot: bool = False) -> None:
    os.makedirs(out_dir, exist_ok=True)
    n = result.config.n_goals
    with open(os.path.join(out_dir, "trials.csv"), "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(TRIALS_HEADER)
        for t in result.trials:
            w.writerow([
                t.trial, t.epoch, t.key_before, t.goal, int(t.reached), int(t.achieved),
                repr(t.reward), t.key_after,
            ])
    with open(os.path.join(out_dir, "evals.csv"), "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(evals_header(n))
        for e in result.evals:
            w.writerow([e.trial] + [repr(v) for v in e.success])
    with open(os.path.join(out_dir, "values.csv"), "w", newline="") as fh:
        result.selector.dump_csv(fh)
    if result.value_snapshots:
        with open(os.path.join(out_dir, "values_history.csv"), "w", newline="") as fh:
            w = _writer(fh)
            w.writerow(["trial", "kind", "key", "goal", "value"])
            for trial, rows in result.value_snapshots:
                for kind, key, goal, value in rows:
                    w.writerow([trial, kind, key, goal, repr(value)])
    with open(os.path.join(out_dir, "tracker.csv"), "w", newline="") as fh:
        result.tracker.dump_csv(fh)
    with open(os.path.join(out_dir, "summary.csv"), "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(SUMMARY_HEADER)
        for g, t in enumerate(result.trials_to_criterion):
            w.writerow([g, _cell(t)])
        w.writerow(["all", _cell(result.all_goals_criterion)])
    with open(os.path.join(out_dir, "config.resolved.json"), "w") as fh:
        fh.write(result.config.to_json())
    if plot:
        from .plotting import plot_run

        plot_run(result, os.path.join(out_dir, "performance.png"))


def write_aggregate(agg: Aggregate, out_dir: str, plot: bool = False) -> None:
    os.makedirs(out_dir, exist_ok=True)
    n = agg.config.n_goals
    with open(os.path.join(out_dir, "aggregate.csv"), "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(aggregate_header(n))
        for i, trial in enumerate(agg.eval_trials):
            row = [trial]
            for g in range(n):
                row += [repr(float(agg.median[i, g])), repr(float(agg.q25[i, g])), repr(float(agg.q75[i, g]))]
            w.writerow(row)
    with open(os.path.join(out_dir, "criterion.csv"), "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(criterion_header(n))
        for o in agg.outcomes:
            w.writerow([o.seed] + [_cell(t) for t in o.trials_to_criterion] + [_cell(o.all_goals_criterion)])
    with open(os.path.join(out_dir, "config.resolved.json"), "w") as fh:
        fh.write(agg.config.to_json())
    if plot:
        from .plotting import plot_aggregate

        plot_aggregate(agg, os.path.join(out_dir, "aggregate.png"))


# -- reading -------------------------------------------------------------------


def _read(path: str, expected: Optional[Sequence[str]] = None, prefix: Optional[str] = None):
    if not os.path.isfile(path):
        raise SchemaError(f"{path}: missing")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if expected is not None and header != list(expected):
        raise SchemaError(f"{path}: header {header} does not match {list(expected)}")
    if prefix is not None and (not header or header[0] != prefix):
        raise SchemaError(f"{path}: header must start with {prefix!r}")
    return header, body


def _opt_int(cell: str) -> Optional[int]:
    return None if cell == "" else int(cell)


@dataclass
class Summary:
    """Per-goal trials-to-criterion and final success, read back from disk."""

    kind: str  # "run" or "aggregate"
    trials_to_criterion: list[Optional[float]]
    final_success: list[float]
    all_goals: Optional[float]
    n_seeds: int = 1


def read_run_summary(run_dir: str) -> Summary:
    header, evals = _read(os.path.join(run_dir, "evals.csv"), prefix="trial")
    n = len(header) - 1
    if header != evals_header(n):
        raise SchemaError(f"{run_dir}/evals.csv: unexpected header {header}")
    _, rows = _read(os.path.join(run_dir, "summary.csv"), SUMMARY_HEADER)
    crit = {r[0]: _opt_int(r[1]) for r in rows}
    try:
        per_goal = [crit[str(g)] for g in range(n)]
    except KeyError as exc:
        raise SchemaError(f"{run_dir}/summary.csv: no row for goal {exc.args[0]}") from None
    final = [float(v) for v in evals[-1][1:]] if evals else [0.0] * n
    return Summary("run", per_goal, final, crit.get("all"))


def read_aggregate_summary(agg_dir: str) -> Summary:
    header, rows = _read(os.path.join(agg_dir, "aggregate.csv"), prefix="trial")
    n = (len(header) - 1) // 3
    if header != aggregate_header(n):
        raise SchemaError(f"{agg_dir}/aggregate.csv: unexpected header {header}")
    _, crit_rows = _read(os.path.join(agg_dir, "criterion.csv"), criterion_header(n))
    final = [float(rows[-1][1 + 3 * g]) for g in range(n)] if rows else [0.0] * n

    def med(col: int) -> Optional[float]:
        # unreached seeds count as +inf so they pull the median up
        vals = [_opt_int(r[col]) for r in crit_rows]
        m = float(np.median([np.inf if v is None else v for v in vals]))
        return None if np.isinf(m) else m

    return Summary(
        "aggregate",
        [med(1 + g) for g in range(n)],
        final,
        med(n + 1),
        n_seeds=len(crit_rows),
    )


def read_summary(path: str) -> Summary:
    if os.path.isfile(os.path.join(path, "aggregate.csv")):
        return read_aggregate_summary(path)
    if os.path.isfile(os.path.join(path, "evals.csv")) or os.path.isfile(os.path.join(path, "summary.csv")):
        return read_run_summary(path)
    raise SchemaError(f"{path}: no evals.csv/summary.csv or aggregate.csv found")
