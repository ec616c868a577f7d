"""Agent-environment loop, evaluation protocol and multi-seed replication.

Random streams
--------------
Each run derives two PCG64 generators from ``SeedSequence(seed).spawn(2)``:
the trial stream and the evaluation stream. Within the trial stream draws
happen in a fixed order:

1. context sampling at every reset (one uniform per context bit),
2. goal selection (one uniform, inverse CDF over the selection probabilities),
3. reach noise (actor-critic explore: two standard normals),
4. reach outcome (abstract backend: one uniform).

Evaluation only touches the evaluation stream, so changing the evaluation
schedule never changes the trial log.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import ExperimentConfig
from .env import (
    EnvState,
    apply_outcome,
    preconditions_met,
    reset,
    satisfying_state,
    state_key,
)
from .motivation import CompetenceTracker
from .selectors import GoalSelector
from .skills import EXPLOIT, EXPLORE, Skills, make_skills

CRITERION = 0.9


@dataclass(frozen=True)
class TrialRecord:
    trial: int  # 1-based
    epoch: int  # 1-based
    key_before: int
    goal: int
    reached: bool
    achieved: bool
    reward: float
    key_after: int


@dataclass(frozen=True)
class EvalRecord:
    trial: int  # number of trials completed when evaluated
    success: tuple[float, ...]


def make_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    trial_ss, eval_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.Generator(np.random.PCG64(trial_ss)), np.random.Generator(np.random.PCG64(eval_ss))


class Loop:
    """Mutable state of one run: environment, experts, tracker, selector."""

    def __init__(self, config: ExperimentConfig, rng: Optional[np.random.Generator] = None):
        self.config = config
        self.world = config.world
        self.skills: Skills = make_skills(config.backend_kind, config.world, config.backend_params)
        self.tracker = CompetenceTracker(config.tracker_params)
        self.selector = GoalSelector(config.selector_kind, config.n_goals, config.selector_params)
        self.rng = rng if rng is not None else make_streams(config.seed)[0]
        self.trial = 0
        self.state: EnvState = reset(self.world, self.rng)

    def key(self, state: EnvState) -> int:
        return state_key(state, self.config.observation_mode)

    def learning_digest(self) -> tuple[str, str, str]:
        return (
            self.skills.state_digest(),
            self.tracker.state_digest(),
            self.selector.state_digest(),
        )


def run_trial(loop: Loop, rng: Optional[np.random.Generator] = None) -> TrialRecord:
    """Advance ``loop`` by one trial and return its record."""
    rng = rng if rng is not None else loop.rng
    world = loop.world
    state = loop.state
    loop.trial += 1
    epoch = (loop.trial - 1) // world.trials_per_epoch + 1
    ends_epoch = loop.trial % world.trials_per_epoch == 0

    key = loop.key(state)
    # the state-blind selector tracks competence under one global key
    learn_key = 0 if loop.selector.state_blind else key
    goal = loop.selector.select(learn_key, rng)
    reached, action = loop.skills.attempt(goal, EXPLORE, world, rng)
    trainable = preconditions_met(state, goal, world)
    next_state, achieved = apply_outcome(state, goal, reached, world)
    loop.tracker.record(learn_key, goal, achieved)
    reward = loop.tracker.intrinsic_reward(learn_key, goal)
    next_key = loop.key(next_state)
    if loop.selector.state_blind:
        loop.selector.update(learn_key, goal, reward, None)
    else:
        loop.selector.update(key, goal, reward, None if ends_epoch else next_key)
    if trainable:
        loop.skills.train(goal, action, achieved)
    loop.state = reset(world, rng) if ends_epoch else next_state
    return TrialRecord(loop.trial, epoch, key, goal, reached, achieved, reward, next_key)


def evaluate(loop: Loop, rng: np.random.Generator) -> EvalRecord:
    """Exploit-mode success rate of every expert with its precondition satisfied."""
    n_eval = loop.config.resolved_eval_attempts
    rates = []
    for goal in range(loop.world.n_goals):
        state = satisfying_state(goal, loop.world)
        assert preconditions_met(state, goal, loop.world)
        rates.append(loop.skills.competence_probe(goal, loop.world, rng, n_eval))
    return EvalRecord(loop.trial, tuple(rates))


@dataclass
class RunResult:
    config: ExperimentConfig
    trials: list[TrialRecord]
    evals: list[EvalRecord]
    selector: GoalSelector
    tracker: CompetenceTracker
    skills: Skills
    trials_to_criterion: list[Optional[int]]
    all_goals_criterion: Optional[int]
    value_snapshots: list[tuple[int, list]] = field(default_factory=list)

    @property
    def epochs_to_criterion(self) -> list[Optional[int]]:
        tpe = self.config.world.trials_per_epoch
        return [None if t is None else -(-t // tpe) for t in self.trials_to_criterion]

    @property
    def all_goals_epoch(self) -> Optional[int]:
        t = self.all_goals_criterion
        return None if t is None else -(-t // self.config.world.trials_per_epoch)


def criterion_trials(
    evals: Sequence[EvalRecord], n_goals: int, threshold: float = CRITERION
) -> tuple[list[Optional[int]], Optional[int]]:
    """First evaluation trial at which each goal, and all goals together, reach ``threshold``."""
    per_goal: list[Optional[int]] = [None] * n_goals
    all_goals = None
    for rec in evals:
        for g, rate in enumerate(rec.success):
            if per_goal[g] is None and rate >= threshold:
                per_goal[g] = rec.trial
        if all_goals is None and all(rate >= threshold for rate in rec.success):
            all_goals = rec.trial
    return per_goal, all_goals


def run_experiment(config: ExperimentConfig) -> RunResult:
    config.validate()
    trial_rng, eval_rng = make_streams(config.seed)
    loop = Loop(config, trial_rng)
    trials: list[TrialRecord] = []
    evals = [evaluate(loop, eval_rng)]
    snapshots = []
    for _ in range(config.total_trials):
        trials.append(run_trial(loop))
        if loop.trial % config.eval_interval == 0 or loop.trial == config.total_trials:
            evals.append(evaluate(loop, eval_rng))
        if config.values_interval and loop.trial % config.values_interval == 0:
            snapshots.append((loop.trial, list(loop.selector.rows())))
    per_goal, all_goals = criterion_trials(evals, config.n_goals)
    return RunResult(
        config, trials, evals, loop.selector, loop.tracker, loop.skills,
        per_goal, all_goals, snapshots,
    )


# -- replication -------------------------------------------------------------


@dataclass(frozen=True)
class SeedOutcome:
    seed: int
    eval_trials: tuple[int, ...]
    success: np.ndarray  # (n_evals, n_goals)
    trials_to_criterion: tuple[Optional[int], ...]
    all_goals_criterion: Optional[int]


@dataclass
class Aggregate:
    """Per-evaluation-point median and quartiles of per-goal success over seeds."""

    config: ExperimentConfig
    seeds: tuple[int, ...]
    eval_trials: tuple[int, ...]
    median: np.ndarray
    q25: np.ndarray
    q75: np.ndarray
    outcomes: tuple[SeedOutcome, ...]

    def criterion_matrix(self) -> list[list[Optional[int]]]:
        return [list(o.trials_to_criterion) for o in self.outcomes]

    def all_goals_criteria(self) -> list[Optional[int]]:
        return [o.all_goals_criterion for o in self.outcomes]


def _run_seed(args) -> SeedOutcome:
    config, seed, out_dir, plot = args
    from dataclasses import replace

    result = run_experiment(replace(config, seed=seed))
    if out_dir is not None:
        from .results import write_run

        write_run(result, out_dir, plot=plot)
    return SeedOutcome(
        seed,
        tuple(e.trial for e in result.evals),
        np.array([e.success for e in result.evals], dtype=float),
        tuple(result.trials_to_criterion),
        result.all_goals_criterion,
    )


def aggregate(config: ExperimentConfig, outcomes: Sequence[SeedOutcome]) -> Aggregate:
    outcomes = tuple(sorted(outcomes, key=lambda o: o.seed))
    stack = np.stack([o.success for o in outcomes])
    q25, median, q75 = np.percentile(stack, [25, 50, 75], axis=0)
    return Aggregate(
        config,
        tuple(o.seed for o in outcomes),
        outcomes[0].eval_trials,
        median,
        q25,
        q75,
        outcomes,
    )


def replicate(
    config: ExperimentConfig,
    seeds: Sequence[int],
    jobs: int = 1,
    out_dir: Optional[str] = None,
    plot: bool = False,
) -> Aggregate:
    """Run every seed independently and reduce; the result does not depend on ``jobs``."""
    if len(seeds) < 1:
        raise ValueError("replicate needs at least one seed")
    if len(set(seeds)) != len(seeds):
        raise ValueError("replicate seeds must be distinct")
    config.validate()
    args = []
    for seed in seeds:
        sub = None if out_dir is None else f"{out_dir}/seed_{seed}"
        args.append((config, seed, sub, plot))
    if jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_seed, args))
    else:
        outcomes = [_run_seed(a) for a in args]
    return aggregate(config, outcomes)
