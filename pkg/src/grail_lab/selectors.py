"""Goal selectors.

``grail``    one value per goal, blind to the environment state.
``c-grail``  one value per (state key, goal): a contextual bandit.
``m-grail``  tabular Q-learning over (state key, goal), so intrinsic value
             flows back from a goal to the goals that enable it.

All three pick goals with a softmax over the values at the current key, mixed
with a uniform floor so no goal is ever abandoned.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass
from typing import Optional, TextIO

import numpy as np

from .env import ConfigError

SELECTOR_KINDS = ("grail", "c-grail", "m-grail")


@dataclass(frozen=True)
class SelectorParams:
    alpha_v: float = 0.1
    alpha_q: float = 0.1
    gamma: float = 0.9
    tau: float = 0.02
    epsilon_floor: float = 0.02

    def validate(self) -> None:
        if not 0.0 < self.alpha_v <= 1.0:
            raise ConfigError("selector.alpha_v must lie in (0, 1]")
        if not 0.0 < self.alpha_q <= 1.0:
            raise ConfigError("selector.alpha_q must lie in (0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError("selector.gamma must lie in [0, 1)")
        if not self.tau > 0:
            raise ConfigError("selector.tau must be > 0")
        if not 0.0 <= self.epsilon_floor < 1.0:
            raise ConfigError("selector.epsilon_floor must lie in [0, 1)")


def softmax_probabilities(values, tau: float, epsilon_floor: float) -> list[float]:
    top = max(values)
    weights = [math.exp((v - top) / tau) for v in values]
    total = sum(weights)
    n = len(values)
    return [(1.0 - epsilon_floor) * w / total + epsilon_floor / n for w in weights]


def argmax_lowest(values) -> int:
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


class GoalSelector:
    """Value table plus selection and update rules for one selector kind."""

    def __init__(self, kind: str, n_goals: int, params: SelectorParams = SelectorParams()):
        if kind not in SELECTOR_KINDS:
            raise ConfigError(
                f"unknown selector {kind!r}; valid selectors: {', '.join(SELECTOR_KINDS)}"
            )
        if n_goals < 1:
            raise ValueError("n_goals must be >= 1")
        self.kind = kind
        self.n_goals = n_goals
        self.params = params
        self.table: dict[int, list[float]] = {}

    @property
    def state_blind(self) -> bool:
        return self.kind == "grail"

    def _slot(self, key: int) -> int:
        return 0 if self.state_blind else key

    def values(self, key: int) -> list[float]:
        """Values at ``key``; a fresh zero row if the key was never updated."""
        row = self.table.get(self._slot(key))
        return list(row) if row is not None else [0.0] * self.n_goals

    def _row(self, key: int) -> list[float]:
        slot = self._slot(key)
        row = self.table.get(slot)
        if row is None:
            row = self.table[slot] = [0.0] * self.n_goals
        return row

    def probabilities(self, key: int) -> list[float]:
        return softmax_probabilities(self.values(key), self.params.tau, self.params.epsilon_floor)

    def select(self, key: int, rng: np.random.Generator) -> int:
        """Sample a goal by inverse CDF on a single uniform draw."""
        u = rng.random()
        acc = 0.0
        probs = self.probabilities(key)
        for g, p in enumerate(probs):
            acc += p
            if u < acc:
                return g
        return self.n_goals - 1

    def greedy_goal(self, key: int) -> int:
        return argmax_lowest(self.values(key))

    def update_bandit(self, key: int, goal: int, reward: float) -> None:
        if self.kind == "m-grail":
            raise ValueError("update_bandit is for grail / c-grail selectors")
        row = self._row(key)
        row[goal] += self.params.alpha_v * (reward - row[goal])

    def update_q(self, key: int, goal: int, reward: float, next_key: Optional[int]) -> None:
        """One Q-learning step; ``next_key=None`` marks a terminal transition."""
        if self.kind != "m-grail":
            raise ValueError("update_q is for the m-grail selector")
        target = reward
        if next_key is not None:
            target += self.params.gamma * max(self.values(next_key))
        row = self._row(key)
        row[goal] += self.params.alpha_q * (target - row[goal])

    def update(self, key: int, goal: int, reward: float, next_key: Optional[int]) -> None:
        if self.kind == "m-grail":
            self.update_q(key, goal, reward, next_key)
        else:
            self.update_bandit(key, goal, reward)

    def rows(self):
        """``(kind, key, goal, value)`` in sorted key order."""
        for key in sorted(self.table):
            for goal, value in enumerate(self.table[key]):
                yield self.kind, key, goal, value

    def dump_csv(self, fh: TextIO, trial: Optional[int] = None, header: bool = True) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        prefix = [] if trial is None else [trial]
        if header:
            writer.writerow((["trial"] if trial is not None else []) + ["kind", "key", "goal", "value"])
        for kind, key, goal, value in self.rows():
            writer.writerow(prefix + [kind, key, goal, repr(value)])

    def state_digest(self) -> str:
        return hashlib.sha256(repr(sorted(self.table.items())).encode()).hexdigest()
