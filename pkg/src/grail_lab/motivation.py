"""Competence tracking and the learning-progress intrinsic reward.

Each (state key, goal) pair carries two exponential moving averages of binary
achievement. The slow one is the competence estimate; fast minus slow is the
competence derivative used as intrinsic reward.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from typing import TextIO

from .env import ConfigError


@dataclass(frozen=True)
class TrackerParams:
    alpha_fast: float = 0.3
    alpha_slow: float = 0.05
    clamp_negative: bool = True
    # divide each EMA by 1 - (1 - alpha)^n so a fresh entry reads its observed mean
    debias: bool = False

    def validate(self) -> None:
        if not (0.0 < self.alpha_slow < self.alpha_fast < 1.0):
            raise ConfigError("tracker: need 0 < alpha_slow < alpha_fast < 1")


class CompetenceTracker:
    def __init__(self, params: TrackerParams = TrackerParams()):
        self.params = params
        # (key, goal) -> [c_fast, c_slow, n_records]
        self.table: dict[tuple[int, int], list] = {}

    def record(self, key: int, goal: int, achieved: bool) -> None:
        o = 1.0 if achieved else 0.0
        entry = self.table.get((key, goal))
        if entry is None:
            entry = self.table[(key, goal)] = [0.0, 0.0, 0]
        entry[0] += self.params.alpha_fast * (o - entry[0])
        entry[1] += self.params.alpha_slow * (o - entry[1])
        entry[2] += 1

    def estimates(self, key: int, goal: int) -> tuple[float, float]:
        """``(fast, slow)`` as used for rewards: raw, or warm-up corrected."""
        entry = self.table.get((key, goal))
        if entry is None:
            return 0.0, 0.0
        c_fast, c_slow, n = entry
        if self.params.debias:
            c_fast /= 1.0 - (1.0 - self.params.alpha_fast) ** n
            c_slow /= 1.0 - (1.0 - self.params.alpha_slow) ** n
        return c_fast, c_slow

    def intrinsic_reward(self, key: int, goal: int) -> float:
        c_fast, c_slow = self.estimates(key, goal)
        raw = c_fast - c_slow
        return max(0.0, raw) if self.params.clamp_negative else raw

    def competence(self, key: int, goal: int) -> float:
        return self.estimates(key, goal)[1]

    def count(self, key: int, goal: int) -> int:
        entry = self.table.get((key, goal))
        return 0 if entry is None else entry[2]

    def rows(self):
        """``(key, goal, c_fast, c_slow)`` in sorted key order."""
        for (key, goal), (c_fast, c_slow, _) in sorted(self.table.items()):
            yield key, goal, c_fast, c_slow

    def dump_csv(self, fh: TextIO) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["key", "goal", "c_fast", "c_slow"])
        for key, goal, c_fast, c_slow in self.rows():
            writer.writerow([key, goal, repr(c_fast), repr(c_slow)])

    def state_digest(self) -> str:
        return hashlib.sha256(repr(sorted(self.table.items())).encode()).hexdigest()
