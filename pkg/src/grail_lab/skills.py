"""Low-level experts, one per goal.

Two backends share the same three calls (``attempt``, ``train``,
``competence_probe``):

* :class:`AbstractSkills` keeps a scalar success probability per goal that
  climbs towards a ceiling every time the goal is achieved.
* :class:`ActorCriticSkills` is a one-step Gaussian reacher: the actor mean is
  a 2-D point, the critic a scalar baseline of the binary achievement reward.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from .env import ConfigError, WorldConfig, positions_array

EXPLORE = "explore"
EXPLOIT = "exploit"
BACKEND_KINDS = ("abstract", "actor-critic")


@dataclass(frozen=True)
class AbstractParams:
    # calibrated by simulation: the context-aware bandit learns exp1 well inside
    # 3000 trials while the state-blind one stays at about half the goals
    p0: float = 0.1
    p_max: float = 0.98
    eta: float = 0.015

    def validate(self) -> None:
        if not 0.0 <= self.p0 <= self.p_max < 1.0:
            raise ConfigError("backend: need 0 <= p0 <= p_max < 1")
        if not 0.0 < self.eta < 1.0:
            raise ConfigError("backend.eta must lie in (0, 1)")


@dataclass(frozen=True)
class ActorCriticParams:
    sigma: float = 0.15
    alpha_actor: float = 0.4
    alpha_critic: float = 0.1
    # initial actor mean sits this far from its sphere, on the line to the origin
    start_offset: float = 0.25

    def validate(self) -> None:
        if not self.sigma > 0:
            raise ConfigError("backend.sigma must be > 0")
        if not 0.0 < self.alpha_actor <= 1.0:
            raise ConfigError("backend.alpha_actor must lie in (0, 1]")
        if not 0.0 < self.alpha_critic <= 1.0:
            raise ConfigError("backend.alpha_critic must lie in (0, 1]")
        if self.start_offset < 0:
            raise ConfigError("backend.start_offset must be >= 0")


class AbstractSkills:
    kind = "abstract"

    def __init__(self, n_goals: int, params: AbstractParams = AbstractParams()):
        self.params = params
        self.p = np.full(n_goals, params.p0, dtype=float)

    def attempt(self, goal: int, mode: str, config: WorldConfig, rng: np.random.Generator):
        # exploit is the same draw: the success probability *is* the policy
        return bool(rng.random() < self.p[goal]), None

    def train(self, goal: int, action, achieved: bool) -> None:
        if achieved:
            self.p[goal] += self.params.eta * (self.params.p_max - self.p[goal])

    def competence_probe(
        self, goal: int, config: WorldConfig, rng: np.random.Generator, n_eval: int
    ) -> float:
        if n_eval < 1:
            raise ValueError("n_eval must be >= 1")
        return float(np.count_nonzero(rng.random(n_eval) < self.p[goal])) / n_eval

    def state_digest(self) -> str:
        return hashlib.sha256(self.p.tobytes()).hexdigest()


class ActorCriticSkills:
    kind = "actor-critic"

    def __init__(self, config: WorldConfig, params: ActorCriticParams = ActorCriticParams()):
        self.params = params
        targets = positions_array(config)
        norms = np.linalg.norm(targets, axis=1, keepdims=True)
        inward = np.divide(targets, norms, out=np.zeros_like(targets), where=norms > 0)
        self.mu = targets - params.start_offset * inward
        self.v = np.zeros(config.n_goals)

    def attempt(self, goal: int, mode: str, config: WorldConfig, rng: np.random.Generator):
        if mode == EXPLORE:
            action = self.mu[goal] + self.params.sigma * rng.standard_normal(2)
        else:
            action = self.mu[goal].copy()
        target = np.asarray(config.sphere_positions[goal])
        return bool(np.linalg.norm(action - target) <= config.reach_radius), action

    def train(self, goal: int, action: Optional[np.ndarray], achieved: bool) -> None:
        if action is None:
            raise ValueError("actor-critic training needs the sampled action")
        delta = (1.0 if achieved else 0.0) - self.v[goal]
        self.v[goal] = min(1.0, max(0.0, self.v[goal] + self.params.alpha_critic * delta))
        self.mu[goal] = self.mu[goal] + self.params.alpha_actor * delta * (action - self.mu[goal])

    def competence_probe(
        self, goal: int, config: WorldConfig, rng: np.random.Generator, n_eval: int
    ) -> float:
        if n_eval < 1:
            raise ValueError("n_eval must be >= 1")
        # the exploit action is the mean, so every probe attempt agrees
        reached, _ = self.attempt(goal, EXPLOIT, config, rng)
        return 1.0 if reached else 0.0

    def state_digest(self) -> str:
        return hashlib.sha256(self.mu.tobytes() + self.v.tobytes()).hexdigest()


Skills = AbstractSkills | ActorCriticSkills


def make_skills(kind: str, config: WorldConfig, params=None) -> Skills:
    if kind == "abstract":
        return AbstractSkills(config.n_goals, params or AbstractParams())
    if kind == "actor-critic":
        return ActorCriticSkills(config, params or ActorCriticParams())
    raise ConfigError(f"unknown backend {kind!r}; valid backends: {', '.join(BACKEND_KINDS)}")


def params_from_dict(kind: str, data: dict):
    cls = AbstractParams if kind == "abstract" else ActorCriticParams
    fields = set(asdict(cls()))
    unknown = set(data) - fields
    if unknown:
        raise ConfigError(f"backend ({kind}): unknown keys {sorted(unknown)}")
    try:
        params = cls(**{k: float(v) for k, v in data.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"backend: {exc}") from None
    params.validate()
    return params
