"""Sphere world: goals are spheres that light up when reached while their
precondition holds.

States are immutable; every operation returns a new :class:`EnvState`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

GOAL_NAMES = "abcdefghijklmnopqrstuvwxyz"

OBSERVATION_MODES = ("context_only", "spheres_only", "full")
RESET_MODES = ("per_trial", "per_epoch")


class ConfigError(ValueError):
    """Raised when a world or experiment configuration is invalid."""


def goal_name(goal: int) -> str:
    return GOAL_NAMES[goal] if goal < len(GOAL_NAMES) else f"g{goal}"


# -- precondition rules ------------------------------------------------------


@dataclass(frozen=True)
class Always:
    def to_dict(self) -> dict:
        return {"type": "always"}


@dataclass(frozen=True)
class ContextBit:
    bit: int
    required: bool = True

    def to_dict(self) -> dict:
        return {"type": "context", "bit": self.bit, "required": self.required}


@dataclass(frozen=True)
class SpheresActive:
    required: frozenset[int]

    def to_dict(self) -> dict:
        return {"type": "spheres", "required": sorted(self.required)}


PreconditionRule = Union[Always, ContextBit, SpheresActive]


def rule_from_dict(data: dict) -> PreconditionRule:
    kind = data.get("type", "always")
    if kind == "always":
        return Always()
    if kind == "context":
        return ContextBit(int(data.get("bit", 0)), bool(data.get("required", True)))
    if kind == "spheres":
        return SpheresActive(frozenset(_goal_index(g) for g in data.get("required", [])))
    raise ConfigError(f"unknown precondition type {kind!r} (expected always, context, spheres)")


def _goal_index(goal: int | str) -> int:
    if isinstance(goal, str):
        if len(goal) == 1 and goal in GOAL_NAMES:
            return GOAL_NAMES.index(goal)
        raise ConfigError(f"unknown goal name {goal!r}")
    return int(goal)


# -- world config ------------------------------------------------------------


def circle_positions(n: int, radius: float = 1.0) -> list[tuple[float, float]]:
    """``n`` points evenly spaced on a circle, the first one on the +x axis."""
    return [
        (radius * math.cos(2 * math.pi * i / n), radius * math.sin(2 * math.pi * i / n))
        for i in range(n)
    ]


@dataclass(frozen=True)
class WorldConfig:
    n_goals: int
    n_context_bits: int
    preconditions: tuple[PreconditionRule, ...]
    context_on_probability: float = 0.5
    sphere_positions: tuple[tuple[float, float], ...] = ()
    reach_radius: float = 0.12
    reset_mode: str = "per_trial"
    trials_per_epoch: int = 1

    def __post_init__(self):
        if not self.sphere_positions:
            object.__setattr__(self, "sphere_positions", tuple(circle_positions(self.n_goals)))
        else:
            object.__setattr__(
                self,
                "sphere_positions",
                tuple((float(x), float(y)) for x, y in self.sphere_positions),
            )
        object.__setattr__(self, "preconditions", tuple(self.preconditions))

    def validate(self) -> None:
        if self.n_goals < 1:
            raise ConfigError("world.n_goals must be >= 1")
        if self.n_context_bits < 0:
            raise ConfigError("world.n_context_bits must be >= 0")
        if len(self.preconditions) != self.n_goals:
            raise ConfigError(
                f"world.preconditions has {len(self.preconditions)} entries, expected n_goals={self.n_goals}"
            )
        if len(self.sphere_positions) != self.n_goals:
            raise ConfigError(
                f"world.sphere_positions has {len(self.sphere_positions)} entries, expected n_goals={self.n_goals}"
            )
        if not 0.0 <= self.context_on_probability <= 1.0:
            raise ConfigError("world.context_on_probability must lie in [0, 1]")
        if not self.reach_radius > 0:
            raise ConfigError("world.reach_radius must be > 0")
        if self.reset_mode not in RESET_MODES:
            raise ConfigError(f"world.reset_mode must be one of {', '.join(RESET_MODES)}")
        if self.trials_per_epoch < 1:
            raise ConfigError("world.trials_per_epoch must be >= 1")
        if self.reset_mode == "per_trial" and self.trials_per_epoch != 1:
            raise ConfigError("world.reset_mode per_trial requires trials_per_epoch = 1")
        for g, rule in enumerate(self.preconditions):
            if isinstance(rule, ContextBit) and not 0 <= rule.bit < self.n_context_bits:
                raise ConfigError(
                    f"world.preconditions[{g}]: context bit {rule.bit} out of range "
                    f"(n_context_bits={self.n_context_bits})"
                )
            if isinstance(rule, SpheresActive):
                if g in rule.required:
                    raise ConfigError(f"world.preconditions[{g}]: goal requires itself")
                bad = [r for r in rule.required if not 0 <= r < self.n_goals]
                if bad:
                    raise ConfigError(f"world.preconditions[{g}]: unknown goals {bad}")
        _check_acyclic(self)

    def to_dict(self) -> dict:
        return {
            "n_goals": self.n_goals,
            "n_context_bits": self.n_context_bits,
            "context_on_probability": self.context_on_probability,
            "preconditions": [r.to_dict() for r in self.preconditions],
            "sphere_positions": [list(p) for p in self.sphere_positions],
            "reach_radius": self.reach_radius,
            "reset_mode": self.reset_mode,
            "trials_per_epoch": self.trials_per_epoch,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WorldConfig":
        known = {
            "n_goals", "n_context_bits", "context_on_probability", "preconditions",
            "sphere_positions", "reach_radius", "reset_mode", "trials_per_epoch",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"world: unknown keys {sorted(unknown)}")
        try:
            rules = [rule_from_dict(r) for r in data["preconditions"]]
            n_goals = int(data.get("n_goals", len(rules)))
            return cls(
                n_goals=n_goals,
                n_context_bits=int(data.get("n_context_bits", 0)),
                preconditions=tuple(rules),
                context_on_probability=float(data.get("context_on_probability", 0.5)),
                sphere_positions=tuple(tuple(p) for p in data.get("sphere_positions", ())),
                reach_radius=float(data.get("reach_radius", 0.12)),
                reset_mode=str(data.get("reset_mode", "per_trial")),
                trials_per_epoch=int(data.get("trials_per_epoch", 1)),
            )
        except KeyError as exc:
            raise ConfigError(f"world: missing key {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"world: {exc}") from None


def _check_acyclic(config: WorldConfig) -> None:
    deps = {
        g: rule.required if isinstance(rule, SpheresActive) else frozenset()
        for g, rule in enumerate(config.preconditions)
    }
    done: set[int] = set()
    visiting: set[int] = set()

    def visit(g: int) -> None:
        if g in done:
            return
        if g in visiting:
            raise ConfigError(f"world.preconditions: dependency cycle through goal {goal_name(g)}")
        visiting.add(g)
        for d in deps[g]:
            visit(d)
        visiting.discard(g)
        done.add(g)

    for g in deps:
        visit(g)


def exp1_world() -> WorldConfig:
    """Context-gated world: a, c, e need the contextual feature on; b, d, f need it off."""
    rules = tuple(ContextBit(0, required=(g % 2 == 0)) for g in range(6))
    return WorldConfig(
        n_goals=6,
        n_context_bits=1,
        preconditions=rules,
        context_on_probability=0.5,
        reset_mode="per_trial",
        trials_per_epoch=1,
    )


def exp2_world() -> WorldConfig:
    """Chain world: f needs c active, a needs f active; b, d, e are free."""
    a, c, f = 0, 2, 5
    rules: list[PreconditionRule] = [Always() for _ in range(6)]
    rules[f] = SpheresActive(frozenset({c}))
    rules[a] = SpheresActive(frozenset({f}))
    return WorldConfig(
        n_goals=6,
        n_context_bits=0,
        preconditions=tuple(rules),
        reset_mode="per_epoch",
        trials_per_epoch=4,
    )


# -- state -------------------------------------------------------------------


@dataclass(frozen=True)
class EnvState:
    context: tuple[bool, ...]
    active: tuple[bool, ...] = field(default=())

    def active_set(self) -> frozenset[int]:
        return frozenset(i for i, on in enumerate(self.active) if on)


def empty_state(config: WorldConfig) -> EnvState:
    return EnvState((False,) * config.n_context_bits, (False,) * config.n_goals)


def reset(config: WorldConfig, rng: np.random.Generator) -> EnvState:
    """Clear every sphere and resample each context bit (one uniform draw per bit)."""
    p = config.context_on_probability
    context = tuple(bool(rng.random() < p) for _ in range(config.n_context_bits))
    return EnvState(context, (False,) * config.n_goals)


def preconditions_met(state: EnvState, goal: int, config: WorldConfig) -> bool:
    rule = config.preconditions[goal]
    if isinstance(rule, ContextBit):
        return state.context[rule.bit] == rule.required
    if isinstance(rule, SpheresActive):
        return all(state.active[r] for r in rule.required)
    return True


def apply_outcome(
    state: EnvState, goal: int, reached: bool, config: WorldConfig
) -> tuple[EnvState, bool]:
    achieved = bool(reached) and preconditions_met(state, goal, config)
    if not achieved or state.active[goal]:
        return state, achieved
    active = list(state.active)
    active[goal] = True
    return replace(state, active=tuple(active)), True


def key_bits(config: WorldConfig, mode: str) -> int:
    """Number of bits a state key occupies under ``mode``."""
    if mode == "context_only":
        return config.n_context_bits
    if mode == "spheres_only":
        return config.n_goals
    if mode == "full":
        return config.n_context_bits + config.n_goals
    raise ConfigError(f"observation_mode must be one of {', '.join(OBSERVATION_MODES)}")


def state_key(state: EnvState, mode: str = "full") -> int:
    """Integer code of the observed state: context bits low, sphere bits above them."""
    if mode not in OBSERVATION_MODES:
        raise ConfigError(f"observation_mode must be one of {', '.join(OBSERVATION_MODES)}")
    code = 0
    shift = 0
    if mode in ("context_only", "full"):
        for bit in state.context:
            code |= int(bit) << shift
            shift += 1
    if mode in ("spheres_only", "full"):
        for bit in state.active:
            code |= int(bit) << shift
            shift += 1
    return code


def decode_key(code: int, config: WorldConfig, mode: str = "full") -> EnvState:
    """Inverse of :func:`state_key`; bits outside ``mode`` come back cleared."""
    n_ctx = config.n_context_bits if mode in ("context_only", "full") else 0
    n_act = config.n_goals if mode in ("spheres_only", "full") else 0
    if not 0 <= code < 1 << (n_ctx + n_act):
        raise ValueError(f"key {code} out of range for mode {mode}")
    context = [bool(code >> i & 1) for i in range(n_ctx)]
    context += [False] * (config.n_context_bits - n_ctx)
    active = [bool(code >> (n_ctx + i) & 1) for i in range(n_act)]
    active += [False] * (config.n_goals - n_act)
    return EnvState(tuple(context), tuple(active))


def satisfying_state(goal: int, config: WorldConfig) -> EnvState:
    """Smallest state in which ``goal`` is achievable.

    Sphere requirements pull in their own preconditions transitively; context
    bits are set only where some rule on that chain requires them on.
    """
    context: dict[int, bool] = {}
    active: set[int] = set()
    stack = [goal]
    seen: set[int] = set()
    while stack:
        g = stack.pop()
        if g in seen:
            raise ConfigError(f"no satisfying state for goal {goal_name(goal)}: cyclic preconditions")
        seen.add(g)
        rule = config.preconditions[g]
        if isinstance(rule, ContextBit):
            if context.get(rule.bit, rule.required) != rule.required:
                raise ConfigError(
                    f"no satisfying state for goal {goal_name(goal)}: contradictory context bit {rule.bit}"
                )
            context[rule.bit] = rule.required
        elif isinstance(rule, SpheresActive):
            for r in rule.required:
                if r not in active:
                    active.add(r)
                    stack.append(r)
    return EnvState(
        tuple(context.get(b, False) for b in range(config.n_context_bits)),
        tuple(i in active for i in range(config.n_goals)),
    )


def all_states(config: WorldConfig, mode: str = "full") -> list[EnvState]:
    n = key_bits(config, mode)
    return [decode_key(code, config, mode) for code in range(1 << n)]


def positions_array(config: WorldConfig) -> np.ndarray:
    return np.asarray(config.sphere_positions, dtype=float)


def parse_goal(goal: int | str, config: WorldConfig) -> int:
    g = _goal_index(goal)
    if not 0 <= g < config.n_goals:
        raise ConfigError(f"goal {goal!r} out of range")
    return g

