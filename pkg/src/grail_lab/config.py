"""Experiment configuration, presets and JSON loading."""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Optional, Union

from .env import OBSERVATION_MODES, ConfigError, WorldConfig, exp1_world, exp2_world
from .motivation import TrackerParams
from .selectors import SELECTOR_KINDS, SelectorParams
from .skills import BACKEND_KINDS, AbstractParams, ActorCriticParams, params_from_dict

BackendParams = Union[AbstractParams, ActorCriticParams]

SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class ExperimentConfig:
    world: WorldConfig
    selector_kind: str = "c-grail"
    selector_params: SelectorParams = field(default_factory=SelectorParams)
    backend_kind: str = "abstract"
    backend_params: BackendParams = field(default_factory=AbstractParams)
    tracker_params: TrackerParams = field(default_factory=TrackerParams)
    observation_mode: str = "full"
    total_trials: int = 4000
    eval_interval: int = 50
    # None picks 33 for the abstract backend and 1 for the deterministic actor-critic probe
    eval_attempts: Optional[int] = None
    values_interval: int = 0
    seed: int = 0
    preset: Optional[str] = None

    @property
    def n_goals(self) -> int:
        return self.world.n_goals

    @property
    def resolved_eval_attempts(self) -> int:
        if self.eval_attempts is not None:
            return self.eval_attempts
        return 33 if self.backend_kind == "abstract" else 1

    def validate(self) -> None:
        self.world.validate()
        if self.selector_kind not in SELECTOR_KINDS:
            raise ConfigError(
                f"selector.kind: unknown selector {self.selector_kind!r}; "
                f"valid selectors: {', '.join(SELECTOR_KINDS)}"
            )
        self.selector_params.validate()
        if self.backend_kind not in BACKEND_KINDS:
            raise ConfigError(
                f"backend.kind: unknown backend {self.backend_kind!r}; "
                f"valid backends: {', '.join(BACKEND_KINDS)}"
            )
        expected = AbstractParams if self.backend_kind == "abstract" else ActorCriticParams
        if not isinstance(self.backend_params, expected):
            raise ConfigError(f"backend: parameters do not match backend {self.backend_kind}")
        self.backend_params.validate()
        self.tracker_params.validate()
        if self.observation_mode not in OBSERVATION_MODES:
            raise ConfigError(
                f"observation_mode: must be one of {', '.join(OBSERVATION_MODES)}"
            )
        if self.total_trials < 1:
            raise ConfigError("total_trials: must be >= 1")
        if self.eval_interval < 1:
            raise ConfigError("eval_interval: must be >= 1")
        if self.resolved_eval_attempts < 1:
            raise ConfigError("eval_attempts: must be >= 1")
        if self.values_interval < 0:
            raise ConfigError("values_interval: must be >= 0")
        if not 0 <= self.seed < SEED_LIMIT:
            raise ConfigError("seed: must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return {
            "preset": self.preset,
            "world": self.world.to_dict(),
            "selector": {"kind": self.selector_kind, **asdict(self.selector_params)},
            "backend": {"kind": self.backend_kind, **asdict(self.backend_params)},
            "tracker": asdict(self.tracker_params),
            "observation_mode": self.observation_mode,
            "total_trials": self.total_trials,
            "eval_interval": self.eval_interval,
            "eval_attempts": self.resolved_eval_attempts,
            "values_interval": self.values_interval,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"


def preset(name: str) -> ExperimentConfig:
    if name == "exp1":
        return ExperimentConfig(world=exp1_world(), total_trials=4000, eval_interval=50, preset="exp1")
    if name == "exp2":
        # 1500 epochs of 4 trials; evaluate every 10 epochs. The chain needs its own
        # calibration: a sharper, warm-up corrected progress signal and faster experts
        # so that value propagated back from goal a can steer the first two picks.
        return ExperimentConfig(
            world=exp2_world(),
            selector_params=SelectorParams(alpha_v=0.05, alpha_q=0.5, gamma=0.95, tau=0.005, epsilon_floor=0.01),
            backend_params=AbstractParams(p0=0.3, p_max=0.98, eta=0.03),
            tracker_params=TrackerParams(alpha_fast=0.2, alpha_slow=0.01, clamp_negative=True, debias=True),
            total_trials=6000,
            eval_interval=40,
            preset="exp2",
        )
    raise ConfigError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}")


PRESETS = ("exp1", "exp2")

_TOP_KEYS = {
    "preset", "world", "selector", "backend", "tracker", "observation_mode",
    "total_trials", "eval_interval", "eval_attempts", "values_interval", "seed",
}


def config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    """Build a config from a parsed document; an optional ``preset`` supplies defaults."""
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown key")
    base = preset(data["preset"]) if data.get("preset") else None
    if base is None and "world" not in data:
        raise ConfigError("world: missing (give a world or a preset)")
    world = WorldConfig.from_dict(data["world"]) if "world" in data else base.world
    cfg = base or ExperimentConfig(world=world)
    cfg = replace(cfg, world=world)

    sel = dict(data.get("selector", {}))
    kind = sel.pop("kind", cfg.selector_kind)
    try:
        sel_params = replace(cfg.selector_params, **{k: float(v) for k, v in sel.items()})
    except TypeError:
        raise ConfigError(f"selector.{_first_unknown(sel, SelectorParams)}: unknown key") from None

    be = dict(data.get("backend", {}))
    backend_kind = be.pop("kind", cfg.backend_kind)
    if backend_kind not in BACKEND_KINDS:
        raise ConfigError(
            f"backend.kind: unknown backend {backend_kind!r}; valid backends: {', '.join(BACKEND_KINDS)}"
        )
    if backend_kind == cfg.backend_kind:
        # partial overrides keep the remaining preset values
        be = {**asdict(cfg.backend_params), **be}
    backend_params = params_from_dict(backend_kind, be)

    tr = dict(data.get("tracker", {}))
    try:
        tracker = replace(
            cfg.tracker_params,
            **{k: (bool(v) if k in ("clamp_negative", "debias") else float(v)) for k, v in tr.items()},
        )
    except TypeError:
        raise ConfigError(f"tracker.{_first_unknown(tr, TrackerParams)}: unknown key") from None

    try:
        cfg = replace(
            cfg,
            selector_kind=str(kind),
            selector_params=sel_params,
            backend_kind=backend_kind,
            backend_params=backend_params,
            tracker_params=tracker,
            observation_mode=str(data.get("observation_mode", cfg.observation_mode)),
            total_trials=int(data.get("total_trials", cfg.total_trials)),
            eval_interval=int(data.get("eval_interval", cfg.eval_interval)),
            eval_attempts=_opt_int(data.get("eval_attempts", cfg.eval_attempts)),
            values_interval=int(data.get("values_interval", cfg.values_interval)),
            seed=int(data.get("seed", cfg.seed)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config: {exc}") from None
    cfg.validate()
    return cfg


def _opt_int(value) -> Optional[int]:
    return None if value is None else int(value)


def _first_unknown(data: dict, cls) -> str:
    fields = set(asdict(cls()))
    return next((k for k in data if k not in fields), "?")


def load_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse a JSON config. Errors carry ``source:line:`` of the offending key."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        msg = str(exc)
        line = _locate(text, msg)
        raise ConfigError(f"{source}:{line}: {msg}") from None


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return load_config_text(text, path)


def _locate(text: str, message: str) -> int:
    """Best-effort line of the key a validation message refers to (1 if unknown)."""
    head = message.split(":", 1)[0].strip()
    names = re.findall(r"[A-Za-z_]+", head.split(" ")[0])
    for name in reversed(names):
        match = re.search(r'"%s"\s*:' % re.escape(name), text)
        if match:
            return text.count("\n", 0, match.start()) + 1
    return 1


def with_overrides(
    cfg: ExperimentConfig,
    selector: Optional[str] = None,
    backend: Optional[str] = None,
    seed: Optional[int] = None,
    eval_interval: Optional[int] = None,
) -> ExperimentConfig:
    """Apply command-line overrides; switching backend resets its parameters to defaults."""
    if selector is not None:
        cfg = replace(cfg, selector_kind=selector)
    if backend is not None and backend != cfg.backend_kind:
        if backend not in BACKEND_KINDS:
            raise ConfigError(
                f"backend.kind: unknown backend {backend!r}; valid backends: {', '.join(BACKEND_KINDS)}"
            )
        params = AbstractParams() if backend == "abstract" else ActorCriticParams()
        cfg = replace(cfg, backend_kind=backend, backend_params=params)
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    if eval_interval is not None:
        cfg = replace(cfg, eval_interval=eval_interval)
    cfg.validate()
    return cfg
