from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from ..agents import AgentConfig
from ..agents.config import coerce
from ..envs import make_env, parse_env_name

RUN_KEYS = ("total_steps", "warmup_steps", "eval_every", "eval_episodes")


@dataclass
class RunConfig:
    env: str = "pendulum"
    variant: str | None = None
    algo: str = "sac"
    seed: int = 0
    total_steps: int = 100_000
    warmup_steps: int | None = None  # None -> 1000, or 10000 for recurrent agents
    eval_every: int = 1000
    eval_episodes: int = 10
    out_dir: str | Path | None = None
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        self.overrides = {str(k): v for k, v in self.overrides.items()}
        for key in RUN_KEYS:
            if key in self.overrides:
                setattr(self, key, int(coerce(str(self.overrides.pop(key)), "int")))
        parse_env_name(self.env, self.variant)
        self.agent_config()  # validates algo and agent overrides
        if self.warmup_steps is None:
            self.warmup_steps = 10_000 if self.agent_config().recurrent else 1000
        if self.total_steps <= 0 or self.eval_every <= 0:
            raise ValueError("total_steps and eval_every must be positive")
        if not 0 <= self.warmup_steps < self.total_steps:
            raise ValueError(f"warmup_steps ({self.warmup_steps}) must be below total_steps "
                             f"({self.total_steps})")
        if self.eval_episodes < 1:
            raise ValueError("eval_episodes must be at least 1")

    def agent_config(self) -> AgentConfig:
        agent_keys = {k: v for k, v in self.overrides.items() if not k.startswith("env.")}
        unknown = set(agent_keys) - AgentConfig.field_names()
        if unknown:
            raise ValueError(f"unknown override(s): {', '.join(sorted(unknown))}")
        return AgentConfig(algo=self.algo).with_overrides(agent_keys)

    def env_overrides(self) -> dict:
        out = {}
        for k, v in self.overrides.items():
            if k.startswith("env."):
                out[k[4:]] = _guess(v)
        return out

    def make_env(self, seed=None):
        return make_env(self.env, self.variant, seed=seed, **self.env_overrides())

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def _guess(raw):
    if not isinstance(raw, str):
        return raw
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    for kind in (int, float):
        try:
            return kind(raw)
        except ValueError:
            pass
    return raw


def parse_kv_lines(lines) -> dict:
    """``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected key=value, got {line!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def read_config_file(path) -> dict:
    with open(path, encoding="utf-8") as f:
        return parse_kv_lines(f)
