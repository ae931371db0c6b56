from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class EnvUsageError(RuntimeError):
    pass


@dataclass(frozen=True)
class EnvSpec:
    obs_dim: int
    act_dim: int
    max_episode_length: int

    @property
    def action_low(self) -> np.ndarray:
        return -np.ones(self.act_dim)

    @property
    def action_high(self) -> np.ndarray:
        return np.ones(self.act_dim)


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    done: bool
    info: dict = field(default_factory=dict)


class ObservabilityVariant(enum.Enum):
    FULL = "full"
    POSITION_ONLY = "p"
    VELOCITY_ONLY = "v"

    @classmethod
    def parse(cls, value) -> "ObservabilityVariant":
        if isinstance(value, cls):
            return value
        aliases = {"full": "full", "": "full", "p": "p", "position_only": "p",
                   "v": "v", "velocity_only": "v"}
        return cls(aliases[str(value).lower()])


def make_rng(seed) -> np.random.Generator:
    """Counter-based (Philox) generator; accepts ints or SeedSequences."""
    return np.random.Generator(np.random.Philox(seed))


class Env:
    """Base class: subclasses set ``spec`` and implement ``_reset``/``_step``.

    Actions live in [-1, 1]^act_dim and are clamped before ``_step`` sees
    them.  Episodes end after ``spec.max_episode_length`` steps at the
    latest; a horizon cut is flagged with ``info["timeout"] = True`` so that
    learners can keep bootstrapping through it.
    """

    spec: EnvSpec
    # indices into the full observation; None means no variants exist
    position_idx: Sequence[int] | None = None
    velocity_idx: Sequence[int] | None = None

    def __init__(self, seed=None):
        self.rng = make_rng(seed)
        self.t = 0
        self._done = True

    def reset(self, seed=None) -> np.ndarray:
        if seed is not None:
            self.rng = make_rng(seed)
        self.t = 0
        self._done = False
        return np.asarray(self._reset(), dtype=np.float64)

    def step(self, action) -> StepResult:
        if self._done:
            raise EnvUsageError("step() called on a finished episode; call reset()")
        a = np.clip(np.asarray(action, dtype=np.float64).reshape(self.spec.act_dim), -1.0, 1.0)
        obs, reward, terminal, info = self._step(a)
        self.t += 1
        done = bool(terminal)
        if not done and self.t >= self.spec.max_episode_length:
            done = True
            info["timeout"] = True
        self._done = done
        return StepResult(np.asarray(obs, dtype=np.float64), float(reward), done, info)

    def _reset(self) -> np.ndarray:
        raise NotImplementedError

    def _step(self, a: np.ndarray):
        raise NotImplementedError


def apply_variant(obs_full: np.ndarray, variant, prev_action, env: Env) -> np.ndarray:
    """Strip velocity (position_only) or position entries (velocity_only).

    velocity_only observations get the previous action appended.
    """
    variant = ObservabilityVariant.parse(variant)
    if variant is ObservabilityVariant.FULL:
        return obs_full
    if env.position_idx is None:
        raise EnvUsageError(f"{type(env).__name__} has no observability variants")
    if variant is ObservabilityVariant.POSITION_ONLY:
        return obs_full[list(env.position_idx)]
    prev = np.asarray(prev_action, dtype=np.float64).reshape(env.spec.act_dim)
    return np.concatenate([obs_full[list(env.velocity_idx)], prev])


class VariantEnv(Env):
    """Wraps a fully observed env and serves one observability variant."""

    def __init__(self, env: Env, variant):
        self.env = env
        self.variant = ObservabilityVariant.parse(variant)
        if self.variant is not ObservabilityVariant.FULL and env.position_idx is None:
            raise EnvUsageError(f"{type(env).__name__} has no observability variants")
        inner = env.spec
        if self.variant is ObservabilityVariant.POSITION_ONLY:
            obs_dim = len(env.position_idx)
        elif self.variant is ObservabilityVariant.VELOCITY_ONLY:
            obs_dim = len(env.velocity_idx) + inner.act_dim
        else:
            obs_dim = inner.obs_dim
        self.spec = EnvSpec(obs_dim, inner.act_dim, inner.max_episode_length)
        self._prev = np.zeros(inner.act_dim)

    @property
    def rng(self):
        return self.env.rng

    @property
    def t(self):
        return self.env.t

    def reset(self, seed=None) -> np.ndarray:
        self._prev = np.zeros(self.spec.act_dim)
        return apply_variant(self.env.reset(seed), self.variant, self._prev, self.env)

    def step(self, action) -> StepResult:
        res = self.env.step(action)
        self._prev = np.clip(np.asarray(action, dtype=np.float64).reshape(self.spec.act_dim), -1, 1)
        res.info["full_observation"] = res.observation
        res.observation = apply_variant(res.observation, self.variant, self._prev, self.env)
        return res


def dump_trajectory(path, observations, actions, rewards, dones) -> None:
    """CSV with columns t, obs[*], act[*], reward, done (one row per step)."""
    observations = np.asarray(observations)
    actions = np.asarray(actions)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t"] + [f"obs[{i}]" for i in range(observations.shape[1])]
                   + [f"act[{i}]" for i in range(actions.shape[1])] + ["reward", "done"])
        for t, (o, a, r, d) in enumerate(zip(observations, actions, rewards, dones)):
            w.writerow([t] + [repr(float(v)) for v in o] + [repr(float(v)) for v in a]
                       + [repr(float(r)), int(bool(d))])
