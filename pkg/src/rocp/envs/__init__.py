"""Partially observable continuous-control domains."""
from __future__ import annotations

from .base import (Env, EnvSpec, EnvUsageError, ObservabilityVariant, StepResult, VariantEnv,
                   apply_variant, dump_trajectory, make_rng)
from .cartpole import CartPole
from .pendulum import Pendulum, wrap_angle
from .push_r_bump import CASES, SLOT_X, PushRBump, case_assignment
from .reacher import ReacherPOMDP
from .scripted import ConstantPolicy, PushRBumpOracle, RandomPolicy, ReacherGoalOracle
from .watermaze import Watermaze

_BASE = {
    "pendulum": (Pendulum, {}),
    "cartpole-balance": (CartPole, {"swingup": False}),
    "cartpole-swingup": (CartPole, {"swingup": True}),
    "reacher-pomdp": (ReacherPOMDP, {}),
    "watermaze": (Watermaze, {}),
    "push-r-bump": (PushRBump, {}),
}

ENV_NAMES = tuple(_BASE) + tuple(f"{n}-{v}" for n in ("pendulum", "cartpole-balance",
                                                          "cartpole-swingup") for v in "pv")


def parse_env_name(name: str, variant=None) -> tuple[str, ObservabilityVariant]:
    """Split ``pendulum-p`` style names into (base name, variant)."""
    if name in _BASE:
        base, var = name, ObservabilityVariant.FULL
    elif name[-2:] in ("-p", "-v") and name[:-2] in _BASE:
        base, var = name[:-2], ObservabilityVariant.parse(name[-1])
    else:
        raise ValueError(f"unknown environment {name!r}; choose from {', '.join(ENV_NAMES)}")
    if variant is not None:
        explicit = ObservabilityVariant.parse(variant)
        if explicit is not ObservabilityVariant.FULL:
            if var is not ObservabilityVariant.FULL and var is not explicit:
                raise ValueError(f"{name!r} conflicts with variant {explicit.value!r}")
            var = explicit
    return base, var


def make_env(name: str, variant=None, seed=None, **overrides) -> Env:
    base, var = parse_env_name(name, variant)
    cls, kwargs = _BASE[base]
    env = cls(seed, **{**kwargs, **overrides})
    if var is ObservabilityVariant.FULL:
        return env
    return VariantEnv(env, var)


__all__ = [
    "CASES", "CartPole", "ConstantPolicy", "ENV_NAMES", "Env", "EnvSpec", "EnvUsageError",
    "ObservabilityVariant", "Pendulum", "PushRBump", "PushRBumpOracle", "RandomPolicy",
    "ReacherGoalOracle", "ReacherPOMDP", "SLOT_X", "StepResult", "VariantEnv", "Watermaze",
    "apply_variant", "case_assignment", "dump_trajectory", "make_env", "make_rng",
    "parse_env_name", "wrap_angle",
]
