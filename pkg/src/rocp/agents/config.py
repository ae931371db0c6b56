from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Mapping

ALGORITHMS = ("ddpg", "td3", "sac", "rdpg", "rtd3", "rsac", "rsac-share")


@dataclass
class AgentConfig:
    algo: str = "sac"
    gamma: float = 0.99
    lr: float = 3e-4
    polyak: float = 0.995
    action_noise: float = 0.1
    target_noise: float = 0.5
    noise_clip: float = 0.2
    policy_delay: int = 2
    alpha_init: float = 1.0
    auto_alpha: bool = True
    target_entropy: float | None = None  # None -> -act_dim
    cell: str = "lstm"
    rnn_hidden: int = 256
    rnn_layers: int = 2
    mlp_hidden: int = 256
    batch_transitions: int = 100
    batch_episodes: int = 10
    transition_capacity: int = 1_000_000
    episode_capacity: int = 5000
    log_std_min: float = -20.0
    log_std_max: float = 2.0
    share_rnn: bool = False

    def __post_init__(self):
        self.algo = self.algo.lower()
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}; choose from {', '.join(ALGORITHMS)}")
        if self.algo == "rsac-share":
            self.share_rnn = True
        if not (0 < self.gamma < 1 and 0 < self.polyak < 1):
            raise ValueError("gamma and polyak must lie in (0, 1)")
        for name in ("lr", "action_noise", "target_noise", "noise_clip", "policy_delay",
                     "rnn_hidden", "rnn_layers", "mlp_hidden", "batch_transitions",
                     "batch_episodes", "transition_capacity", "episode_capacity"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.alpha_init < 0:
            raise ValueError("alpha_init must be non-negative")

    @property
    def family(self) -> str:
        return {"rdpg": "ddpg", "rtd3": "td3", "rsac": "sac", "rsac-share": "sac"}.get(self.algo, self.algo)

    @property
    def recurrent(self) -> bool:
        return self.algo.startswith("r")

    @classmethod
    def field_names(cls) -> set[str]:
        return {f.name for f in dataclasses.fields(cls)}

    def with_overrides(self, overrides: Mapping[str, str]) -> "AgentConfig":
        """Copy with ``key=value`` strings applied; unknown keys are ignored."""
        kinds = {f.name: f.type for f in dataclasses.fields(self)}
        changes = {}
        for key, raw in overrides.items():
            if key in kinds:
                changes[key] = coerce(raw, kinds[key])
        return dataclasses.replace(self, **changes)


def coerce(raw, kind: str):
    if not isinstance(raw, str):
        return raw
    kind = str(kind)
    if raw.lower() in ("none", "null") and "None" in kind:
        return None
    if kind.startswith("bool"):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind.startswith("int"):
        return int(float(raw)) if "e" in raw.lower() else int(raw)
    if kind.startswith("float"):
        return float(raw)
    return raw
