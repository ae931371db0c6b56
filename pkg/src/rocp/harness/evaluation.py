from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class EpisodeRecord:
    ret: float
    length: int
    infos: list = field(default_factory=list)
    observations: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    dones: list = field(default_factory=list)


def run_episode(policy, env, deterministic: bool = True, rng=None, record: bool = False) -> EpisodeRecord:
    """Roll out one episode; ``policy`` follows the reset()/act() protocol."""
    policy.reset()
    obs = env.reset()
    prev = np.zeros(env.spec.act_dim)
    rec = EpisodeRecord(0.0, 0)
    if record:
        rec.observations.append(obs)
    done = False
    while not done:
        a = np.asarray(policy.act(obs, prev, deterministic, rng), dtype=np.float64)
        res = env.step(a)
        rec.ret += res.reward
        rec.length += 1
        rec.infos.append(res.info)
        if record:
            rec.observations.append(res.observation)
            rec.actions.append(np.clip(a, -1, 1))
            rec.rewards.append(res.reward)
            rec.dones.append(res.done)
        obs, prev, done = res.observation, np.clip(a, -1, 1), res.done
    return rec


def run_episodes(policy, env, n: int = 10, deterministic: bool = True, rng=None,
                 record: bool = False) -> list[EpisodeRecord]:
    return [run_episode(policy, env, deterministic, rng, record) for _ in range(n)]


def summarize(records) -> tuple[float, float, float]:
    rets = np.array([r.ret for r in records], dtype=np.float64)
    return float(rets.mean()), float(rets.min()), float(rets.max())


def evaluate(agent, env, n: int = 10, rng=None, records: list | None = None) -> tuple[float, float, float]:
    """Undiscounted (mean, min, max) return over ``n`` deterministic episodes.

    ``agent`` is anything with ``make_policy()`` (a fresh acting state is
    used, so training state is untouched) or a bare reset()/act() policy.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    policy = agent.make_policy() if hasattr(agent, "make_policy") else agent
    recs = run_episodes(policy, env, n, deterministic=True, rng=rng)
    if records is not None:
        records[:] = recs
    return summarize(recs)


def success_rate(records) -> float:
    """Fraction of episodes whose final reward is +1 (push-r-bump)."""
    return float(np.mean([1.0 if r.infos and r.infos[-1].get("success") else 0.0 for r in records]))


def upright_fraction(record: EpisodeRecord, threshold_deg: float = 30.0) -> float:
    """Share of steps with the pendulum within ``threshold_deg`` of upright."""
    from ..envs import wrap_angle
    th = np.array([wrap_angle(i["theta"]) for i in record.infos])
    return float(np.mean(np.abs(th) <= np.deg2rad(threshold_deg)))
