"""Interleaved acting / updating with periodic deterministic evaluation."""
from __future__ import annotations

import logging
import time
from pathlib import Path

import numpy as np

from ..agents import make_agent
from ..nn import NumericError
from ..replay import Episode, EpisodeBuffer, TransitionBuffer
from .config import RunConfig
from .diagnostics import UndefinedValueError, twin_q_diagnostic
from .evaluation import evaluate
from .runlog import RunLog

log = logging.getLogger(__name__)

SEED_STREAMS = ("env", "eval_env", "agent", "act", "replay", "diag")


def seed_streams(seed: int) -> dict[str, np.random.SeedSequence]:
    """Independent child seeds for each source of randomness in a run."""
    return dict(zip(SEED_STREAMS, np.random.SeedSequence(seed).spawn(len(SEED_STREAMS))))


def _rng(ss) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(ss))


def _nanmean(xs) -> float:
    xs = [x for x in xs if not np.isnan(x)]
    return float(np.mean(xs)) if xs else float("nan")


def write_checkpoint(agent, cfg: RunConfig, step: int, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    agent.save(out / "checkpoint.rocp")
    meta = {"algo": cfg.algo, "env": cfg.env, "variant": cfg.variant or "full", "step": step,
            "seed": cfg.seed, "obs_dim": agent.obs_dim, "act_dim": agent.act_dim}
    meta.update({f"set.{k}": v for k, v in sorted(cfg.overrides.items())})
    with open(out / "checkpoint.meta", "w", encoding="utf-8") as f:
        for k, v in meta.items():
            f.write(f"{k}={v}\n")
    return out / "checkpoint.rocp"


def train_run(cfg: RunConfig, on_eval=None, agent=None) -> RunLog:
    """Run ``cfg`` to completion and return its log.

    ``on_eval(step, row, agent, runlog)`` is called after each log row; a
    truthy return stops training early (the row and checkpoint are kept).
    """
    seeds = seed_streams(cfg.seed)
    env = cfg.make_env(seed=seeds["env"])
    eval_env = cfg.make_env(seed=seeds["eval_env"])
    spec = env.spec
    if agent is None:
        agent = make_agent(cfg.algo, spec.obs_dim, spec.act_dim, cfg.agent_config(), seed=seeds["agent"])
    act_rng, replay_rng, diag_rng = _rng(seeds["act"]), _rng(seeds["replay"]), _rng(seeds["diag"])
    acfg = agent.config
    if agent.recurrent:
        if cfg.warmup_steps < spec.max_episode_length:
            raise ValueError("recurrent runs need warmup_steps >= the episode horizon so that "
                             "an episode is stored before the first update")
        buffer = EpisodeBuffer(acfg.episode_capacity)
    else:
        if cfg.warmup_steps < 1:
            raise ValueError("warmup_steps must be at least 1")
        buffer = TransitionBuffer(spec.obs_dim, spec.act_dim, acfg.transition_capacity)

    runlog = RunLog()
    csv_path = None
    if cfg.out_dir is not None:
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        csv_path = Path(cfg.out_dir) / "runlog.csv"

    policy = agent.make_policy()
    obs = env.reset()
    prev = np.zeros(spec.act_dim)
    ep_obs, ep_act, ep_rew, ep_done = [obs], [prev], [], []
    stats = []
    loop_time = 0.0
    step = 0
    try:
        for step in range(1, cfg.total_steps + 1):
            t0 = time.perf_counter()
            if step <= cfg.warmup_steps:
                a = act_rng.uniform(-1.0, 1.0, spec.act_dim)
                if agent.recurrent:
                    policy.act(obs, prev, True)  # keep the acting state in sync
            else:
                a = policy.act(obs, prev, False, act_rng)
            res = env.step(a)
            a = np.clip(a, -1.0, 1.0)
            # a horizon cut is not a terminal state: keep bootstrapping
            terminal = float(res.done and not res.info.get("timeout", False))
            if agent.recurrent:
                ep_obs.append(res.observation)
                ep_act.append(a)
                ep_rew.append(res.reward)
                ep_done.append(terminal)
            else:
                buffer.push(obs, a, res.reward, res.observation, terminal)
            obs, prev = res.observation, a
            if res.done:
                if agent.recurrent:
                    buffer.push(Episode(np.array(ep_obs), np.array(ep_act), ep_rew, ep_done))
                obs = env.reset()
                prev = np.zeros(spec.act_dim)
                policy.reset()
                ep_obs, ep_act, ep_rew, ep_done = [obs], [prev], [], []

            if step > cfg.warmup_steps:
                batch = buffer.sample(acfg.batch_episodes if agent.recurrent else acfg.batch_transitions,
                                      replay_rng)
                stats.append(agent.update(batch))
                runlog.updates += 1
            loop_time += time.perf_counter() - t0

            if step % cfg.eval_every == 0:
                records = []
                mean, lo, hi = evaluate(agent, eval_env, cfg.eval_episodes, records=records)
                runlog.final_eval = records
                row = dict(step=step, return_mean=mean, return_min=lo, return_max=hi,
                           q1_mean=float("nan"), q2_mean=float("nan"), pearson_r=float("nan"),
                           critic_loss=float("nan"), actor_obj=float("nan"), alpha=float("nan"),
                           wall_clock_s=loop_time)
                if stats:
                    row["critic_loss"] = _nanmean([s["critic_loss"] for s in stats])
                    row["actor_obj"] = _nanmean([s["actor_obj"] for s in stats])
                    row["alpha"] = stats[-1]["alpha"]
                    row.update(_critic_stats(agent, buffer, diag_rng))
                stats = []
                runlog.append(**row)
                if csv_path is not None:
                    runlog.write_csv(csv_path)
                log.info("step %d return %.3f", step, mean)
                if on_eval is not None and on_eval(step, row, agent, runlog):
                    break
    except NumericError as exc:
        runlog.aborted = f"step {step}: {exc}"
        if csv_path is not None:
            runlog.write_csv(csv_path)
        raise
    if cfg.out_dir is not None:
        write_checkpoint(agent, cfg, step, cfg.out_dir)
    runlog.agent = agent
    return runlog


def _critic_stats(agent, buffer, rng) -> dict:
    if agent.n_critics < 2:
        batch = buffer.sample(10, rng) if isinstance(buffer, EpisodeBuffer) else buffer.sample(1000, rng)
        (q1,), mask = agent.critic_values(batch)
        return {"q1_mean": float(q1[mask].mean())}
    if isinstance(buffer, EpisodeBuffer) and len(buffer) < 10:
        return {}
    try:
        r, m1, m2 = twin_q_diagnostic(agent, buffer, rng)
    except UndefinedValueError:
        (q1, q2), mask = agent.critic_values(buffer.sample(10, rng) if isinstance(buffer, EpisodeBuffer)
                                            else buffer.sample(1000, rng))
        return {"q1_mean": float(q1[mask].mean()), "q2_mean": float(q2[mask].mean())}
    return {"pearson_r": r, "q1_mean": m1, "q2_mean": m2}
