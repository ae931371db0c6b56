"""Command line front end: ``rocp train|eval|diag``."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from ..agents import ALGORITHMS, make_agent
from ..envs import ENV_NAMES
from ..replay import EpisodeBuffer, Episode
from .config import RunConfig, parse_kv_lines, read_config_file
from .diagnostics import pca_project, twin_q_diagnostic
from .evaluation import evaluate, run_episodes
from .train import train_run


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--env", choices=ENV_NAMES, default=None)
    common.add_argument("--variant", choices=("full", "p", "v"), default=None)
    common.add_argument("--algo", choices=ALGORITHMS, default=None)
    common.add_argument("--cell", choices=("vrnn", "lstm", "gru"), default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--steps", type=int, default=None, help="total environment steps")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--config", default=None, help="key=value file; --set wins over it")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any agent, run or env.* setting (repeatable)")
    common.add_argument("--episodes", type=int, default=10, help="episodes for eval/diag")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="rocp", description="Recurrent off-policy control benchmarks")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("train", parents=[common], help="train an agent and write runlog.csv")
    sub.add_parser("eval", parents=[common], help="evaluate a checkpoint deterministically")
    sub.add_parser("diag", parents=[common], help="twin-critic correlation and hidden-state PCA")
    return p


def _settings(args) -> dict:
    """Merge config file, checkpoint metadata and flags (later wins)."""
    s = {}
    if args.command != "train" and args.out:
        meta = Path(args.out) / "checkpoint.meta"
        if meta.exists():
            s.update(read_config_file(meta))
    if args.config:
        s.update(read_config_file(args.config))
    s.update(parse_kv_lines(args.set))
    for key in ("env", "variant", "algo", "cell", "seed"):
        v = getattr(args, key)
        if v is not None:
            s[key] = str(v)
    if args.steps is not None:
        s["total_steps"] = str(args.steps)
    return s


def _run_config(args) -> RunConfig:
    s = _settings(args)
    for k in ("step", "obs_dim", "act_dim"):
        s.pop(k, None)
    overrides = {}
    for k, v in s.items():
        if k.startswith("set."):
            overrides.setdefault(k[4:], v)
    kw = dict(env=s.pop("env", "pendulum"), algo=s.pop("algo", "sac"), seed=int(s.pop("seed", 0)))
    variant = s.pop("variant", None)
    kw["variant"] = None if variant in (None, "full") else variant
    for k, v in s.items():
        if not k.startswith("set."):
            overrides[k] = v
    if "total_steps" not in overrides:
        overrides["total_steps"] = "100000"
    return RunConfig(out_dir=args.out, overrides=overrides, **kw)


def _load_agent(cfg: RunConfig, out: str):
    env = cfg.make_env(seed=0)
    agent = make_agent(cfg.algo, env.spec.obs_dim, env.spec.act_dim, cfg.agent_config(), seed=0)
    agent.load(Path(out) / "checkpoint.rocp")
    return agent


def cmd_train(args) -> int:
    cfg = _run_config(args)
    log = train_run(cfg)
    last = log.rows[-1] if log.rows else None
    if last:
        print(f"step {last['step']}: return {last['return_mean']:.3f} "
              f"[{last['return_min']:.3f}, {last['return_max']:.3f}]")
    if cfg.out_dir:
        print(f"wrote {Path(cfg.out_dir) / 'runlog.csv'}")
    return 0


def cmd_eval(args) -> int:
    if not args.out:
        print("eval needs --out pointing at a training output directory", file=sys.stderr)
        return 2
    cfg = _run_config(args)
    agent = _load_agent(cfg, args.out)
    env = cfg.make_env(seed=np.random.SeedSequence(cfg.seed).spawn(1)[0])
    mean, lo, hi = evaluate(agent, env, args.episodes)
    print(f"return mean {mean!r} min {lo!r} max {hi!r} over {args.episodes} episodes")
    return 0


def cmd_diag(args) -> int:
    """Roll out deterministic episodes, then report twin-critic agreement on
    them and write the PCA projection of the actor's hidden states."""
    if not args.out:
        print("diag needs --out pointing at a training output directory", file=sys.stderr)
        return 2
    cfg = _run_config(args)
    agent = _load_agent(cfg, args.out)
    env = cfg.make_env(seed=np.random.SeedSequence(cfg.seed).spawn(1)[0])
    policy = agent.make_policy(record_states=agent.recurrent)
    states = []
    buffer = EpisodeBuffer()
    for rec in run_episodes(policy, env, args.episodes, record=True):
        states.extend(policy.states)
        act = np.vstack([np.zeros(env.spec.act_dim)] + rec.actions)
        buffer.push(Episode(np.array(rec.observations), act, rec.rewards,
                            np.zeros(len(rec.rewards))))
    if agent.n_critics == 2:
        from ..replay import pad_episodes
        r, m1, m2 = twin_q_diagnostic(agent, pad_episodes(list(buffer.episodes)), None)
        print(f"pearson_r {r!r} q1_mean {m1!r} q2_mean {m2!r}")
    if states:
        Z = pca_project(np.array(states), 3)
        path = Path(args.out) / "pca.csv"
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow([f"pc{i + 1}" for i in range(Z.shape[1])])
            w.writerows([[repr(float(v)) for v in row] for row in Z])
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        return {"train": cmd_train, "eval": cmd_eval, "diag": cmd_diag}[args.command](args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
