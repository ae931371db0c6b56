"""Scripted reference policies on the two memory-heavy domains.

The reacher only shows its goal in the first frame, so a random policy and a
policy that remembers the goal bracket what a learner can hope for.  The
push task has three hidden layouts; the scripted oracle probes for the bump
and pushes the right block every time.

    python demos/oracles.py
"""
import numpy as np

from rocp.envs import PushRBump, PushRBumpOracle, RandomPolicy, ReacherGoalOracle, make_env
from rocp.harness import evaluate, run_episodes, success_rate

env = make_env("reacher-pomdp", seed=0)
rng = np.random.default_rng(0)
rand = [r.ret for r in run_episodes(RandomPolicy(2), env, 20, False, rng)]
oracle = [r.ret for r in run_episodes(ReacherGoalOracle(), env, 20)]
print(f"reacher  random  mean return {np.mean(rand):8.3f}")
print(f"reacher  oracle  mean return {np.mean(oracle):8.3f}")
print(f"a learner must close half the gap: {np.mean(rand) + 0.5 * (np.mean(oracle) - np.mean(rand)):.3f}")

recs = []
mean, lo, hi = evaluate(PushRBumpOracle(), PushRBump(seed=0), 12, records=recs)
print(f"push-r-bump oracle  return mean/min/max {mean}/{lo}/{hi}, success {success_rate(recs):.0%}")
