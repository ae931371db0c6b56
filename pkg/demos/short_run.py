"""A short end-to-end run: train, read the log, look at the memory.

Trains a small RSAC-Share agent on the velocity-only pendulum for a few
thousand steps (a few minutes), then prints the run log, the twin
critic correlation and a 3-d PCA of the LSTM states seen during one
evaluation episode.  Far too short to learn the swing-up; the point is the
plumbing.

    python demos/short_run.py [out_dir]
"""
import sys

import numpy as np

from rocp.harness import RunConfig, pca_project, run_episode, train_run

out = sys.argv[1] if len(sys.argv) > 1 else "runs/demo"
cfg = RunConfig(env="pendulum-v", algo="rsac-share", seed=0, total_steps=3000, warmup_steps=1000,
                eval_every=500, eval_episodes=3, out_dir=out,
                overrides={"rnn_hidden": "32", "mlp_hidden": "64", "batch_episodes": "4"})
log = train_run(cfg)

print(f"{'step':>6} {'return':>9} {'pearson_r':>9} {'critic_loss':>11} {'alpha':>7}")
for row in log.rows:
    print(f"{row['step']:6d} {row['return_mean']:9.1f} {row['pearson_r']:9.3f} "
          f"{row['critic_loss']:11.3f} {row['alpha']:7.3f}")

policy = log.agent.make_policy(record_states=True)
env = cfg.make_env(seed=99)
rec = run_episode(policy, env)
proj, var = pca_project(np.array(policy.states), 3, return_variance=True)
print(f"PCA of {len(policy.states)} hidden states: explained variance {np.round(var, 3)}")
print(f"run log and checkpoint written to {out}/")
