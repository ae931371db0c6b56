"""Why sharing the recurrent trunk is cheaper, and what padding does (nothing).

One update of RSAC unrolls five LSTMs (actor, two critics, two target
critics) and backpropagates through three.  With the trunk shared between the
twin critics that drops to two unrolls and two backward sweeps.  Padding a
batch with masked steps must not change a single gradient.

    python demos/shared_trunk.py
"""
import time

import numpy as np

from rocp.agents import make_agent
from rocp.replay import Episode, pad_batch, pad_episodes

rng = np.random.default_rng(0)
eps = []
for T in (40, 25, 60):
    a = rng.uniform(-1, 1, (T + 1, 1))
    a[0] = 0
    eps.append(Episode(rng.normal(size=(T + 1, 2)), a, rng.normal(size=T), np.zeros(T)))
batch = pad_episodes(eps)

for algo in ("rsac", "rsac-share"):
    ag = make_agent(algo, 2, 1, seed=0, rnn_hidden=64, mlp_hidden=64)
    t0 = time.perf_counter()
    for _ in range(5):
        ag.update(batch)
    dt = (time.perf_counter() - t0) / 5
    c = ag.last_counts
    print(f"{algo:11s} forward unrolls {c['rnn_forward']}, backward sweeps {c['bptt']}, {dt * 1e3:6.1f} ms/update")

# same agent, same update, 30 extra padded steps
grads = []
for b in (batch, pad_batch(batch, batch.max_length + 30)):
    ag = make_agent("rsac", 2, 1, seed=3, rnn_hidden=32, mlp_hidden=32)
    ag.grad_log = {}
    ag.update(b)
    grads.append(ag.grad_log)
worst = max(np.max(np.abs(grads[0][k] - grads[1][k])) for k in grads[0])
print(f"largest gradient change from padding: {worst:.1e}")
