"""Twin-critic agreement and hidden-state projections."""
from __future__ import annotations

import warnings

import numpy as np

from ..replay import EpisodeBuffer, TransitionBuffer


class UndefinedValueError(ValueError):
    """A statistic is undefined for the given data (e.g. zero variance)."""


def pearson_r(xs, ys) -> float:
    x = np.asarray(xs, dtype=np.float64).reshape(-1)
    y = np.asarray(ys, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise UndefinedValueError("pearson_r needs at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = np.sum(dx * dx)
    syy = np.sum(dy * dy)
    if sxx == 0 or syy == 0:
        raise UndefinedValueError("pearson_r undefined: zero variance")
    r = np.sum(dx * dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def twin_q_diagnostic(agent, buffer, rng: np.random.Generator, n_episodes: int = 10,
                      n_transitions: int = 1000) -> tuple[float, float, float]:
    """(r, mean Q1, mean Q2) over critic outputs on replayed data.

    Recurrent agents unroll over ``n_episodes`` sampled episodes and use
    every unmasked step; feed-forward agents use ``n_transitions`` sampled
    transitions.
    """
    if agent.n_critics < 2:
        raise ValueError("twin_q_diagnostic needs a twin-critic agent")
    if isinstance(buffer, EpisodeBuffer):
        if len(buffer) < n_episodes:
            raise ValueError(f"need {n_episodes} stored episodes, have {len(buffer)}")
        batch = buffer.sample(n_episodes, rng)
    elif isinstance(buffer, TransitionBuffer):
        batch = buffer.sample(n_transitions, rng)
    else:
        batch = buffer
    (q1, q2), mask = agent.critic_values(batch)
    q1, q2 = q1[mask], q2[mask]
    return pearson_r(q1, q2), float(q1.mean()), float(q2.mean())


def pca_project(states, k: int = 3, return_variance: bool = False):
    """Project rows of ``states`` (N x D) onto the top-``k`` principal axes.

    Axes come from the eigendecomposition of the sample covariance, sorted
    by decreasing eigenvalue; each axis is signed so that its largest-
    magnitude entry is positive.  If the data have rank < k, only the
    non-degenerate axes are returned (with a warning).
    """
    X = np.asarray(states, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("states must be N x D")
    N, D = X.shape
    if N <= k:
        raise ValueError(f"need more than k={k} points, got {N}")
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ Xc / (N - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    tol = max(evals[0], 0.0) * D * np.finfo(np.float64).eps
    rank = int(np.sum(evals > tol))
    if rank < k:
        warnings.warn(f"data rank {rank} < k={k}; returning {rank} components", RuntimeWarning)
        k = rank
    W = evecs[:, :k]
    pivots = np.argmax(np.abs(W), axis=0)
    W = W * np.sign(W[pivots, np.arange(k)])
    Z = Xc @ W
    if return_variance:
        total = float(np.sum(np.clip(evals, 0, None)))
        return Z, evals[:k] / total if total > 0 else evals[:k]
    return Z
