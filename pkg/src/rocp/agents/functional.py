"""Stateless pieces of the update rules: Bellman targets, target smoothing,
the tanh-squashed Gaussian and the temperature gradient."""
from __future__ import annotations

import numpy as np

from ..nn import Tape, Tensor

LOG_2PI = float(np.log(2.0 * np.pi))
TANH_EPS = 1e-6


def ddpg_target(r, d, q_next, gamma: float):
    """r + gamma (1 - d) Q_targ(s', mu_targ(s'))."""
    return r + gamma * (1.0 - d) * q_next


def clipped_double_q_target(r, d, q1_next, q2_next, gamma: float):
    return r + gamma * (1.0 - d) * np.minimum(q1_next, q2_next)


def soft_target(r, d, q1_next, q2_next, logp_next, alpha: float, gamma: float):
    return r + gamma * (1.0 - d) * (np.minimum(q1_next, q2_next) - alpha * logp_next)


def target_smoothing_noise(eps: np.ndarray, sigma: float, clip: float) -> np.ndarray:
    """Standard normal draws scaled by ``sigma`` and clipped to [-clip, clip]."""
    return np.clip(sigma * eps, -clip, clip)


def smoothed_target_action(mu_next: np.ndarray, eps: np.ndarray, sigma: float, clip: float):
    return np.clip(mu_next + target_smoothing_noise(eps, sigma, clip), -1.0, 1.0)


def squashed_gaussian(mean: Tensor, log_std: Tensor, tape: Tape, rng=None, noise=None):
    """Reparameterised sample a = tanh(mean + std * eps) and its log-density.

    log_std must already be clamped.  ``noise`` fixes eps (same shape as
    mean); otherwise it is drawn from ``rng``.  Returns (action, log_prob)
    with log_prob summed over the last axis, keepdims.
    """
    eps = rng.standard_normal(mean.shape) if noise is None else np.asarray(noise)
    std = tape.exp(log_std)
    u = tape.add(mean, tape.mul(std, tape.const(eps)))
    a = tape.tanh(u)
    # log N(u; mean, std) with u - mean = std * eps
    gauss = tape.shift(tape.neg(log_std), -0.5 * eps * eps - 0.5 * LOG_2PI)
    corr = tape.log(tape.shift(tape.neg(tape.square(a)), 1.0 + TANH_EPS))
    logp = tape.sum(tape.sub(gauss, corr), axis=-1, keepdims=True)
    return a, logp


def alpha_gradient(logp: np.ndarray, target_entropy: float, weights: np.ndarray) -> float:
    """d/d(log alpha) of -log(alpha) * E_w[logp + target_entropy]."""
    return -float(np.sum(weights * (logp + target_entropy)))
