"""Transition replay for feed-forward agents, episode replay with zero
padding and masks for recurrent ones."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class EmptyBufferError(RuntimeError):
    pass


class Transition(NamedTuple):
    s: np.ndarray
    a: np.ndarray
    r: float
    s_next: np.ndarray
    d: float


@dataclass
class TransitionBatch:
    obs: np.ndarray        # (M, obs_dim)
    act: np.ndarray        # (M, act_dim)
    rew: np.ndarray        # (M,)
    next_obs: np.ndarray   # (M, obs_dim)
    done: np.ndarray       # (M,)

    def __len__(self):
        return len(self.rew)


class TransitionBuffer:
    """FIFO ring of (s, a, r, s', d); oldest entries are overwritten first."""

    def __init__(self, obs_dim: int, act_dim: int, capacity: int = 1_000_000):
        self.capacity = int(capacity)
        self.obs = np.zeros((self.capacity, obs_dim))
        self.next_obs = np.zeros((self.capacity, obs_dim))
        self.act = np.zeros((self.capacity, act_dim))
        self.rew = np.zeros(self.capacity)
        self.done = np.zeros(self.capacity)
        self.ptr = 0
        self.size = 0

    def __len__(self):
        return self.size

    def push(self, obs, act, rew, next_obs, done) -> None:
        if done not in (0, 1, True, False):
            raise ValueError(f"done flag must be 0 or 1, got {done!r}")
        i = self.ptr
        self.obs[i] = obs
        self.act[i] = act
        self.rew[i] = rew
        self.next_obs[i] = next_obs
        self.done[i] = float(done)
        self.ptr = (self.ptr + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int = 100, rng: np.random.Generator | None = None) -> TransitionBatch:
        """Uniform, with replacement."""
        if self.size == 0:
            raise EmptyBufferError("cannot sample from an empty transition buffer")
        idx = rng.integers(0, self.size, size=batch_size)
        return TransitionBatch(self.obs[idx], self.act[idx], self.rew[idx],
                               self.next_obs[idx], self.done[idx])


@dataclass
class Episode:
    """o_1..o_{T+1}, a_0..a_T (a_0 is the zero dummy), r_1..r_T, d_1..d_T."""

    obs: np.ndarray   # (T+1, obs_dim)
    act: np.ndarray   # (T+1, act_dim)
    rew: np.ndarray   # (T,)
    done: np.ndarray  # (T,)

    def __post_init__(self):
        self.obs = np.asarray(self.obs, dtype=np.float64)
        self.act = np.asarray(self.act, dtype=np.float64)
        self.rew = np.asarray(self.rew, dtype=np.float64).reshape(-1)
        self.done = np.asarray(self.done, dtype=np.float64).reshape(-1)
        T = len(self.rew)
        if T < 1:
            raise ValueError("episode must contain at least one transition")
        if self.obs.ndim != 2 or self.obs.shape[0] != T + 1:
            raise ValueError(f"obs must have T+1={T + 1} rows, got {self.obs.shape}")
        if self.act.ndim != 2 or self.act.shape[0] != T + 1:
            raise ValueError(f"act must have T+1={T + 1} rows, got {self.act.shape}")
        if self.done.shape != (T,):
            raise ValueError(f"done must have T={T} entries, got {self.done.shape}")
        if np.any(self.act[0] != 0):
            raise ValueError("a_0 must be the zero vector")
        if not np.all((self.done == 0) | (self.done == 1)):
            raise ValueError("done flags must be 0 or 1")

    @property
    def length(self) -> int:
        return len(self.rew)


@dataclass
class PaddedBatch:
    """Batch-major, zero padded to the longest episode."""

    obs: np.ndarray   # (B, T_max+1, obs_dim)
    act: np.ndarray   # (B, T_max+1, act_dim)
    rew: np.ndarray   # (B, T_max)
    done: np.ndarray  # (B, T_max)
    mask: np.ndarray  # (B, T_max), 1 on real steps

    @property
    def batch_size(self) -> int:
        return self.rew.shape[0]

    @property
    def max_length(self) -> int:
        return self.rew.shape[1]


def pad_episodes(episodes, max_length: int | None = None) -> PaddedBatch:
    T = max(e.length for e in episodes)
    if max_length is not None:
        if max_length < T:
            raise ValueError(f"max_length {max_length} shorter than longest episode {T}")
        T = max_length
    B = len(episodes)
    od = episodes[0].obs.shape[1]
    ad = episodes[0].act.shape[1]
    obs = np.zeros((B, T + 1, od))
    act = np.zeros((B, T + 1, ad))
    rew = np.zeros((B, T))
    done = np.zeros((B, T))
    mask = np.zeros((B, T))
    for i, e in enumerate(episodes):
        n = e.length
        obs[i, :n + 1] = e.obs
        act[i, :n + 1] = e.act
        rew[i, :n] = e.rew
        done[i, :n] = e.done
        mask[i, :n] = 1.0
    return PaddedBatch(obs, act, rew, done, mask)


def pad_batch(batch: PaddedBatch, max_length: int) -> PaddedBatch:
    """Extend a padded batch with extra all-zero, masked timesteps."""
    extra = max_length - batch.max_length
    if extra < 0:
        raise ValueError("pad_batch can only lengthen a batch")

    def grow(a):
        pad = [(0, 0)] * a.ndim
        pad[1] = (0, extra)
        return np.pad(a, pad)

    return PaddedBatch(grow(batch.obs), grow(batch.act), grow(batch.rew),
                       grow(batch.done), grow(batch.mask))


class EpisodeBuffer:
    """FIFO store of whole episodes."""

    def __init__(self, capacity: int = 5000):
        self.capacity = int(capacity)
        self.episodes: deque[Episode] = deque(maxlen=self.capacity)

    def __len__(self):
        return len(self.episodes)

    @property
    def num_transitions(self) -> int:
        return sum(e.length for e in self.episodes)

    def push(self, episode: Episode) -> None:
        if not isinstance(episode, Episode):
            raise TypeError("push expects an Episode")
        if self.episodes:
            ref = self.episodes[0]
            if episode.obs.shape[1] != ref.obs.shape[1] or episode.act.shape[1] != ref.act.shape[1]:
                raise ValueError("episode dimensions differ from stored episodes")
        self.episodes.append(episode)

    def sample(self, batch_size: int = 10, rng: np.random.Generator | None = None) -> PaddedBatch:
        """Uniform over stored episodes, with replacement, then padded."""
        if not self.episodes:
            raise EmptyBufferError("cannot sample from an empty episode buffer")
        idx = rng.integers(0, len(self.episodes), size=batch_size)
        return pad_episodes([self.episodes[i] for i in idx])


# functional aliases
def push_transition(buffer: TransitionBuffer, t: Transition | tuple) -> None:
    buffer.push(*t)


def sample_transitions(buffer: TransitionBuffer, M: int = 100, rng=None) -> TransitionBatch:
    return buffer.sample(M, rng)


def push_episode(buffer: EpisodeBuffer, episode: Episode) -> None:
    buffer.push(episode)


def sample_episodes(buffer: EpisodeBuffer, B: int = 10, rng=None) -> PaddedBatch:
    return buffer.sample(B, rng)
