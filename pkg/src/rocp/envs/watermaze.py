from __future__ import annotations

import numpy as np

from .base import Env, EnvSpec


class Watermaze(Env):
    """Circular arena with a hidden platform.

    The agent starts at the centre and moves by ``step_size * action`` per
    step, projected back inside the arena.  Landing on the platform pays 1
    and reveals it (third observation entry); the next step returns the
    agent to the centre, ignoring that step's action.
    """

    def __init__(self, seed=None, *, arena_radius=1.0, platform_radius=0.3, step_size=0.05,
                 horizon=200):
        super().__init__(seed)
        self.arena_radius, self.platform_radius, self.step_size = arena_radius, platform_radius, step_size
        self.spec = EnvSpec(3, 2, int(horizon))
        self.pos = np.zeros(2)
        self.platform = np.zeros(2)
        self._relocate = False

    def on_platform(self) -> bool:
        return bool(np.linalg.norm(self.pos - self.platform) <= self.platform_radius)

    def _obs(self, flag: bool):
        return np.array([self.pos[0], self.pos[1], float(flag)])

    def _reset(self):
        self.pos = np.zeros(2)
        # platform fully inside the arena and not covering the start point
        r_min, r_max = self.platform_radius, self.arena_radius - self.platform_radius
        r = np.sqrt(self.rng.uniform(r_min ** 2, r_max ** 2))
        phi = self.rng.uniform(-np.pi, np.pi)
        self.platform = np.array([r * np.cos(phi), r * np.sin(phi)])
        self._relocate = False
        return self._obs(False)

    def _step(self, a):
        info = {"platform": self.platform.copy()}
        if self._relocate:
            self.pos = np.zeros(2)
            self._relocate = False
            info["relocated"] = True
            return self._obs(False), 0.0, False, info
        pos = self.pos + self.step_size * a
        norm = np.linalg.norm(pos)
        if norm > self.arena_radius:
            pos = pos * (self.arena_radius / norm)
        self.pos = pos
        hit = self.on_platform()
        self._relocate = hit
        return self._obs(hit), 1.0 if hit else 0.0, False, info
