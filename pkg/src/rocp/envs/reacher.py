from __future__ import annotations

import numpy as np

from .base import Env, EnvSpec


class ReacherPOMDP(Env):
    """Planar two-link reacher whose goal is only shown in the first observation.

    Observation (cos q1, cos q2, sin q1, sin q2, q1_dot, q2_dot, goal_x, goal_y);
    goal entries are zero from the second observation on.  Joint dynamics are
    a damped double integrator driven by the normalised torques.
    """

    def __init__(self, seed=None, *, link_length=0.1, dt=0.05, gain=10.0, damping=1.0,
                 goal_inner_radius=0.05, horizon=50):
        super().__init__(seed)
        self.l1 = self.l2 = link_length
        self.dt, self.gain, self.damping = dt, gain, damping
        self.goal_inner_radius = goal_inner_radius
        self.spec = EnvSpec(8, 2, int(horizon))
        self.q = np.zeros(2)
        self.qd = np.zeros(2)
        self.goal = np.zeros(2)

    def fingertip(self) -> np.ndarray:
        q1, q2 = self.q
        return np.array([self.l1 * np.cos(q1) + self.l2 * np.cos(q1 + q2),
                         self.l1 * np.sin(q1) + self.l2 * np.sin(q1 + q2)])

    def _obs(self, show_goal: bool):
        goal = self.goal if show_goal else np.zeros(2)
        return np.concatenate([np.cos(self.q), np.sin(self.q), self.qd, goal])

    def _reset(self):
        self.q = self.rng.uniform(-0.1, 0.1, size=2)
        self.qd = self.rng.uniform(-0.005, 0.005, size=2)
        r_out = self.l1 + self.l2
        # area-uniform radius in the annulus
        r = np.sqrt(self.rng.uniform(self.goal_inner_radius ** 2, r_out ** 2))
        phi = self.rng.uniform(-np.pi, np.pi)
        self.goal = np.array([r * np.cos(phi), r * np.sin(phi)])
        return self._obs(True)

    def _step(self, a):
        self.qd = self.qd + self.dt * (self.gain * a - self.damping * self.qd)
        self.q = self.q + self.dt * self.qd
        dist = float(np.linalg.norm(self.fingertip() - self.goal))
        reward = -dist - 0.01 * float(a @ a)
        return self._obs(False), reward, False, {"distance": dist}
