from __future__ import annotations

import numpy as np

from .base import Env, EnvSpec


def wrap_angle(x: float) -> float:
    return ((x + np.pi) % (2 * np.pi)) - np.pi


class Pendulum(Env):
    """Torque-limited swing-up.  theta = 0 is upright.

    Observation (cos theta, sin theta, theta_dot); reward
    -(wrap(theta)^2 + 0.1 theta_dot^2 + 0.001 u^2).
    """

    position_idx = (0, 1)
    velocity_idx = (2,)

    def __init__(self, seed=None, *, mass=1.0, length=1.0, g=10.0, dt=0.05, max_torque=2.0,
                 max_speed=8.0, init_angle_noise=0.1, init_speed_noise=0.1, horizon=200):
        super().__init__(seed)
        self.m, self.l, self.g, self.dt = mass, length, g, dt
        self.max_torque, self.max_speed = max_torque, max_speed
        self.init_angle_noise, self.init_speed_noise = init_angle_noise, init_speed_noise
        self.spec = EnvSpec(3, 1, int(horizon))
        self.theta = np.pi
        self.theta_dot = 0.0

    def _obs(self):
        return np.array([np.cos(self.theta), np.sin(self.theta), self.theta_dot])

    def _reset(self):
        self.theta = np.pi + self.rng.uniform(-self.init_angle_noise, self.init_angle_noise)
        self.theta_dot = self.rng.uniform(-self.init_speed_noise, self.init_speed_noise)
        return self._obs()

    def _step(self, a):
        u = self.max_torque * a[0]
        th, thd = self.theta, self.theta_dot
        cost = wrap_angle(th) ** 2 + 0.1 * thd ** 2 + 0.001 * u ** 2
        thd = thd + (3 * self.g / (2 * self.l) * np.sin(th) + 3.0 / (self.m * self.l ** 2) * u) * self.dt
        thd = float(np.clip(thd, -self.max_speed, self.max_speed))
        self.theta = th + thd * self.dt
        self.theta_dot = thd
        return self._obs(), -cost, False, {"theta": wrap_angle(self.theta)}
