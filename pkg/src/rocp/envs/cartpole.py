from __future__ import annotations

import numpy as np

from .base import Env, EnvSpec
from .pendulum import wrap_angle


class CartPole(Env):
    """Cart-pole with Euler-integrated classic dynamics; theta = 0 is upright.

    Observation (x, x_dot, cos theta, sin theta, theta_dot), dense reward
    (1 + cos theta) / 2 - 0.01 x^2, no early termination.  The cart is held
    inside |x| <= track_limit; hitting the limit kills its outward velocity.
    """

    position_idx = (0, 2, 3)
    velocity_idx = (1, 4)

    def __init__(self, seed=None, *, swingup=False, cart_mass=1.0, pole_mass=0.1,
                 half_length=0.5, g=9.8, dt=0.02, max_force=10.0, track_limit=2.4,
                 init_noise=0.01, horizon=200):
        super().__init__(seed)
        self.swingup = swingup
        self.mc, self.mp, self.lh, self.g, self.dt = cart_mass, pole_mass, half_length, g, dt
        self.max_force, self.track_limit, self.init_noise = max_force, track_limit, init_noise
        self.spec = EnvSpec(5, 1, int(horizon))
        self.state = np.zeros(4)

    def _obs(self):
        x, xd, th, thd = self.state
        return np.array([x, xd, np.cos(th), np.sin(th), thd])

    def _reset(self):
        self.state = self.rng.normal(0.0, self.init_noise, size=4)
        if self.swingup:
            self.state[2] += np.pi
        return self._obs()

    def _step(self, a):
        force = self.max_force * a[0]
        x, xd, th, thd = self.state
        total = self.mc + self.mp
        pml = self.mp * self.lh
        s, c = np.sin(th), np.cos(th)
        temp = (force + pml * thd ** 2 * s) / total
        thacc = (self.g * s - c * temp) / (self.lh * (4.0 / 3.0 - self.mp * c ** 2 / total))
        xacc = temp - pml * thacc * c / total
        x = x + self.dt * xd
        xd = xd + self.dt * xacc
        th = th + self.dt * thd
        thd = thd + self.dt * thacc
        if abs(x) > self.track_limit:
            x = np.sign(x) * self.track_limit
            if xd * x > 0:
                xd = 0.0
        self.state = np.array([x, xd, th, thd])
        reward = (1.0 + np.cos(th)) / 2.0 - 0.01 * x ** 2
        return self._obs(), reward, False, {"theta": wrap_angle(th), "x": x}
