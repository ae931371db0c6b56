"""Hand-written reference policies.

They share the acting interface of learned policies: ``reset()`` and
``act(observation, prev_action, deterministic, rng)``.
"""
from __future__ import annotations

import numpy as np

from .pendulum import wrap_angle
from .push_r_bump import SLOT_X


class RandomPolicy:
    def __init__(self, act_dim: int):
        self.act_dim = act_dim

    def reset(self):
        pass

    def act(self, observation, prev_action=None, deterministic=False, rng=None):
        return rng.uniform(-1.0, 1.0, size=self.act_dim)


class ConstantPolicy:
    def __init__(self, action):
        self.action = np.asarray(action, dtype=np.float64)

    def reset(self):
        pass

    def act(self, observation, prev_action=None, deterministic=True, rng=None):
        return self.action.copy()


class PushRBumpOracle:
    """Probe slot 2, then slot 3, with a soft finger; push the right bump.

    Slot 3 holding a bump means it is the right bump (cases 2 and 3);
    otherwise the right bump sits at slot 2 (case 1).
    """

    def __init__(self, speed: float = 0.08, tol: float = 1e-6):
        self.speed, self.tol = speed, tol
        self.reset()

    def reset(self):
        self.phase = "probe2"
        self.target = None

    def _move(self, x, target):
        return np.array([np.clip((target - x) / self.speed, -1.0, 1.0), -1.0])

    def act(self, observation, prev_action=None, deterministic=True, rng=None):
        x, angle = float(observation[0]), float(observation[1])
        if self.phase == "probe2":
            if abs(x - SLOT_X[2]) > self.tol:
                return self._move(x, SLOT_X[2])
            self.phase = "probe3"
        if self.phase == "probe3":
            if abs(x - SLOT_X[3]) > self.tol:
                return self._move(x, SLOT_X[3])
            self.target = SLOT_X[3] if angle != 0.0 else SLOT_X[2]
            self.phase = "approach"
        if self.phase == "approach":
            if abs(x - self.target) > self.tol:
                return self._move(x, self.target)
            self.phase = "push"
        return np.array([1.0, 1.0])


class ReacherGoalOracle:
    """Reads the goal from the first observation, solves two-link inverse
    kinematics once and tracks the joint targets with a PD law."""

    def __init__(self, link_length: float = 0.1, kp: float = 3.0, kd: float = 0.6):
        self.l1 = self.l2 = link_length
        self.kp, self.kd = kp, kd
        self.reset()

    def reset(self):
        self.q_target = None

    def _ik(self, goal):
        r2 = float(goal @ goal)
        c2 = np.clip((r2 - self.l1 ** 2 - self.l2 ** 2) / (2 * self.l1 * self.l2), -1.0, 1.0)
        q2 = np.arccos(c2)
        q1 = np.arctan2(goal[1], goal[0]) - np.arctan2(self.l2 * np.sin(q2), self.l1 + self.l2 * np.cos(q2))
        return np.array([q1, q2])

    def act(self, observation, prev_action=None, deterministic=True, rng=None):
        obs = np.asarray(observation)
        if self.q_target is None:
            self.q_target = self._ik(obs[6:8])
        q = np.arctan2(obs[2:4], obs[0:2])
        err = np.array([wrap_angle(e) for e in self.q_target - q])
        return np.clip(self.kp * err - self.kd * obs[4:6], -1.0, 1.0)
