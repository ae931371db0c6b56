from __future__ import annotations

import numpy as np

from .base import Env, EnvSpec

SLOT_X = {1: -0.5, 2: 0.0, 3: 0.5}
# case id -> (occupied slots, slot of the right bump)
CASES = {1: ((1, 2), 2), 2: ((2, 3), 3), 3: ((1, 3), 3)}


def case_assignment(env: "PushRBump", rng: np.random.Generator) -> int:
    """Draw one of the three bump layouts uniformly and install it in ``env``."""
    case = int(rng.integers(1, 4))
    env.set_case(case)
    return case


class PushRBump(Env):
    """A finger on a line, two hidden bumps, push the right one to the right.

    Action = (velocity, stiffness), both in [-1, 1]; the finger moves by
    ``speed * velocity`` and is stiff when stiffness > 0.  A soft finger
    over a bump senses a signed overlap depth (positive when left of the
    bump centre); a stiff finger sweeping into a bump drags it along.  Any
    bump motion ends the episode with +1 if only the right bump moved right
    by at least ``success_distance``, else -1.
    """

    def __init__(self, seed=None, *, speed=0.08, bump_half_width=0.1, finger_init_std=0.05,
                 success_distance=0.05, horizon=50):
        super().__init__(seed)
        self.speed, self.half_width = speed, bump_half_width
        self.finger_init_std, self.success_distance = finger_init_std, success_distance
        self.spec = EnvSpec(2, 2, int(horizon))
        self.case = 1
        self.finger = 0.0
        self.bumps = np.zeros(2)
        self.right_index = 1

    def set_case(self, case: int) -> None:
        slots, right = CASES[case]
        self.case = case
        self.bumps = np.array([SLOT_X[s] for s in slots], dtype=np.float64)
        self.right_index = slots.index(right)

    def angle(self) -> float:
        for b in self.bumps:
            d = self.finger - b
            if abs(d) <= self.half_width:
                depth = 1.0 - abs(d) / self.half_width
                return depth if d <= 0 else -depth
        return 0.0

    def _reset(self):
        case_assignment(self, self.rng)
        self.finger = float(np.clip(self.rng.normal(0.0, self.finger_init_std), -1.0, 1.0))
        return np.array([self.finger, self.angle()])

    def _step(self, a):
        x_old = self.finger
        x_new = float(np.clip(x_old + self.speed * a[0], -1.0, 1.0))
        stiff = a[1] > 0
        self.finger = x_new
        info = {"case": self.case}
        dx = x_new - x_old
        if stiff and dx != 0.0:
            lo, hi = min(x_old, x_new), max(x_old, x_new)
            hw = self.half_width
            touched = [k for k, b in enumerate(self.bumps) if lo <= b + hw and hi >= b - hw]
            if touched:
                for k in touched:
                    self.bumps[k] += dx
                success = touched == [self.right_index] and dx >= self.success_distance
                info["success"] = success
                return np.array([x_new, 0.0]), 1.0 if success else -1.0, True, info
        return np.array([x_new, 0.0 if stiff else self.angle()]), 0.0, False, info
