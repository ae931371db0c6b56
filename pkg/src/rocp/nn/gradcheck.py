from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from .params import ParamSet
from .tensor import Tape, Tensor, backward


def _as_tensors(params) -> list[Tensor]:
    if isinstance(params, (ParamSet, Tensor)):
        params = [params]
    out = []
    for p in params:
        out.extend(p.tensors() if isinstance(p, ParamSet) else [p])
    return out


def grad_check(f: Callable[[Tape], Tensor], params: Iterable, h: float = 1e-5) -> float:
    """Max relative error between tape gradients and central differences.

    ``f`` builds a scalar loss on the tape it is given and must be
    deterministic.  Error per element is |a - n| / max(|a|, |n|, 1e-8).
    """
    tensors = _as_tensors(params)
    for t in tensors:
        t.grad = np.zeros_like(t.data)
    tape = Tape()
    backward(tape, f(tape))
    analytic = [t.grad.copy() for t in tensors]

    worst = 0.0
    for t, a in zip(tensors, analytic):
        flat = t.data.reshape(-1)
        a = a.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = f(Tape(record=False)).item()
            flat[i] = orig - h
            fm = f(Tape(record=False)).item()
            flat[i] = orig
            num = (fp - fm) / (2.0 * h)
            err = abs(a[i] - num) / max(abs(a[i]), abs(num), 1e-8)
            worst = max(worst, err)
    return worst
