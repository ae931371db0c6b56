from __future__ import annotations

from typing import Sequence

import numpy as np

from .params import ParamSet, uniform_init
from .tensor import ShapeError, Tape, Tensor


def init_mlp(rng: np.random.Generator, in_dim: int, out_dim: int,
             hidden: Sequence[int] = (256, 256), params: ParamSet | None = None,
             prefix: str = "") -> ParamSet:
    """Dense layers ``fc0 .. fcN`` with uniform(+-1/sqrt(fan_in)) weights, zero biases."""
    ps = ParamSet() if params is None else params
    sizes = [in_dim, *hidden, out_dim]
    for k, (a, b) in enumerate(zip(sizes[:-1], sizes[1:])):
        ps.add(f"{prefix}fc{k}.W", uniform_init(rng, b, a))
        ps.add(f"{prefix}fc{k}.b", np.zeros(b))
    return ps


def mlp_forward(x: Tensor, params, tape: Tape, prefix: str = "") -> Tensor:
    """ReLU between hidden layers, linear head.  ``params`` maps names to tensors."""
    n = sum(1 for k in params if k.startswith(prefix + "fc") and k.endswith(".W"))
    if n == 0:
        raise ShapeError("mlp_forward: no layers")
    if x.shape[-1] != params[f"{prefix}fc0.W"].shape[1]:
        raise ShapeError(f"mlp_forward: input dim {x.shape[-1]} != {params[f'{prefix}fc0.W'].shape[1]}")
    for k in range(n):
        x = tape.linear(x, params[f"{prefix}fc{k}.W"], params[f"{prefix}fc{k}.b"])
        if k < n - 1:
            x = tape.relu(x)
    return x
