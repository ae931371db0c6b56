"""Parameter containers, initialisation, Adam, polyak averaging and the
ROCP1 binary format."""
from __future__ import annotations

import copy
import struct
from collections import OrderedDict
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from .tensor import NumericError, Tensor

MAGIC = b"ROCP1"


class ParamSet:
    """Named, ordered learnable tensors with their Adam moments."""

    def __init__(self):
        self._values: OrderedDict[str, Tensor] = OrderedDict()
        self.adam_m: dict[str, np.ndarray] = {}
        self.adam_v: dict[str, np.ndarray] = {}
        self.step_count = 0

    def add(self, name: str, value) -> Tensor:
        if name in self._values:
            raise KeyError(f"duplicate parameter {name!r}")
        t = Tensor(np.array(value, dtype=np.float64), requires_grad=True)
        t.zero_grad()
        self._values[name] = t
        self.adam_m[name] = np.zeros_like(t.data)
        self.adam_v[name] = np.zeros_like(t.data)
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._values[name]

    def __contains__(self, name: str) -> bool:
        return name in self._values

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def items(self):
        return self._values.items()

    def tensors(self) -> list[Tensor]:
        return list(self._values.values())

    def zero_grad(self) -> None:
        for t in self._values.values():
            t.grad = np.zeros_like(t.data)

    def clone(self) -> "ParamSet":
        """Exact deep copy, including moments and step count."""
        return copy.deepcopy(self)

    def frozen(self) -> dict[str, Tensor]:
        """Constant views of the current values (share memory, no gradient)."""
        return {k: Tensor(t.data) for k, t in self._values.items()}

    def prefixed(self, prefix: str) -> dict[str, Tensor]:
        """Entries whose names start with ``prefix``, with the prefix stripped."""
        n = len(prefix)
        return {k[n:]: t for k, t in self._values.items() if k.startswith(prefix)}

    def arrays(self) -> OrderedDict[str, np.ndarray]:
        return OrderedDict((k, t.data) for k, t in self._values.items())

    def load_arrays(self, arrays: Mapping[str, np.ndarray]) -> None:
        for k, t in self._values.items():
            a = np.asarray(arrays[k], dtype=np.float64)
            if a.shape != t.shape:
                raise ValueError(f"{k}: shape {a.shape} != {t.shape}")
            t.data[...] = a

    def num_params(self) -> int:
        return sum(t.data.size for t in self._values.values())


def uniform_init(rng: np.random.Generator, out_dim: int, in_dim: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(in_dim)
    return rng.uniform(-bound, bound, size=(out_dim, in_dim))


def adam_step(params: ParamSet, lr: float, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> None:
    """One bias-corrected Adam step on every entry, then zero the grads."""
    for name, t in params.items():
        if t.grad is not None and not np.all(np.isfinite(t.grad)):
            raise NumericError(f"non-finite gradient for {name}")
    params.step_count += 1
    k = params.step_count
    c1 = 1.0 - beta1 ** k
    c2 = 1.0 - beta2 ** k
    for name, t in params.items():
        g = t.grad if t.grad is not None else np.zeros_like(t.data)
        m = params.adam_m[name]
        v = params.adam_v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        t.data -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    params.zero_grad()


def polyak_update(target: ParamSet, online: ParamSet, rho: float) -> None:
    """target <- rho * target + (1 - rho) * online, entry by entry."""
    if list(target) != list(online):
        raise ValueError("polyak_update: parameter names differ")
    for name, t in target.items():
        o = online[name]
        if o.shape != t.shape:
            raise ValueError(f"polyak_update: shape mismatch for {name}")
        t.data[...] = rho * t.data + (1.0 - rho) * o.data


def save_arrays(path, arrays: Mapping[str, np.ndarray]) -> None:
    with open(path, "wb") as f:
        f.write(MAGIC)
        for name, a in arrays.items():
            a = np.asarray(a, dtype="<f8")
            raw = name.encode("utf-8")
            f.write(struct.pack("<I", len(raw)))
            f.write(raw)
            f.write(struct.pack("<I", a.ndim))
            f.write(struct.pack(f"<{a.ndim}I", *a.shape))
            f.write(np.ascontiguousarray(a).tobytes())


def load_arrays(path) -> OrderedDict[str, np.ndarray]:
    blob = Path(path).read_bytes()
    if blob[:len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a ROCP1 file")
    pos = len(MAGIC)
    out: OrderedDict[str, np.ndarray] = OrderedDict()
    while pos < len(blob):
        (n,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        name = blob[pos:pos + n].decode("utf-8")
        pos += n
        (rank,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        shape = struct.unpack_from(f"<{rank}I", blob, pos)
        pos += 4 * rank
        count = int(np.prod(shape, dtype=np.int64))
        out[name] = np.frombuffer(blob, dtype="<f8", count=count, offset=pos).reshape(shape).copy()
        pos += 8 * count
    return out


def save_paramsets(path, sets: Mapping[str, ParamSet]) -> None:
    flat = OrderedDict()
    for prefix, ps in sets.items():
        for k, a in ps.arrays().items():
            flat[f"{prefix}/{k}"] = a
    save_arrays(path, flat)


def load_paramsets(path, sets: Mapping[str, ParamSet]) -> None:
    flat = load_arrays(path)
    for prefix, ps in sets.items():
        ps.load_arrays({k: flat[f"{prefix}/{k}"] for k in ps})
