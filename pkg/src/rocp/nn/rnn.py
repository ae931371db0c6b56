"""Elman, LSTM and GRU cells, stacked unrolls and their BPTT.

Weights are stored gate-stacked: LSTM rows are ordered (input, forget,
candidate, output), GRU rows (reset, update, candidate).  Every layer has
``W_ih, b_ih, W_hh, b_hh``.  Single steps and full unrolls call the same
numpy kernels, so an unroll is bitwise equal to chaining steps.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .params import ParamSet, uniform_init
from .tensor import ShapeError, Tape, Tensor, check_finite

NUM_LAYERS = 2
HIDDEN = 256


class RnnCellKind(enum.Enum):
    VRNN = "vrnn"
    LSTM = "lstm"
    GRU = "gru"

    @classmethod
    def parse(cls, value) -> "RnnCellKind":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())

    @property
    def gates(self) -> int:
        return {"vrnn": 1, "lstm": 4, "gru": 3}[self.value]


@dataclass
class RecurrentHidden:
    h: list
    c: list | None = None

    @classmethod
    def zeros(cls, kind: RnnCellKind, batch: int, hidden: int, layers: int = NUM_LAYERS):
        h = [np.zeros((batch, hidden)) for _ in range(layers)]
        c = [np.zeros((batch, hidden)) for _ in range(layers)] if kind is RnnCellKind.LSTM else None
        return cls(h, c)

    def copy(self) -> "RecurrentHidden":
        return RecurrentHidden([a.copy() for a in self.h],
                               None if self.c is None else [a.copy() for a in self.c])


def init_rnn(rng: np.random.Generator, kind, in_dim: int, hidden: int = HIDDEN,
             layers: int = NUM_LAYERS) -> ParamSet:
    kind = RnnCellKind.parse(kind)
    ps = ParamSet()
    g = kind.gates * hidden
    for k in range(layers):
        fan_in = in_dim if k == 0 else hidden
        ps.add(f"l{k}.W_ih", uniform_init(rng, g, fan_in))
        ps.add(f"l{k}.b_ih", np.zeros(g))
        ps.add(f"l{k}.W_hh", uniform_init(rng, g, hidden))
        ps.add(f"l{k}.b_hh", np.zeros(g))
    return ps


def num_layers(params) -> int:
    return sum(1 for k in params if k.endswith(".W_ih"))


def layer_params(params, k: int) -> dict:
    """Tensors of layer ``k`` keyed W_ih, b_ih, W_hh, b_hh."""
    return {n: params[f"l{k}.{n}"] for n in ("W_ih", "b_ih", "W_hh", "b_hh")}


# ---------------------------------------------------------------------------
# numpy kernels.  Forward returns (h, c, cache); backward takes the cache and
# gradients on (h, c) and returns pre-activation gradients for the input and
# recurrent projections plus dh_prev/dc_prev contributions that bypass W_hh.


def _vrnn_fwd(x, h, c, W_ih, b_ih, W_hh, b_hh):
    hn = np.tanh(x @ W_ih.T + b_ih + h @ W_hh.T + b_hh)
    return hn, None, hn


def _vrnn_bwd(cache, dh, dc):
    hn = cache
    da = dh * (1.0 - hn * hn)
    return da, da, None, None


def _lstm_fwd(x, h, c, W_ih, b_ih, W_hh, b_hh):
    H = h.shape[1]
    a = x @ W_ih.T + b_ih + h @ W_hh.T + b_hh
    i = expit(a[:, :H])
    f = expit(a[:, H:2 * H])
    g = np.tanh(a[:, 2 * H:3 * H])
    o = expit(a[:, 3 * H:])
    cn = f * c + i * g
    tc = np.tanh(cn)
    hn = o * tc
    return hn, cn, (c, i, f, g, o, tc)


def _lstm_bwd(cache, dh, dc):
    c_prev, i, f, g, o, tc = cache
    dc = dc + dh * o * (1.0 - tc * tc)
    da = np.concatenate([
        dc * g * i * (1.0 - i),
        dc * c_prev * f * (1.0 - f),
        dc * i * (1.0 - g * g),
        dh * tc * o * (1.0 - o),
    ], axis=1)
    return da, da, None, dc * f


def _gru_fwd(x, h, c, W_ih, b_ih, W_hh, b_hh):
    H = h.shape[1]
    ax = x @ W_ih.T + b_ih
    ah = h @ W_hh.T + b_hh
    r = expit(ax[:, :H] + ah[:, :H])
    z = expit(ax[:, H:2 * H] + ah[:, H:2 * H])
    hg = ah[:, 2 * H:]
    n = np.tanh(ax[:, 2 * H:] + r * hg)
    hn = (1.0 - z) * n + z * h
    return hn, None, (h, r, z, n, hg)


def _gru_bwd(cache, dh, dc):
    h_prev, r, z, n, hg = cache
    dn = dh * (1.0 - z) * (1.0 - n * n)
    dz = dh * (h_prev - n) * z * (1.0 - z)
    dr = dn * hg * r * (1.0 - r)
    dax = np.concatenate([dr, dz, dn], axis=1)
    dah = np.concatenate([dr, dz, dn * r], axis=1)
    return dax, dah, dh * z, None


_KERNELS = {
    RnnCellKind.VRNN: (_vrnn_fwd, _vrnn_bwd),
    RnnCellKind.LSTM: (_lstm_fwd, _lstm_bwd),
    RnnCellKind.GRU: (_gru_fwd, _gru_bwd),
}


def _weights(p: dict) -> tuple:
    return p["W_ih"].data, p["b_ih"].data, p["W_hh"].data, p["b_hh"].data


def _check_layer(x, h, p):
    W_ih, _, W_hh, _ = _weights(p)
    if x.shape[-1] != W_ih.shape[1] or h.shape[-1] != W_hh.shape[1]:
        raise ShapeError(f"cell: x{x.shape} h{h.shape} W_ih{W_ih.shape} W_hh{W_hh.shape}")


# ---------------------------------------------------------------------------
# single steps as tape operations


def _step(kind, x: Tensor, h_prev: Tensor, c_prev, p: dict, tape: Tape):
    check_finite(x.data, "cell input")
    _check_layer(x.data, h_prev.data, p)
    fwd, bwd = _KERNELS[kind]
    W_ih, b_ih, W_hh, b_hh = _weights(p)
    c_data = None if c_prev is None else c_prev.data
    hn, cn, cache = fwd(x.data, h_prev.data, c_data, W_ih, b_ih, W_hh, b_hh)
    params = (p["W_ih"], p["b_ih"], p["W_hh"], p["b_hh"])
    lstm = kind is RnnCellKind.LSTM
    # the output tensor carries [h | c] for LSTM so one node covers both
    out_data = np.concatenate([hn, cn], axis=1) if lstm else hn
    H = hn.shape[1]
    inputs = (x, h_prev) + ((c_prev,) if lstm else ()) + params

    def backward(g):
        dh = g[:, :H]
        dc = g[:, H:] if lstm else None
        dax, dah, dh_direct, dc_prev = bwd(cache, dh, dc)
        dx = dax @ W_ih
        dh_prev = dah @ W_hh
        if dh_direct is not None:
            dh_prev = dh_prev + dh_direct
        grads = (dx, dh_prev) + ((dc_prev,) if lstm else ())
        return grads + (dax.T @ x.data, dax.sum(0), dah.T @ h_prev.data, dah.sum(0))

    out = tape.apply(out_data, inputs, backward)
    if not lstm:
        return out
    return tape.index(out, (slice(None), slice(0, H))), tape.index(out, (slice(None), slice(H, None)))


def vrnn_step(x: Tensor, h_prev: Tensor, params: dict, tape: Tape) -> Tensor:
    """h_t = tanh(W_ih x + b_ih + W_hh h_prev + b_hh)."""
    return _step(RnnCellKind.VRNN, x, h_prev, None, params, tape)


def lstm_step(x: Tensor, h_prev: Tensor, c_prev: Tensor, params: dict, tape: Tape):
    """Returns (h_t, c_t)."""
    return _step(RnnCellKind.LSTM, x, h_prev, c_prev, params, tape)


def gru_step(x: Tensor, h_prev: Tensor, params: dict, tape: Tape) -> Tensor:
    return _step(RnnCellKind.GRU, x, h_prev, None, params, tape)


def cell_step(kind, x: Tensor, state: RecurrentHidden | tuple, params: dict, tape: Tape):
    kind = RnnCellKind.parse(kind)
    if kind is RnnCellKind.LSTM:
        return lstm_step(x, state[0], state[1], params, tape)
    return _step(kind, x, state[0], None, params, tape)


# ---------------------------------------------------------------------------
# stacked unroll


def advance(kind, x: np.ndarray, hidden: RecurrentHidden, params) -> np.ndarray:
    """Advance ``hidden`` in place by one input row batch; no gradient.

    Returns the top-layer hidden output.
    """
    kind = RnnCellKind.parse(kind)
    check_finite(x, "cell input")
    fwd = _KERNELS[kind][0]
    inp = x
    for k in range(len(hidden.h)):
        W_ih, b_ih, W_hh, b_hh = _weights(layer_params(params, k))
        c = None if hidden.c is None else hidden.c[k]
        h, c, _ = fwd(inp, hidden.h[k], c, W_ih, b_ih, W_hh, b_hh)
        hidden.h[k] = h
        if hidden.c is not None:
            hidden.c[k] = c
        inp = h
    return inp


def rnn_unroll(seq: Tensor, kind, params, tape: Tape) -> Tensor:
    """Run the stacked RNN over ``seq`` of shape (T, batch, in) from zero state.

    Returns the top layer's hidden sequence (T, batch, hidden).  Recorded as
    a single tape node whose backward is a full BPTT sweep.
    """
    kind = RnnCellKind.parse(kind)
    if seq.ndim != 3 or seq.shape[0] == 0:
        raise ShapeError(f"rnn_unroll needs a non-empty (T, batch, in) sequence, got {seq.shape}")
    check_finite(seq.data, "rnn_unroll input")
    fwd, bwd = _KERNELS[kind]
    T, B, _ = seq.shape
    L = num_layers(params)
    layers = [layer_params(params, k) for k in range(L)]
    _check_layer(seq.data[0], np.zeros((B, layers[0]["W_hh"].shape[1])), layers[0])
    H = layers[0]["W_hh"].shape[1]
    lstm = kind is RnnCellKind.LSTM
    tape.counts["rnn_forward"] += 1

    caches = []  # per layer: (inputs (T,B,in), h_prevs (T,B,H), step caches)
    inp = seq.data
    for p in layers:
        W_ih, b_ih, W_hh, b_hh = _weights(p)
        h = np.zeros((B, H))
        c = np.zeros((B, H)) if lstm else None
        hs = np.empty((T, B, H))
        step_caches = []
        for t in range(T):
            h, c, cache = fwd(inp[t], h, c, W_ih, b_ih, W_hh, b_hh)
            hs[t] = h
            step_caches.append(cache)
        h_prev = np.concatenate([np.zeros((1, B, H)), hs[:-1]], axis=0)
        caches.append((inp, h_prev, step_caches))
        inp = hs
    out_data = inp

    flat_params = tuple(t for p in layers for t in (p["W_ih"], p["b_ih"], p["W_hh"], p["b_hh"]))

    def backward(g):
        tape.counts["bptt"] += 1
        grads = []
        d_out = g
        for p, (x_seq, h_prev, step_caches) in zip(reversed(layers), reversed(caches)):
            W_ih, _, W_hh, _ = _weights(p)
            G = W_hh.shape[0]
            dAx = np.empty((T, B, G))
            dAh = np.empty((T, B, G))
            dh_next = np.zeros((B, H))
            dc_next = np.zeros((B, H)) if lstm else None
            for t in range(T - 1, -1, -1):
                dax, dah, dh_direct, dc_prev = bwd(step_caches[t], d_out[t] + dh_next, dc_next)
                dAx[t] = dax
                dAh[t] = dah
                dh_next = dah @ W_hh
                if dh_direct is not None:
                    dh_next += dh_direct
                dc_next = dc_prev
            ax2 = dAx.reshape(T * B, G)
            ah2 = dAh.reshape(T * B, G)
            grads.append((ax2.T @ x_seq.reshape(T * B, -1), ax2.sum(0),
                          ah2.T @ h_prev.reshape(T * B, H), ah2.sum(0)))
            d_out = dAx @ W_ih
        param_grads = tuple(gr for layer in reversed(grads) for gr in layer)
        return (d_out,) + param_grads

    return tape.apply(out_data, (seq,) + flat_params, backward)
