import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rocp.nn import (NumericError, ParamSet, RecurrentHidden, RnnCellKind, ShapeError, Tape,
                     TapeError, Tensor, adam_step, advance, backward, grad_check, gru_step,
                     init_mlp, init_rnn, layer_params, linear_forward, load_arrays,
                     load_paramsets, lstm_step, mlp_forward, polyak_update, rnn_unroll,
                     save_arrays, save_paramsets, vrnn_step)
from rocp.agents.functional import squashed_gaussian


def sig(v):
    return 1.0 / (1.0 + math.exp(-v))


def cell_params(kind, in_dim, hidden, rng=None, zero=False):
    g = RnnCellKind.parse(kind).gates * hidden
    ps = ParamSet()
    for name, shape in (("W_ih", (g, in_dim)), ("b_ih", (g,)), ("W_hh", (g, hidden)), ("b_hh", (g,))):
        ps.add(name, np.zeros(shape) if zero else rng.normal(size=shape))
    return ps


# dense ----------------------------------------------------------------------

def test_linear_hand_values():
    t = Tape()
    out = linear_forward(Tensor([[1.0, 2.0]]), Tensor([[3.0, 4.0]]), Tensor([5.0]), t)
    assert out.data.tolist() == [[16.0]]
    out = linear_forward(Tensor([[1.0, 2.0]]), Tensor([[0.0, 0.0]]), Tensor([0.0]), t)
    assert out.data.tolist() == [[0.0]]
    x = np.eye(2)
    out = linear_forward(Tensor(x), Tensor(np.eye(2)), Tensor(np.zeros(2)), t)
    np.testing.assert_array_equal(out.data, x)


def test_linear_shape_error():
    with pytest.raises(ShapeError):
        linear_forward(Tensor(np.ones((2, 3))), Tensor(np.ones((1, 2))), Tensor(np.zeros(1)), Tape())


def test_mlp_tiny_net():
    # 1-2-1: h = relu([2x+1, -x]) ; y = 3h0 + 4h1 - 1
    ps = ParamSet()
    ps.add("fc0.W", [[2.0], [-1.0]])
    ps.add("fc0.b", [1.0, 0.0])
    ps.add("fc1.W", [[3.0, 4.0]])
    ps.add("fc1.b", [-1.0])
    y = mlp_forward(Tensor([[1.5], [-2.0]]), ps, Tape())
    # x=1.5: h=(4,0) -> 11 ; x=-2: h=(0,2) -> 7
    np.testing.assert_allclose(y.data, [[11.0], [7.0]])


def test_mlp_zero_params_and_relu():
    ps = init_mlp(np.random.default_rng(0), 3, 2, (4, 4))
    for t in ps.tensors():
        t.data[...] = 0
    assert np.all(mlp_forward(Tensor(np.ones((5, 3))), ps, Tape()).data == 0)
    assert np.all(Tape().relu(Tensor([-1.0, -3.0, 2.0])).data == [0, 0, 2])


# tape -------------------------------------------------------------------------

def test_backward_scalar_param_and_independent_loss():
    p = Tensor(np.array(2.0), requires_grad=True)
    p.zero_grad()
    t = Tape()
    backward(t, t.scale(p, 1.0))
    assert p.grad == 1.0
    q = Tensor(np.array(1.0), requires_grad=True)
    q.zero_grad()
    t = Tape()
    backward(t, t.add(t.square(p), Tensor(np.array(3.0))))
    assert q.grad == 0.0


def test_backward_empty_tape():
    with pytest.raises(TapeError):
        backward(Tape(), Tensor(np.array(1.0)))


def test_nograd_tape_records_nothing():
    ps = init_mlp(np.random.default_rng(0), 2, 1, (3,))
    t = Tape(record=False)
    mlp_forward(Tensor(np.ones((1, 2))), ps, t)
    assert len(t) == 0


def test_composite_graph_gradcheck():
    rng = np.random.default_rng(1)
    a = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
    b = Tensor(rng.uniform(0.5, 1.5, size=(3, 4)), requires_grad=True)

    def f(t):
        u = t.mul(t.tanh(a), t.exp(t.scale(b, 0.3)))
        v = t.minimum(t.sigmoid(a), t.log(b))
        w = t.concat([u, t.square(v)], axis=1)
        return t.sum(t.clip(t.sub(w, t.index(w, (slice(None), slice(0, 8)))), -5, 5))

    assert grad_check(f, [a, b]) < 1e-4


def test_linear_gradcheck():
    rng = np.random.default_rng(2)
    W = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
    b = Tensor(rng.normal(size=3), requires_grad=True)
    x = rng.normal(size=(5, 4))
    assert grad_check(lambda t: t.sum(t.square(linear_forward(Tensor(x), W, b, t))), [W, b]) < 1e-6


# cells -------------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["vrnn", "lstm", "gru"])
def test_zero_param_cells(kind):
    ps = cell_params(kind, 3, 4, zero=True)
    x = Tensor(np.random.default_rng(0).normal(size=(2, 3)))
    h = Tensor(np.array([[0.3, -0.2, 1.0, 0.0], [2.0, 0.1, -1.0, 0.5]]))
    t = Tape()
    if kind == "vrnn":
        assert np.all(vrnn_step(x, h, ps, t).data == 0)
    elif kind == "gru":
        np.testing.assert_allclose(gru_step(x, h, ps, t).data, 0.5 * h.data, atol=1e-12, rtol=0)
        assert np.all(gru_step(x, Tensor(np.zeros((2, 4))), ps, t).data == 0)
    else:
        c = Tensor(np.array([[1.0, -2.0, 0.5, 0.0], [3.0, 0.1, -0.7, 2.0]]))
        hn, cn = lstm_step(x, h, c, ps, t)
        np.testing.assert_allclose(cn.data, 0.5 * c.data, atol=1e-12, rtol=0)
        np.testing.assert_allclose(hn.data, 0.5 * np.tanh(0.5 * c.data), atol=1e-12, rtol=0)
        hn, cn = lstm_step(x, h, Tensor(np.zeros((2, 4))), ps, t)
        assert np.all(hn.data == 0) and np.all(cn.data == 0)


def test_vrnn_identity_input():
    ps = cell_params("vrnn", 3, 3, zero=True)
    ps["W_ih"].data[...] = np.eye(3)
    x = np.array([[0.01, -0.02, 0.03]])
    np.testing.assert_allclose(vrnn_step(Tensor(x), Tensor(np.zeros((1, 3))), ps, Tape()).data, np.tanh(x))


def _scalar(kind, rng):
    ps = cell_params(kind, 1, 1, rng)
    return ps, {k: ps[k].data.reshape(-1) for k in ("W_ih", "b_ih", "W_hh", "b_hh")}


def test_vrnn_scalar_oracle():
    ps, p = _scalar("vrnn", np.random.default_rng(3))
    x, h = 0.7, -0.4
    expect = math.tanh(p["W_ih"][0] * x + p["b_ih"][0] + p["W_hh"][0] * h + p["b_hh"][0])
    got = vrnn_step(Tensor([[x]]), Tensor([[h]]), ps, Tape()).data[0, 0]
    assert got == pytest.approx(expect, abs=1e-14)


def test_lstm_scalar_oracle():
    ps, p = _scalar("lstm", np.random.default_rng(4))
    x, h, c = 0.7, -0.4, 1.3
    pre = [p["W_ih"][k] * x + p["b_ih"][k] + p["W_hh"][k] * h + p["b_hh"][k] for k in range(4)]
    i, f, g, o = sig(pre[0]), sig(pre[1]), math.tanh(pre[2]), sig(pre[3])
    c_new = f * c + i * g
    h_new = o * math.tanh(c_new)
    hn, cn = lstm_step(Tensor([[x]]), Tensor([[h]]), Tensor([[c]]), ps, Tape())
    assert cn.data[0, 0] == pytest.approx(c_new, abs=1e-14)
    assert hn.data[0, 0] == pytest.approx(h_new, abs=1e-14)


def test_gru_scalar_oracle():
    ps, p = _scalar("gru", np.random.default_rng(5))
    x, h = 0.7, -0.4
    lin = lambda k, v, b, inp: p[v][k] * inp + p[b][k]
    r = sig(lin(0, "W_ih", "b_ih", x) + lin(0, "W_hh", "b_hh", h))
    z = sig(lin(1, "W_ih", "b_ih", x) + lin(1, "W_hh", "b_hh", h))
    n = math.tanh(lin(2, "W_ih", "b_ih", x) + r * lin(2, "W_hh", "b_hh", h))
    expect = (1 - z) * n + z * h
    assert gru_step(Tensor([[x]]), Tensor([[h]]), ps, Tape()).data[0, 0] == pytest.approx(expect, abs=1e-14)


@pytest.mark.parametrize("kind", ["vrnn", "lstm", "gru"])
def test_cell_gradcheck(kind):
    rng = np.random.default_rng(6)
    ps = cell_params(kind, 3, 4, rng)
    x = Tensor(rng.normal(size=(2, 3)), requires_grad=True)
    h = Tensor(rng.normal(size=(2, 4)), requires_grad=True)
    c = Tensor(rng.normal(size=(2, 4)), requires_grad=True)
    w = rng.normal(size=(2, 4))

    def f(t):
        if kind == "lstm":
            hn, cn = lstm_step(x, h, c, ps, t)
            return t.sum(t.add(t.mul(hn, Tensor(w)), t.square(cn)))
        step = vrnn_step if kind == "vrnn" else gru_step
        return t.sum(t.mul(step(x, h, ps, t), Tensor(w)))

    leaves = [ps, x, h] + ([c] if kind == "lstm" else [])
    assert grad_check(f, leaves) < 1e-4


def test_cell_rejects_nonfinite():
    ps = cell_params("gru", 1, 1, zero=True)
    with pytest.raises(NumericError):
        gru_step(Tensor([[np.nan]]), Tensor([[0.0]]), ps, Tape())


# unroll ---------------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["vrnn", "lstm", "gru"])
def test_unroll_t1_is_single_steps(kind):
    rng = np.random.default_rng(7)
    ps = init_rnn(rng, kind, 3, 5)
    x = rng.normal(size=(1, 2, 3))
    out = rnn_unroll(Tensor(x), kind, ps, Tape()).data[0]
    t = Tape()
    inp = Tensor(x[0])
    for k in range(2):
        p = layer_params(ps, k)
        if kind == "lstm":
            inp, _ = lstm_step(inp, Tensor(np.zeros((2, 5))), Tensor(np.zeros((2, 5))), p, t)
        else:
            inp = (vrnn_step if kind == "vrnn" else gru_step)(inp, Tensor(np.zeros((2, 5))), p, t)
    np.testing.assert_allclose(out, inp.data, atol=1e-14)


def test_unroll_zero_lstm():
    ps = init_rnn(np.random.default_rng(0), "lstm", 2, 4)
    for t in ps.tensors():
        t.data[...] = 0
    assert np.all(rnn_unroll(Tensor(np.ones((6, 3, 2))), "lstm", ps, Tape()).data == 0)


def test_unroll_scalar_three_steps_manual():
    rng = np.random.default_rng(8)
    ps = init_rnn(rng, "vrnn", 1, 1)
    for t in ps.tensors():
        t.data[...] = rng.normal(size=t.shape)
    P = {k: float(v.data.reshape(-1)[0]) for k, v in ps.items()}
    xs = [0.5, -1.0, 0.25]
    h0 = h1 = 0.0
    outs = []
    for x in xs:
        h0 = math.tanh(P["l0.W_ih"] * x + P["l0.b_ih"] + P["l0.W_hh"] * h0 + P["l0.b_hh"])
        h1 = math.tanh(P["l1.W_ih"] * h0 + P["l1.b_ih"] + P["l1.W_hh"] * h1 + P["l1.b_hh"])
        outs.append(h1)
    got = rnn_unroll(Tensor(np.array(xs).reshape(3, 1, 1)), "vrnn", ps, Tape()).data.reshape(-1)
    np.testing.assert_allclose(got, outs, atol=1e-14)


def test_unroll_empty_sequence():
    ps = init_rnn(np.random.default_rng(0), "gru", 2, 3)
    with pytest.raises(ShapeError):
        rnn_unroll(Tensor(np.zeros((0, 1, 2))), "gru", ps, Tape())


@pytest.mark.parametrize("kind", ["vrnn", "lstm", "gru"])
def test_unroll_gradcheck_t10(kind):
    rng = np.random.default_rng(9)
    ps = init_rnn(rng, kind, 2, 3)
    x = Tensor(rng.normal(size=(10, 2, 2)), requires_grad=True)
    w = rng.normal(size=(10, 2, 3))
    assert grad_check(lambda t: t.sum(t.mul(rnn_unroll(x, kind, ps, t), Tensor(w))), [ps, x]) < 1e-4


@pytest.mark.parametrize("kind", ["vrnn", "lstm", "gru"])
def test_advance_matches_unroll(kind):
    rng = np.random.default_rng(10)
    ps = init_rnn(rng, kind, 3, 4)
    x = rng.normal(size=(7, 1, 3))
    hid = RecurrentHidden.zeros(RnnCellKind.parse(kind), 1, 4, 2)
    outs = np.array([advance(kind, x[t], hid, ps) for t in range(7)])
    np.testing.assert_allclose(outs, rnn_unroll(Tensor(x), kind, ps, Tape()).data, atol=1e-13)


def test_unroll_counts():
    ps = init_rnn(np.random.default_rng(0), "lstm", 2, 3)
    t = Tape()
    out = rnn_unroll(Tensor(np.ones((4, 1, 2))), "lstm", ps, t)
    backward(t, t.sum(out))
    assert t.counts["rnn_forward"] == 1 and t.counts["bptt"] == 1


# squashed gaussian ------------------------------------------------------------------

def test_squashed_gaussian_degenerate():
    t = Tape()
    a, _ = squashed_gaussian(Tensor(np.zeros((4, 1))), Tensor(np.full((4, 1), -20.0)), t,
                             rng=np.random.default_rng(0))
    assert np.all(np.abs(a.data) < 1e-8)


def test_squashed_gaussian_logprob_formula():
    mean, log_std, eps = np.array([[0.3, -0.5]]), np.array([[-0.2, 0.4]]), np.array([[0.1, -1.2]])
    a, logp = squashed_gaussian(Tensor(mean), Tensor(log_std), Tape(), noise=eps)
    u = mean + np.exp(log_std) * eps
    gauss = -0.5 * ((u - mean) / np.exp(log_std)) ** 2 - log_std - 0.5 * np.log(2 * np.pi)
    expect = np.sum(gauss - np.log(1 - np.tanh(u) ** 2 + 1e-6))
    assert logp.data[0, 0] == pytest.approx(expect, abs=1e-12)
    np.testing.assert_allclose(a.data, np.tanh(u))


def test_squashed_gaussian_mean_matches_quadrature():
    mu, s = 0.4, 0.8
    rng = np.random.default_rng(11)
    a, _ = squashed_gaussian(Tensor(np.full((100_000, 1), mu)), Tensor(np.full((100_000, 1), np.log(s))),
                             Tape(record=False), rng=rng)
    # Gauss-Hermite quadrature of E[tanh(mu + s Z)]
    z, w = np.polynomial.hermite_e.hermegauss(80)
    expect = np.sum(w * np.tanh(mu + s * z)) / np.sqrt(2 * np.pi)
    se = a.data.std() / np.sqrt(a.data.size)
    assert abs(a.data.mean() - expect) < 4 * se


def test_squashed_gaussian_gradcheck():
    rng = np.random.default_rng(12)
    mean = Tensor(rng.normal(size=(3, 2)), requires_grad=True)
    log_std = Tensor(rng.uniform(-1, 0.5, size=(3, 2)), requires_grad=True)
    eps = rng.normal(size=(3, 2))

    def f(t):
        a, logp = squashed_gaussian(mean, log_std, t, noise=eps)
        return t.add(t.sum(logp), t.sum(t.square(a)))

    assert grad_check(f, [mean, log_std]) < 1e-4


# optimiser and targets ---------------------------------------------------------------

def test_adam_first_step():
    ps = ParamSet()
    p = ps.add("w", [1.0, -2.0, 0.5])
    g = np.array([0.3, -4.0, 1e-3])
    p.grad = g.copy()
    adam_step(ps, 1e-3)
    # bias correction makes the first step lr * g / (|g| + eps)
    np.testing.assert_allclose(p.data, [1.0, -2.0, 0.5] - 1e-3 * g / (np.abs(g) + 1e-8), rtol=0, atol=1e-15)
    assert np.all(p.grad == 0)


def test_adam_zero_grad_is_noop():
    ps = ParamSet()
    p = ps.add("w", [1.0, 2.0])
    adam_step(ps, 0.1)
    np.testing.assert_array_equal(p.data, [1.0, 2.0])


def test_adam_moment_recurrence():
    ps = ParamSet()
    p = ps.add("w", [0.0])
    m = v = 0.0
    for g in (0.5, 0.5):
        p.grad = np.array([g])
        adam_step(ps, 1e-2)
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
    assert ps.adam_m["w"][0] == pytest.approx(m, abs=1e-15)
    assert ps.adam_v["w"][0] == pytest.approx(v, abs=1e-15)
    assert ps.step_count == 2


def test_adam_rejects_nonfinite_grad():
    ps = ParamSet()
    p = ps.add("w", [0.0])
    p.grad = np.array([np.inf])
    with pytest.raises(NumericError):
        adam_step(ps, 1e-3)


def _pair(t_val, o_val):
    tg, on = ParamSet(), ParamSet()
    tg.add("w", [t_val])
    on.add("w", [o_val])
    return tg, on


def test_polyak_examples():
    tg, on = _pair(1.0, 0.0)
    polyak_update(tg, on, 0.995)
    assert tg["w"].data[0] == pytest.approx(0.995, abs=1e-15)
    tg, on = _pair(1.0, 3.0)
    polyak_update(tg, on, 1.0)
    assert tg["w"].data[0] == 1.0
    polyak_update(tg, on, 0.0)
    assert tg["w"].data[0] == 3.0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 0.999), st.integers(1, 40))
def test_polyak_drift_geometric(rho, k):
    tg, on = _pair(2.0, -1.0)
    for _ in range(k):
        polyak_update(tg, on, rho)
    assert tg["w"].data[0] - on["w"].data[0] == pytest.approx(3.0 * rho ** k, rel=1e-9, abs=1e-12)


def test_serialization_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    arrays = {"a": rng.normal(size=(2, 3)), "b/c": rng.normal(size=4), "s": np.array(1.5)}
    save_arrays(tmp_path / "x.rocp", arrays)
    back = load_arrays(tmp_path / "x.rocp")
    assert list(back) == list(arrays)
    for k in arrays:
        assert back[k].tobytes() == np.asarray(arrays[k]).tobytes()
    sets = {"actor": init_mlp(rng, 2, 1, (3,)), "rnn": init_rnn(rng, "gru", 2, 3)}
    save_paramsets(tmp_path / "y.rocp", sets)
    fresh = {"actor": init_mlp(rng, 2, 1, (3,)), "rnn": init_rnn(rng, "gru", 2, 3)}
    load_paramsets(tmp_path / "y.rocp", fresh)
    for name in sets:
        for k, t in sets[name].items():
            np.testing.assert_array_equal(fresh[name][k].data, t.data)


def test_load_rejects_bad_magic(tmp_path):
    (tmp_path / "bad").write_bytes(b"NOPE!")
    with pytest.raises(ValueError):
        load_arrays(tmp_path / "bad")
