import numpy as np
import pytest

from lrlstm import kernels
from lrlstm.model import lstm_cell

from conftest import fd_grad


def _weights(seed, n=5, d=4, d_in=3):
    r = np.random.default_rng(seed)
    X = r.normal(size=(n, d_in))
    W = r.normal(scale=0.5, size=(4 * d, d_in))
    U = r.normal(scale=0.5, size=(4 * d, d))
    b = r.normal(scale=0.1, size=4 * d)
    return X, W, U, b


def _unrolled(X, W, U, b, reverse):
    d = U.shape[1]
    h, c = np.zeros(d), np.zeros(d)
    H = np.zeros((len(X), d))
    order = range(len(X) - 1, -1, -1) if reverse else range(len(X))
    for t in order:
        c, h = lstm_cell(c, h, X[t], W, U, b)
        H[t] = h
    return H


def test_scalar_cell_pinned():
    # one-unit cell, unit weights, zero state, x = 1: c = s(1) tanh(1), h = s(1) tanh(c)
    one = np.ones((4, 1))
    c, h = lstm_cell(np.zeros(1), np.zeros(1), np.ones(1), one, one, np.zeros(4))
    assert c[0] == pytest.approx(0.5567699411459397, abs=1e-12)
    assert h[0] == pytest.approx(0.36960635293570576, abs=1e-12)


@pytest.mark.parametrize("reverse", [False, True])
def test_forward_matches_cell_unroll(backend, reverse):
    X, W, U, b = _weights(0)
    H, _, _ = kernels.lstm_forward(X, W, U, b, reverse)
    np.testing.assert_allclose(H, _unrolled(X, W, U, b, reverse), rtol=0, atol=1e-12)


@pytest.mark.parametrize("reverse", [False, True])
def test_backends_agree(reverse):
    if len(kernels.BACKENDS) < 2:
        pytest.skip("compiled kernels not built")
    X, W, U, b = _weights(1, n=9, d=7, d_in=5)
    dH = np.random.default_rng(2).normal(size=(9, 7))
    out = {}
    for name in kernels.BACKENDS:
        prev = kernels.set_backend(name)
        try:
            fwd = kernels.lstm_forward(X, W, U, b, reverse)
            out[name] = fwd + kernels.lstm_backward(dH, X, W, U, *fwd, reverse)
        finally:
            kernels.set_backend(prev)
    for a, c in zip(out["compiled"], out["python"]):
        np.testing.assert_allclose(a, c, rtol=0, atol=1e-12)


@pytest.mark.parametrize("reverse", [False, True])
def test_backward_matches_finite_differences(backend, reverse):
    X, W, U, b = _weights(3)
    w = np.random.default_rng(4).normal(size=(5, 4))
    H, C, G = kernels.lstm_forward(X, W, U, b, reverse)
    grads = kernels.lstm_backward(w, X, W, U, H, C, G, reverse)
    args = [X, W, U, b]
    for k in range(4):
        def f(v, k=k):
            a = list(args)
            a[k] = v
            return float(np.sum(w * kernels.lstm_forward(*a, reverse)[0]))
        np.testing.assert_allclose(grads[k], fd_grad(f, args[k]), rtol=1e-6, atol=1e-8)


def test_reverse_is_forward_on_flipped_input(backend):
    X, W, U, b = _weights(5)
    Hr, _, _ = kernels.lstm_forward(X, W, U, b, reverse=True)
    Hf, _, _ = kernels.lstm_forward(X[::-1].copy(), W, U, b)
    np.testing.assert_allclose(Hr, Hf[::-1], rtol=0, atol=1e-14)


def test_prefix_only_depends_on_prefix(backend):
    X, W, U, b = _weights(6, n=6)
    H1, _, _ = kernels.lstm_forward(X, W, U, b)
    X2 = X.copy()
    X2[4:] += 1.0
    H2, _, _ = kernels.lstm_forward(X2, W, U, b)
    np.testing.assert_array_equal(H1[:4], H2[:4])
    assert not np.allclose(H1[4:], H2[4:])


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        kernels.set_backend("gpu")
