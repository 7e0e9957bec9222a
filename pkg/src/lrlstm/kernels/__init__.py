"""LSTM sequence kernels.

The step-by-step recurrence is the hot loop of training. It is served by the
compiled ``_lstm_ext`` module when it has been built, otherwise by the numpy
implementation in ``_lstm_py``. The input and weight-gradient products are
plain matrix multiplies and are shared by both backends.

Gate layout in the stacked ``4d`` axis is ``[input, forget, output, candidate]``.
"""

import numpy as np

from . import _lstm_py

try:
    from . import _lstm_ext
except ImportError:  # pragma: no cover - depends on the build
    _lstm_ext = None

BACKENDS = ("compiled", "python") if _lstm_ext is not None else ("python",)
_impl = _lstm_ext if _lstm_ext is not None else _lstm_py


def get_backend():
    return "compiled" if _impl is _lstm_ext and _lstm_ext is not None else "python"


def set_backend(name):
    """Select ``"compiled"`` or ``"python"``; returns the previous backend name."""
    global _impl
    previous = get_backend()
    if name == "python":
        _impl = _lstm_py
    elif name == "compiled":
        if _lstm_ext is None:
            raise RuntimeError("compiled LSTM kernels are not built; run `pip install -e .`")
        _impl = _lstm_ext
    else:
        raise ValueError(f"unknown backend {name!r}")
    return previous


def lstm_forward(X, W, U, b, reverse=False):
    """Run the LSTM over the rows of ``X`` from a zero state.

    Returns ``(H, C, G)``: hidden states, cell states and activated gates, each
    indexed by original token position regardless of ``reverse``.
    """
    XW = np.ascontiguousarray(X @ W.T + b)
    return _impl.forward_recurrence(XW, np.ascontiguousarray(U), bool(reverse))


def lstm_backward(dH, X, W, U, H, C, G, reverse=False):
    """Backpropagate ``dH`` (loss gradient w.r.t. every hidden state).

    Returns ``(dX, dW, dU, db)``.
    """
    dZ = _impl.backward_recurrence(
        np.ascontiguousarray(dH), np.ascontiguousarray(U), C, G, bool(reverse)
    )
    H_prev = np.zeros_like(H)
    if reverse:
        H_prev[:-1] = H[1:]
    else:
        H_prev[1:] = H[:-1]
    dW = dZ.T @ X
    dU = dZ.T @ H_prev
    db = dZ.sum(axis=0)
    dX = dZ @ W
    return dX, dW, dU, db
