"""Differentiable numeric core.

A small reverse-mode tape over numpy float64 arrays. Each op computes its
forward value eagerly and records a closure that pushes the output gradient to
its inputs. Ops whose output never received a gradient are skipped during the
backward sweep, so unused branches (the losing side of a min) cost nothing.

Also home to the plain (tape-free) probability helpers, the seeded RNG streams
and the finite-difference gradient checker.
"""

from dataclasses import dataclass
import hashlib

import numpy as np

from . import kernels

PROB_FLOOR = 1e-8


class DimensionError(ValueError):
    pass


class NumericError(ArithmeticError):
    pass


# -- plain helpers ---------------------------------------------------------

def softmax(v):
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise DimensionError("softmax of an empty vector")
    e = np.exp(v - v.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def floor_simplex(p, eps=PROB_FLOOR):
    """Clamp entries at ``eps`` and renormalize onto the simplex."""
    q = np.maximum(np.asarray(p, dtype=np.float64), eps)
    return q / q.sum()


def sym_kl(p, q):
    """Symmetric KL divergence ``(KL(p||q) + KL(q||p)) / 2`` in nats.

    Both arguments are floored first, so exact zeros are tolerated.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise DimensionError(f"sym_kl length mismatch: {p.shape} vs {q.shape}")
    p = floor_simplex(p)
    q = floor_simplex(q)
    return float(0.5 * np.sum((p - q) * (np.log(p) - np.log(q))))


def margin_hinge(x, margin):
    return max(0.0, x - margin)


# -- RNG streams ------------------------------------------------------------

def rng(seed, *stream):
    """Philox generator keyed by ``seed`` plus a stream label.

    ``rng(7, "init")`` and ``rng(7, "shuffle", 3)`` are independent streams; the
    same arguments always give the same stream on every platform.
    """
    h = hashlib.blake2b(digest_size=16)
    h.update(int(seed).to_bytes(8, "little", signed=False))
    for part in stream:
        h.update(b"\x00")
        h.update(str(part).encode("utf-8"))
    key = int.from_bytes(h.digest(), "little")
    return np.random.Generator(np.random.Philox(key=key))


# -- tape --------------------------------------------------------------------

class Var:
    __slots__ = ("value", "grad")

    def __init__(self, value):
        self.value = value
        self.grad = None

    def _acc(self, g):
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True)
        else:
            self.grad = self.grad + g

    def __repr__(self):
        return f"Var({self.value!r})"


class Tape:
    """Records ops in order; ``backward`` replays them once, newest first."""

    def __init__(self):
        self._ops = []

    def __len__(self):
        return len(self._ops)

    def var(self, value):
        return Var(np.asarray(value, dtype=np.float64))

    def _record(self, out, fn):
        self._ops.append((out, fn))
        return out

    def backward(self, out, seed_grad=1.0):
        out.grad = np.asarray(seed_grad, dtype=np.float64) * np.ones_like(out.value)
        for node, fn in reversed(self._ops):
            if node.grad is not None:
                fn(node.grad)

    # elementwise / linear algebra

    def add(self, a, b):
        out = Var(a.value + b.value)

        def back(g):
            a._acc(g)
            b._acc(g)
        return self._record(out, back)

    def sum(self, xs):
        """Sum of scalar vars, accumulated left to right."""
        xs = list(xs)
        total = xs[0].value
        for x in xs[1:]:
            total = total + x.value
        out = Var(np.asarray(total, dtype=np.float64))

        def back(g):
            for x in xs:
                x._acc(g)
        return self._record(out, back)

    def scale(self, a, c):
        out = Var(a.value * c)
        return self._record(out, lambda g: a._acc(g * c))

    def mul_const(self, a, arr):
        """Elementwise product with a constant array (dropout masks)."""
        out = Var(a.value * arr)
        return self._record(out, lambda g: a._acc(g * arr))

    def matvec(self, A, x):
        out = Var(A.value @ x.value)

        def back(g):
            A._acc(np.outer(g, x.value))
            x._acc(A.value.T @ g)
        return self._record(out, back)

    def affine(self, S, x, b):
        out = Var(S.value @ x.value + b.value)

        def back(g):
            S._acc(np.outer(g, x.value))
            x._acc(S.value.T @ g)
            b._acc(g)
        return self._record(out, back)

    def affine_rows(self, H, S, b, col=0):
        """Row-wise ``H @ S[:, col:col+d].T + b`` for an ``n x d`` matrix ``H``."""
        d = H.value.shape[1]
        Ssub = S.value[:, col:col + d]
        out = Var(H.value @ Ssub.T + b.value)

        def back(g):
            gS = np.zeros_like(S.value)
            gS[:, col:col + d] = g.T @ H.value
            S._acc(gS)
            H._acc(g @ Ssub)
            b._acc(g.sum(axis=0))
        return self._record(out, back)

    def row(self, M, i):
        out = Var(M.value[i].copy())

        def back(g):
            gm = np.zeros_like(M.value)
            gm[i] = g
            M._acc(gm)
        return self._record(out, back)

    def concat(self, a, b):
        na = a.value.shape[0]
        out = Var(np.concatenate([a.value, b.value]))

        def back(g):
            a._acc(g[:na])
            b._acc(g[na:])
        return self._record(out, back)

    def sum_squares(self, a):
        out = Var(np.asarray(np.sum(a.value * a.value)))
        return self._record(out, lambda g: a._acc(2.0 * g * a.value))

    # probability ops

    def softmax(self, v):
        """Softmax over the last axis (vectors or row-stacked matrices)."""
        if v.value.size == 0:
            raise DimensionError("softmax of an empty vector")
        p = softmax(v.value)
        out = Var(p)

        def back(g):
            v._acc(p * (g - np.sum(g * p, axis=-1, keepdims=True)))
        return self._record(out, back)

    def floor_simplex(self, p, eps=PROB_FLOOR):
        raw = p.value
        keep = raw > eps
        q = np.where(keep, raw, eps)
        z = q.sum()
        out = Var(q / z)

        def back(g):
            dq = (g - np.dot(g, q) / z) / z
            p._acc(np.where(keep, dq, 0.0))
        return self._record(out, back)

    def sym_kl(self, p, q):
        if p.value.shape != q.value.shape:
            raise DimensionError(f"sym_kl length mismatch: {p.value.shape} vs {q.value.shape}")
        pf = self.floor_simplex(p)
        qf = self.floor_simplex(q)
        a, b = pf.value, qf.value
        la, lb = np.log(a), np.log(b)
        out = Var(np.asarray(0.5 * np.sum((a - b) * (la - lb))))

        def back(g):
            pf._acc(0.5 * g * (la - lb + 1.0 - b / a))
            qf._acc(0.5 * g * (lb - la + 1.0 - a / b))
        return self._record(out, back)

    def hinge(self, x, margin):
        """``max(0, x - margin)``; subgradient 0 at the kink."""
        active = float(x.value) > margin
        out = Var(np.asarray(float(x.value) - margin if active else 0.0))

        def back(g):
            if active:
                x._acc(g)
        return self._record(out, back)

    def nll(self, p, label):
        """``-log p[label]`` on the floored distribution."""
        pf = self.floor_simplex(p)
        out = Var(np.asarray(-np.log(pf.value[label])))

        def back(g):
            gp = np.zeros_like(pf.value)
            gp[label] = -g / pf.value[label]
            pf._acc(gp)
        return self._record(out, back)

    # sequence kernel

    def lstm(self, X, W, U, b, reverse=False):
        """Whole-sequence LSTM from a zero state; returns the ``n x d`` hidden states."""
        H, C, G = kernels.lstm_forward(X.value, W.value, U.value, b.value, reverse)
        out = Var(H)

        def back(g):
            dX, dW, dU, db = kernels.lstm_backward(
                g, X.value, W.value, U.value, H, C, G, reverse
            )
            X._acc(dX)
            W._acc(dW)
            U._acc(dU)
            b._acc(db)
        return self._record(out, back)


# -- gradient checking -----------------------------------------------------

@dataclass
class GradCheckResult:
    max_error: float
    worst: tuple  # (param name, flat index)
    checked: int

    def passed(self, tol):
        return self.max_error <= tol


def grad_check(loss_and_grad, params, h=1e-5, tol=None):
    """Compare analytic gradients with central finite differences.

    ``loss_and_grad(params)`` must return ``(loss, grads)`` with ``grads`` keyed
    like ``params``. Arrays in ``params`` are perturbed in place and restored.
    Relative error is ``|a - n| / max(|a|, |n|)``, falling back to the absolute
    error when that denominator is below 1e-8.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    _, grads = loss_and_grad(params)
    worst_err, worst_at, checked = 0.0, (None, None), 0
    for name, arr in params.items():
        analytic = np.asarray(grads.get(name, np.zeros_like(arr)), dtype=np.float64)
        flat = arr.reshape(-1)
        aflat = analytic.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            fp, _ = loss_and_grad(params)
            flat[j] = orig - h
            fm, _ = loss_and_grad(params)
            flat[j] = orig
            if not (np.isfinite(fp) and np.isfinite(fm)):
                raise NumericError(f"non-finite loss probing {name}[{j}]")
            numeric = (fp - fm) / (2 * h)
            denom = max(abs(aflat[j]), abs(numeric))
            err = abs(aflat[j] - numeric)
            if denom >= 1e-8:
                err /= denom
            checked += 1
            if err > worst_err:
                worst_err, worst_at = err, (name, j)
    result = GradCheckResult(worst_err, worst_at, checked)
    if tol is not None and not result.passed(tol):
        raise NumericError(
            f"gradient check failed: {worst_err:.3e} > {tol:.1e} at {worst_at}"
        )
    return result
