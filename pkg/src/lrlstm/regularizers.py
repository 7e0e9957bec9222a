"""Linguistic regularizers and the full training objective.

Each position of a sentence gets at most one regularizer, chosen by the role of
its token: non-sentiment (NSR), sentiment (SR), negation (NR) or intensity (IR).
All four compare the position-wise distribution p_t with a candidate built from
a neighbouring position and charge ``max(0, sym_kl - margin)``.

"Previous" always means the position processed just before t by the encoder
that produced p_t: t+1 for the right-to-left LSTM, t-1 for the forward half of
the Bi-LSTM and t+1 for its backward half.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import csv

import numpy as np

from .model import BILSTM, DENSE_BLOCKS, LSTM
from .numeric import NumericError, Tape
from .resources import INTENSIFIER, NEGATOR, SENTIMENT

NSR, SR, NR, IR = "nsr", "sr", "nr", "ir"
ALL_REGULARIZERS = (NSR, SR, NR, IR)
_ROLE_TAG = {NEGATOR: NR, INTENSIFIER: IR, SENTIMENT: SR}

PREV, NEXT = "prev", "next"


@dataclass(frozen=True)
class RegularizerConfig:
    alpha: float = 0.5
    margin: float = 0.3
    beta: float = 1e-4
    enabled: frozenset = field(default_factory=lambda: frozenset(ALL_REGULARIZERS))

    def __post_init__(self):
        if min(self.alpha, self.margin, self.beta) < 0:
            raise ValueError("alpha, margin and beta must be nonnegative")
        unknown = set(self.enabled) - set(ALL_REGULARIZERS)
        if unknown:
            raise ValueError(f"unknown regularizer(s): {sorted(unknown)}")
        object.__setattr__(self, "enabled", frozenset(self.enabled))

    def without(self, *tags):
        return RegularizerConfig(self.alpha, self.margin, self.beta, self.enabled - set(tags))


@dataclass
class PositionLoss:
    position: int
    tag: str
    divergence: float
    loss: float
    side: str = PREV


def assign_regularizer(roles, config, variant=None):
    """Regularizer tag (or None) per position.

    With ``variant`` given, positions whose required neighbour does not exist
    are None: for the right-to-left LSTM NSR/SR need position t+1 and NR/IR need
    either neighbour; for the Bi-LSTM every tag needs either neighbour.
    """
    n = len(roles)
    tags = []
    for t, role in enumerate(roles):
        tag = _ROLE_TAG.get(role.kind, NSR)
        if tag not in config.enabled:
            tag = None
        elif variant is not None:
            has_prev, has_next = t + 1 < n, t > 0
            if variant == LSTM and tag in (NSR, SR):
                ok = has_prev
            else:
                ok = has_prev or has_next
            if not ok:
                tag = None
        tags.append(tag)
    return tags


# -- tape-level losses ---------------------------------------------------------

def _hinged(tape, p_t, cand, margin):
    div = tape.sym_kl(p_t, cand)
    return tape.hinge(div, margin), float(div.value)


def _nsr(tape, p_t, p_nb, margin):
    return _hinged(tape, p_t, p_nb, margin)


def _sr(tape, p_t, p_nb, s, margin):
    # sym_kl floors and renormalizes its arguments, which is the projection of
    # p_nb + s back onto the simplex; projecting here too would floor twice
    return _hinged(tape, p_t, tape.add(p_nb, s), margin)


def _transformed(tape, T, p_nb):
    return tape.softmax(tape.matvec(T, p_nb))


def _min_branch(branches):
    """Pick the smallest hinged loss; ties keep the earliest (previous) branch."""
    best = None
    for side, (loss, div) in branches:
        if best is None or float(loss.value) < float(best[1].value):
            best = (side, loss, div)
    return best


def _transform(tape, p_t, p_prev, p_next, T, margin):
    branches = []
    if p_prev is not None:
        branches.append((PREV, _hinged(tape, p_t, _transformed(tape, T, p_prev), margin)))
    if p_next is not None:
        branches.append((NEXT, _hinged(tape, p_t, _transformed(tape, T, p_next), margin)))
    if not branches:
        raise ValueError("transform regularizer needs at least one neighbour")
    return _min_branch(branches)


# -- plain wrappers ------------------------------------------------------------

def _v(tape, x):
    return None if x is None else tape.var(x)


def nsr_loss(p_t, p_neighbor, margin):
    tape = Tape()
    loss, _ = _nsr(tape, _v(tape, p_t), _v(tape, p_neighbor), margin)
    return float(loss.value)


def sr_loss(p_t, p_neighbor, shift, margin):
    tape = Tape()
    loss, _ = _sr(tape, _v(tape, p_t), _v(tape, p_neighbor), _v(tape, shift), margin)
    return float(loss.value)


def transform_loss(p_t, p_prev, p_next, T, margin):
    """Returns ``(loss, side)`` with side ``"prev"`` or ``"next"``."""
    tape = Tape()
    side, loss, _ = _transform(tape, _v(tape, p_t), _v(tape, p_prev), _v(tape, p_next),
                               _v(tape, T), margin)
    return float(loss.value), side


def bidirectional_reg_loss(p_fwd, p_bwd, t, tag, margin, shift=None, T=None):
    """Two-sided regularizer at position t of a Bi-LSTM encoding.

    ``p_fwd``/``p_bwd`` are ``n x C`` position-wise distributions of the two
    directions. The forward branch compares p_fwd[t] with a candidate built from
    p_fwd[t-1]; the backward branch compares p_bwd[t] with one built from
    p_bwd[t+1]. Returns ``(loss, side)``, or ``(0.0, None)`` with no neighbour.
    """
    tape = Tape()
    Pf, Pb = tape.var(p_fwd), tape.var(p_bwd)
    out = _bi_position(tape, Pf, Pb, t, tag, _v(tape, shift), _v(tape, T), margin)
    if out is None:
        return 0.0, None
    side, loss, _ = out
    return float(loss.value), side


def _candidate(tape, tag, p_nb, shift, T):
    if tag == NSR:
        return p_nb
    if tag == SR:
        return tape.add(p_nb, shift)
    return _transformed(tape, T, p_nb)


def _bi_position(tape, Pf, Pb, t, tag, shift, T, margin):
    n = Pf.value.shape[0]
    branches = []
    if t > 0:
        p_t = tape.row(Pf, t)
        cand = _candidate(tape, tag, tape.row(Pf, t - 1), shift, T)
        branches.append((PREV, _hinged(tape, p_t, cand, margin)))
    if t + 1 < n:
        p_t = tape.row(Pb, t)
        cand = _candidate(tape, tag, tape.row(Pb, t + 1), shift, T)
        branches.append((NEXT, _hinged(tape, p_t, cand, margin)))
    if not branches:
        return None
    return _min_branch(branches)


# -- objective -----------------------------------------------------------------

def _param_vars(tape, params):
    return {name: tape.var(params[name]) for name in DENSE_BLOCKS}


def sentence_objective(tape, pv, params, ids, roles, label, config, mask=None, p_drop=0.5):
    """Record one sentence's loss on ``tape``.

    Returns ``(loss_var, X_var, breakdown)``; ``loss_var`` is cross entropy plus
    alpha times the sum of regularizer terms (L2 is added per batch).
    """
    n = len(ids)
    if n == 0:
        raise ValueError("empty sentence")
    X = tape.var(params["E"][ids])
    W, U, b, S, Sb = pv["W"], pv["U"], pv["b"], pv["S"], pv["Sb"]
    d = params.d
    Hb = tape.lstm(X, W, U, b, reverse=True)
    if params.variant == BILSTM:
        Hf = tape.lstm(X, W, U, b, reverse=False)
        rep = tape.concat(tape.row(Hf, n - 1), tape.row(Hb, 0))
    else:
        rep = tape.row(Hb, 0)
    if mask is not None:
        rep = tape.mul_const(rep, mask / (1.0 - p_drop))
    y = tape.softmax(tape.affine(S, rep, Sb))
    ce = tape.nll(y, int(label))

    tags = assign_regularizer(roles, config, params.variant) if config.enabled else [None] * n
    breakdown = []
    terms = []
    if any(tags):
        if params.variant == BILSTM:
            Pf = tape.softmax(tape.affine_rows(Hf, S, Sb, col=0))
            Pb = tape.softmax(tape.affine_rows(Hb, S, Sb, col=d))
        else:
            P = tape.softmax(tape.affine_rows(Hb, S, Sb))
        for t, tag in enumerate(tags):
            if tag is None:
                continue
            role = roles[t]
            shift = T = None
            if tag == SR:
                shift = tape.row(pv["shift"], role.lex_class)
            elif tag == NR:
                T = tape.row(pv["T_neg"], params.neg_index[role.entry])
            elif tag == IR:
                T = tape.row(pv["T_int"], params.int_index[role.entry])
            if params.variant == BILSTM:
                side, loss, div = _bi_position(tape, Pf, Pb, t, tag, shift, T, config.margin)
            else:
                p_t = tape.row(P, t)
                p_prev = tape.row(P, t + 1) if t + 1 < n else None
                if tag in (NSR, SR):
                    side = PREV
                    if tag == NSR:
                        loss, div = _nsr(tape, p_t, p_prev, config.margin)
                    else:
                        loss, div = _sr(tape, p_t, p_prev, shift, config.margin)
                else:
                    p_next = tape.row(P, t - 1) if t > 0 else None
                    side, loss, div = _transform(tape, p_t, p_prev, p_next, T, config.margin)
            terms.append(loss)
            breakdown.append(PositionLoss(t, tag, div, float(loss.value), side))
    if terms:
        total = tape.add(ce, tape.scale(tape.sum(terms), config.alpha))
    else:
        total = ce
    return total, X, breakdown


def l2_penalty(params, beta):
    return beta * sum(float(np.sum(params[k] * params[k])) for k in DENSE_BLOCKS)


def _sentence_grads(params, sentence, config, mask, p_drop):
    tape = Tape()
    pv = _param_vars(tape, params)
    ids = params.token_ids(sentence.tokens)
    loss, X, breakdown = sentence_objective(tape, pv, params, ids, sentence.roles,
                                            sentence.label, config, mask, p_drop)
    tape.backward(loss)
    grads = {k: v.grad for k, v in pv.items() if v.grad is not None}
    return float(loss.value), grads, (ids, X.grad), breakdown


@dataclass
class Gradients:
    dense: dict          # block name -> array
    embedding: dict      # vocab row -> gradient row

    def global_norm(self):
        sq = sum(float(np.sum(g * g)) for g in self.dense.values())
        sq += sum(float(np.sum(g * g)) for g in self.embedding.values())
        return float(np.sqrt(sq))


def loss_and_grads(params, batch, config, masks=None, p_drop=0.5, threads=1):
    """Batch objective ``sum CE + alpha sum L + beta ||theta||^2`` and its gradient.

    Sentences are processed independently (optionally on ``threads`` workers)
    and reduced in batch order, so results do not depend on ``threads``.
    ``batch`` sentences must carry roles.
    """
    if not batch:
        raise ValueError("empty batch")
    masks = masks if masks is not None else [None] * len(batch)

    def work(k):
        return _sentence_grads(params, batch[k], config, masks[k], p_drop)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, range(len(batch))))
    else:
        results = [work(k) for k in range(len(batch))]

    total = 0.0
    dense = {k: np.zeros_like(params[k]) for k in DENSE_BLOCKS}
    emb = {}
    breakdowns = []
    for loss, grads, (ids, gX), breakdown in results:
        total += loss
        for k, g in grads.items():
            dense[k] += g
        if gX is not None:
            for row, g in zip(ids.tolist(), gX):
                if row in emb:
                    emb[row] = emb[row] + g
                else:
                    emb[row] = g.copy()
        breakdowns.append(breakdown)
    if config.beta:
        total += l2_penalty(params, config.beta)
        for k in DENSE_BLOCKS:
            dense[k] += 2.0 * config.beta * params[k]
    if not np.isfinite(total):
        raise NumericError(f"non-finite batch loss {total}")
    return total, Gradients(dense, emb), breakdowns


def total_loss(batch, params, config, masks=None, p_drop=0.5):
    """Scalar objective and per-sentence position breakdowns."""
    loss, _, breakdowns = loss_and_grads(params, batch, config, masks, p_drop)
    return loss, breakdowns


def write_breakdown_csv(breakdowns, path, sentence_ids=None):
    sentence_ids = sentence_ids or range(len(breakdowns))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["sentence_id", "position", "tag", "divergence", "hinged_loss", "side"])
        for sid, rows in zip(sentence_ids, breakdowns):
            for r in rows:
                w.writerow([sid, r.position, r.tag, repr(r.divergence), repr(r.loss), r.side])
