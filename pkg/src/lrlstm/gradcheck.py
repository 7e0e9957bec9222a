"""Random small objective instances for finite-difference gradient checks."""

import numpy as np

from . import model
from .corpus import Sentence
from .numeric import grad_check, rng
from .regularizers import RegularizerConfig, loss_and_grads
from .resources import Lexicon, WordLists, classify_tokens

_SENTIMENT = {"good": 2, "awful": 0, "fine": 2, "great": 3, "bad": 1}
_FILLERS = ["movie", "the", "plot", "it", "was"]
_NEGATORS = ("not", "never", "do not")
_INTENSIFIERS = ("very", "too")


def _away_from_zero(r, shape, lo, hi):
    # entries that only see the L2 term need |theta| well above zero, or their
    # tiny gradients drown in finite-difference roundoff
    return r.choice([-1.0, 1.0], size=shape) * r.uniform(lo, hi, size=shape)


def small_instance(seed, variant="lstm", C=5, d=8, d_emb=6, n_sentences=3, max_len=6, margin=0.0):
    """A random regularized objective touching every regularizer.

    Every sentence holds a negator, an intensifier, a sentiment word and a filler
    somewhere, so NSR, SR, NR and IR all fire. Weights are drawn at moderate
    scale so no gradient entry is dominated by finite-difference roundoff.
    Returns ``(params, batch, config, masks)``.
    """
    r = rng(seed, "gradcheck", variant, C)
    wl = WordLists(_NEGATORS, _INTENSIFIERS)
    lex = Lexicon(dict(_SENTIMENT))
    pool_neg = ["not", "never", "do not"]
    batch = []
    for _ in range(n_sentences):
        toks = [pool_neg[r.integers(0, 3)], _INTENSIFIERS[r.integers(0, 2)],
                list(_SENTIMENT)[r.integers(0, len(_SENTIMENT))], _FILLERS[r.integers(0, len(_FILLERS))]]
        toks = " ".join(toks[k] for k in r.permutation(4)).split()[:max_len]
        while len(toks) < max_len and r.random() < 0.5:
            toks.append(_FILLERS[r.integers(0, len(_FILLERS))])
        roles = tuple(classify_tokens(toks, lex, wl))
        batch.append(Sentence(tuple(toks), int(r.integers(0, C)), roles))
    vocab = model.build_vocab([batch])
    params = model.init_params(seed, d, d_emb, C, vocab, wl, variant)
    for name in ("E", "W", "U", "b", "S", "Sb", "T_neg", "T_int"):
        params.arrays[name] = _away_from_zero(r, params[name].shape, 0.1, 0.8)
    params.arrays["shift"] = _away_from_zero(r, params["shift"].shape, 0.02, 0.08)
    config = RegularizerConfig(alpha=0.5, margin=margin, beta=1e-4)
    masks = [(r.random(params.h_dim) >= 0.5).astype(np.float64) for _ in batch]
    return params, batch, config, masks


def objective(params, batch, config, masks):
    """``loss_and_grad`` callable for :func:`grad_check`, embeddings densified."""
    def fn(_arrays):
        loss, grads, _ = loss_and_grads(params, batch, config, masks)
        out = dict(grads.dense)
        E = np.zeros_like(params["E"])
        for row, g in grads.embedding.items():
            E[row] += g
        out["E"] = E
        return loss, out
    return fn


def check(seed, variant="lstm", C=5, h=1e-5, **kw):
    params, batch, config, masks = small_instance(seed, variant, C, **kw)
    arrays = {k: params.arrays[k] for k in ("E",) + model.DENSE_BLOCKS}
    return grad_check(objective(params, batch, config, masks), arrays, h=h)
