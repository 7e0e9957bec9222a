"""Mini-batch trainer: AdaGrad on model weights, plain SGD on embeddings."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import csv
import logging

import numpy as np

from .model import BILSTM, DENSE_BLOCKS, accuracy
from .numeric import NumericError, Tape, rng
from .regularizers import Gradients, RegularizerConfig, l2_penalty, loss_and_grads

log = logging.getLogger(__name__)

ADAGRAD_EPS = 1e-6


@dataclass
class TrainConfig:
    adagrad_lr: float = 0.1
    embed_lr: float = 0.2
    batch_size: int = 25
    max_batches: int = 3000
    dropout_p: float = 0.5
    eval_every: int = 100
    seed: int = 0
    clip_norm: float = 5.0      # 0 disables clipping
    threads: int = 1
    reg: RegularizerConfig = field(default_factory=RegularizerConfig)
    split_ratios: tuple = (0.8, 0.1, 0.1)

    def __post_init__(self):
        if self.adagrad_lr <= 0 or self.embed_lr <= 0:
            raise ValueError("learning rates must be positive")
        if self.batch_size < 1 or self.eval_every < 1 or self.threads < 1:
            raise ValueError("batch_size, eval_every and threads must be >= 1")
        if self.max_batches < 0:
            raise ValueError("max_batches must be >= 0")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError("dropout_p must lie in [0, 1)")


@dataclass
class OptimizerState:
    accum: dict

    @classmethod
    def zeros_like(cls, params):
        return cls({k: np.zeros_like(params[k]) for k in DENSE_BLOCKS})


@dataclass
class EvalRecord:
    batch: int
    train_loss: float
    valid_acc: float


@dataclass
class TrainLog:
    records: list = field(default_factory=list)
    best: int = None          # index into records
    error: str = None

    @property
    def best_record(self):
        return None if self.best is None else self.records[self.best]

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["batch", "loss", "valid_acc"])
            for r in self.records:
                w.writerow([r.batch, repr(r.train_loss), repr(r.valid_acc)])


def adagrad_step(param, grad, accum, lr):
    """In place: ``G += g^2; theta -= lr * g / (sqrt(G) + eps)``."""
    if not np.all(np.isfinite(grad)):
        raise NumericError("non-finite gradient in AdaGrad step")
    accum += grad * grad
    param -= lr * grad / (np.sqrt(accum) + ADAGRAD_EPS)
    return param


def sgd_embedding_step(E, row_grads, lr):
    """Sparse in-place update of the rows that received gradient."""
    for row in sorted(row_grads):
        E[row] -= lr * row_grads[row]
    return E


def clip_gradients(grads, max_norm):
    norm = grads.global_norm()
    if max_norm and norm > max_norm:
        scale = max_norm / norm
        grads.dense = {k: g * scale for k, g in grads.dense.items()}
        grads.embedding = {k: g * scale for k, g in grads.embedding.items()}
    return norm


def regularized_objective(params, batch, reg, masks, p_drop, threads):
    loss, grads, _ = loss_and_grads(params, batch, reg, masks, p_drop, threads)
    return loss, grads


def cross_entropy_objective(params, batch, reg, masks, p_drop, threads):
    """Plain ``sum CE + beta ||theta||^2`` with no regularizer machinery.

    The baseline trainer; ``reg`` only supplies beta.
    """
    def one(k):
        s = batch[k]
        tape = Tape()
        pv = {name: tape.var(params[name]) for name in DENSE_BLOCKS}
        ids = params.token_ids(s.tokens)
        X = tape.var(params["E"][ids])
        Hb = tape.lstm(X, pv["W"], pv["U"], pv["b"], reverse=True)
        if params.variant == BILSTM:
            Hf = tape.lstm(X, pv["W"], pv["U"], pv["b"], reverse=False)
            rep = tape.concat(tape.row(Hf, len(ids) - 1), tape.row(Hb, 0))
        else:
            rep = tape.row(Hb, 0)
        if masks[k] is not None:
            rep = tape.mul_const(rep, masks[k] / (1.0 - p_drop))
        loss = tape.nll(tape.softmax(tape.affine(pv["S"], rep, pv["Sb"])), int(s.label))
        tape.backward(loss)
        return float(loss.value), {k2: v.grad for k2, v in pv.items() if v.grad is not None}, ids, X.grad

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(one, range(len(batch))))
    else:
        results = [one(k) for k in range(len(batch))]
    total = 0.0
    dense = {k: np.zeros_like(params[k]) for k in DENSE_BLOCKS}
    emb = {}
    for loss, grads, ids, gX in results:
        total += loss
        for k, g in grads.items():
            dense[k] += g
        for row, g in zip(ids.tolist(), gX):
            emb[row] = emb[row] + g if row in emb else g.copy()
    if reg.beta:
        total += l2_penalty(params, reg.beta)
        for k in DENSE_BLOCKS:
            dense[k] += 2.0 * reg.beta * params[k]
    if not np.isfinite(total):
        raise NumericError(f"non-finite batch loss {total}")
    return total, Gradients(dense, emb)


def _index_stream(n, seed):
    epoch = 0
    while True:
        for i in rng(seed, "shuffle", epoch).permutation(n):
            yield int(i)
        epoch += 1


def dropout_masks(seed, batch_index, count, size, p):
    if p <= 0:
        return [None] * count
    r = rng(seed, "dropout", batch_index)
    return [(r.random(size) >= p).astype(np.float64) for _ in range(count)]


def train(train_set, valid_set, params, config, objective=None, on_eval=None):
    """Train ``params`` in place; return ``(best_params, TrainLog)``.

    Sentences must carry roles. Validation runs every ``eval_every`` batches and
    after the last one; the returned parameters are a copy taken at the best
    validation accuracy (earliest on ties).
    """
    if len(train_set) == 0 or len(valid_set) == 0:
        raise ValueError("train and validation sets must be nonempty")
    objective = objective or regularized_objective
    train_sents = list(train_set)
    valid_sents = list(valid_set)
    state = OptimizerState.zeros_like(params)
    stream = _index_stream(len(train_sents), config.seed)
    tlog = TrainLog()
    best_params = None
    losses = []

    def evaluate_now(batch_index):
        nonlocal best_params
        acc = accuracy(params, valid_sents)
        mean_loss = float(np.mean(losses)) if losses else float("nan")
        losses.clear()
        tlog.records.append(EvalRecord(batch_index, mean_loss, acc))
        if tlog.best is None or acc > tlog.records[tlog.best].valid_acc:
            tlog.best = len(tlog.records) - 1
            best_params = params.copy()
        log.info("batch %d  loss %.4f  valid acc %.4f", batch_index, mean_loss, acc)
        if on_eval is not None:
            on_eval(tlog.records[-1])

    try:
        for bi in range(1, config.max_batches + 1):
            batch = [train_sents[next(stream)] for _ in range(config.batch_size)]
            masks = dropout_masks(config.seed, bi, len(batch), params.h_dim, config.dropout_p)
            loss, grads = objective(params, batch, config.reg, masks, config.dropout_p, config.threads)
            clip_gradients(grads, config.clip_norm)
            for k in DENSE_BLOCKS:
                adagrad_step(params.arrays[k], grads.dense[k], state.accum[k], config.adagrad_lr)
            sgd_embedding_step(params.arrays["E"], grads.embedding, config.embed_lr)
            losses.append(loss)
            if bi % config.eval_every == 0 and bi != config.max_batches:
                evaluate_now(bi)
        evaluate_now(config.max_batches)
    except NumericError as exc:
        log.error("training aborted: %s", exc)
        tlog.error = str(exc)
        if best_params is None:
            raise
    return best_params, tlog
