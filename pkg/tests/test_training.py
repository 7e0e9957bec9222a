from dataclasses import replace

import numpy as np
import pytest

from lrlstm import gradcheck
from lrlstm.corpus import make_synthetic, split_dataset
from lrlstm.model import BILSTM, LSTM, build_vocab, init_params, save_checkpoint
from lrlstm.numeric import NumericError
from lrlstm.regularizers import ALL_REGULARIZERS, Gradients
from lrlstm.training import (
    ADAGRAD_EPS, TrainConfig, adagrad_step, clip_gradients, cross_entropy_objective,
    dropout_masks, regularized_objective, sgd_embedding_step, train,
)


def test_adagrad_first_step():
    theta, acc = np.array([1.0]), np.zeros(1)
    adagrad_step(theta, np.array([2.0]), acc, 0.1)
    assert theta[0] == 1.0 - 0.1 * 2.0 / (2.0 + ADAGRAD_EPS)
    assert acc[0] == 4.0


def test_adagrad_zero_gradient_is_noop():
    theta, acc = np.array([0.3, -0.2]), np.zeros(2)
    adagrad_step(theta, np.zeros(2), acc, 0.1)
    np.testing.assert_array_equal(theta, [0.3, -0.2])


def test_adagrad_rejects_nan():
    with pytest.raises(NumericError):
        adagrad_step(np.zeros(1), np.array([np.nan]), np.zeros(1), 0.1)


def test_sparse_embedding_step():
    E = np.ones((3, 2))
    sgd_embedding_step(E, {2: np.array([1.0, -1.0])}, 0.5)
    np.testing.assert_array_equal(E, [[1, 1], [1, 1], [0.5, 1.5]])


def test_clipping():
    g = Gradients({"W": np.array([3.0, 0.0])}, {0: np.array([4.0])})
    assert clip_gradients(g, 5.0) == 5.0
    np.testing.assert_array_equal(g.dense["W"], [3.0, 0.0])
    g = Gradients({"W": np.array([6.0, 0.0])}, {0: np.array([8.0])})
    clip_gradients(g, 5.0)
    assert g.global_norm() == pytest.approx(5.0, rel=1e-15)
    np.testing.assert_allclose(g.dense["W"], [3.0, 0.0])


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(dropout_p=1.0)
    with pytest.raises(ValueError):
        TrainConfig(batch_size=0)


def test_dropout_masks_are_seeded():
    a = dropout_masks(3, 7, 4, 10, 0.5)
    b = dropout_masks(3, 7, 4, 10, 0.5)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[0], dropout_masks(3, 8, 4, 10, 0.5)[0])
    assert dropout_masks(3, 7, 2, 10, 0.0) == [None, None]


@pytest.mark.parametrize("variant", [LSTM, BILSTM])
def test_disabled_regularizers_match_cross_entropy(variant):
    params, batch, config, masks = gradcheck.small_instance(2, variant)
    off = config.without(*ALL_REGULARIZERS)
    l1, g1 = regularized_objective(params, batch, off, masks, 0.5, 1)
    l2, g2 = cross_entropy_objective(params, batch, off, masks, 0.5, 1)
    assert l1 == l2
    for k in g1.dense:
        np.testing.assert_array_equal(g1.dense[k], g2.dense[k])
    assert sorted(g1.embedding) == sorted(g2.embedding)
    for k in g1.embedding:
        np.testing.assert_array_equal(g1.embedding[k], g2.embedding[k])


def _small_run(variant=LSTM, n=120, **kw):
    syn = make_synthetic(n, seed=1, words_per_class=8)
    tr, va, _ = split_dataset(syn.dataset, (0.7, 0.15, 0.15), 1)
    tr, va = (d.with_roles(syn.lexicon, syn.word_lists) for d in (tr, va))
    vocab = build_vocab([tr, va])
    params = init_params(0, 6, 6, 5, vocab, syn.word_lists, variant)
    cfg = TrainConfig(batch_size=8, max_batches=12, eval_every=5, seed=4, **kw)
    return tr, va, params, cfg


def test_train_logs_and_best_is_earliest_max():
    tr, va, params, cfg = _small_run()
    best, tlog = train(tr, va, params, cfg)
    assert [r.batch for r in tlog.records] == [5, 10, 12]
    accs = [r.valid_acc for r in tlog.records]
    assert tlog.best == accs.index(max(accs))
    assert best is not params


def test_train_is_deterministic(tmp_path):
    out = []
    for _ in range(2):
        tr, va, params, cfg = _small_run(BILSTM)
        best, _ = train(tr, va, params, cfg)
        save_checkpoint(best, tmp_path / "m.ckpt")
        out.append((tmp_path / "m.ckpt").read_bytes())
    assert out[0] == out[1]


def test_train_keeps_last_good_checkpoint_on_divergence():
    tr, va, params, cfg = _small_run()
    calls = []

    def flaky(*args):
        calls.append(1)
        if len(calls) > 6:
            raise NumericError("boom")
        return regularized_objective(*args)

    best, tlog = train(tr, va, params, cfg, objective=flaky)
    assert tlog.error == "boom" and [r.batch for r in tlog.records] == [5]
    assert best is not None


def test_train_divergence_before_any_checkpoint_raises():
    tr, va, params, cfg = _small_run()

    def broken(*args):
        raise NumericError("boom")

    with pytest.raises(NumericError):
        train(tr, va, params, cfg, objective=broken)


def test_train_log_csv(tmp_path):
    tr, va, params, cfg = _small_run()
    _, tlog = train(tr, va, params, replace(cfg, max_batches=5))
    tlog.write_csv(tmp_path / "log.csv")
    lines = (tmp_path / "log.csv").read_text().splitlines()
    assert lines[0] == "batch,loss,valid_acc" and lines[1].startswith("5,")
