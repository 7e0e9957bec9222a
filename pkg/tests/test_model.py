import numpy as np
import pytest

from lrlstm.model import (
    BILSTM, LSTM, UNK, FormatError, build_vocab, encode, init_params, load_checkpoint,
    lstm_cell, predict_label, predict_position, predict_sentence, save_checkpoint, shift_prior,
)
from lrlstm.numeric import DimensionError
from lrlstm.resources import WordLists

LISTS = WordLists(("not", "never"), ("very",))
VOCAB = [UNK, "a", "bad", "good", "not", "very"]


def _params(variant=LSTM, C=5, seed=0):
    p = init_params(seed, 6, 4, C, VOCAB, LISTS, variant)
    p.arrays["E"] = np.random.default_rng(seed).normal(size=p["E"].shape)
    return p


def test_cell_zero_weights():
    d = 3
    c, h = lstm_cell(np.zeros(d), np.zeros(d), np.zeros(2), np.zeros((4 * d, 2)), np.zeros((4 * d, d)), np.zeros(4 * d))
    np.testing.assert_array_equal(c, 0.0)
    np.testing.assert_array_equal(h, 0.0)


def test_cell_dimension_error():
    with pytest.raises(DimensionError):
        lstm_cell(np.zeros(3), np.zeros(3), np.zeros(2), np.zeros((12, 3)), np.zeros((12, 3)), np.zeros(12))


def test_build_vocab():
    from lrlstm.corpus import BINARY, Dataset, Sentence
    ds = Dataset([Sentence(("b", "a"), 0), Sentence(("c", UNK), 1)], BINARY)
    assert build_vocab([ds]) == [UNK, "a", "b", "c"]


def test_init_priors():
    p = _params(C=5)
    bound = 1 / np.sqrt(6)
    for k in ("W", "U", "S"):
        assert p[k].min() >= 0 and p[k].max() <= bound
    np.testing.assert_array_equal(p["b"], 0.0)
    np.testing.assert_allclose(p["shift"].sum(axis=1), 0.0, atol=1e-15)
    # strong classes push twice as hard as weak ones, toward their own end
    np.testing.assert_allclose(p["shift"][3], 2 * p["shift"][2])
    assert p["shift"][3, -1] > 0 > p["shift"][0, -1]
    anti = np.fliplr(np.eye(5))
    assert np.all(np.abs(p["T_neg"] - 2 * anti) <= 0.01)
    assert np.all(np.abs(p["T_int"] - 2 * np.eye(5)) <= 0.01)
    assert p["T_neg"].shape == (2, 5, 5) and p["T_int"].shape == (1, 5, 5)


def test_shift_prior_binary():
    np.testing.assert_allclose(shift_prior(2), [[0.2, -0.2], [0.1, -0.1], [-0.1, 0.1], [-0.2, 0.2]])


def test_init_is_seeded():
    a, b, c = _params(seed=1), _params(seed=1), _params(seed=2)
    np.testing.assert_array_equal(a["W"], b["W"])
    assert not np.array_equal(a["W"], c["W"])


def test_backward_encoder_reads_right_to_left():
    p = _params(LSTM)
    ids = p.token_ids(["a", "good", "not", "bad"])
    H, rep = encode(p, ids)
    np.testing.assert_array_equal(rep, H[0])
    # the state at t summarizes tokens t..n, so a suffix is encoded identically
    H_suffix, _ = encode(p, ids[2:])
    np.testing.assert_allclose(H[2:], H_suffix, rtol=0, atol=1e-15)


def test_bilstm_reversal_symmetry():
    p = _params(BILSTM)
    ids = p.token_ids(["a", "good", "not", "bad"])
    (Hf, Hb), rep = encode(p, ids)
    (Hf_r, Hb_r), rep_r = encode(p, ids[::-1])
    np.testing.assert_allclose(Hf, Hb_r[::-1], atol=1e-15)
    np.testing.assert_allclose(Hb, Hf_r[::-1], atol=1e-15)
    np.testing.assert_allclose(rep, np.concatenate([rep_r[6:], rep_r[:6]]), atol=1e-15)


def test_bilstm_prefix_perturbation():
    p = _params(BILSTM)
    ids = p.token_ids(["a", "good", "not", "bad"])
    ids2 = ids.copy()
    ids2[-1] = p.index["very"]
    (Hf, Hb), _ = encode(p, ids)
    (Hf2, Hb2), _ = encode(p, ids2)
    np.testing.assert_array_equal(Hf[:3], Hf2[:3])
    assert not np.allclose(Hb[:3], Hb2[:3])


def test_unknown_tokens_map_to_unk():
    p = _params()
    assert list(p.token_ids(["good", "zzz"])) == [3, 0]


def test_predict_position():
    S, Sb = np.zeros((3, 2)), np.array([0.0, 0.0, np.log(2)])
    np.testing.assert_allclose(predict_position(np.ones(2), S, Sb), [0.25, 0.25, 0.5])
    with pytest.raises(DimensionError):
        predict_position(np.ones(3), S, Sb)


def test_predict_label_ties_to_lower_class():
    p = _params(C=5)
    p.arrays["S"][:] = 0.0
    assert predict_label(p, ["good"]) == 0


@pytest.mark.parametrize("variant", [LSTM, BILSTM])
def test_checkpoint_round_trip(tmp_path, variant):
    p = _params(variant)
    path = tmp_path / "m.ckpt"
    save_checkpoint(p, path)
    q = load_checkpoint(path)
    r = p.rounded()
    assert (q.variant, q.d, q.d_emb, q.C, q.vocab) == (p.variant, p.d, p.d_emb, p.C, p.vocab)
    assert q.negators == p.negators and q.intensifiers == p.intensifiers
    for k in r.arrays:
        np.testing.assert_array_equal(q[k], r[k])
    for toks in (["good"], ["not", "very", "bad", "a"]):
        np.testing.assert_array_equal(predict_sentence(q, toks), predict_sentence(r, toks))
    save_checkpoint(q, tmp_path / "again.ckpt")
    assert (tmp_path / "again.ckpt").read_bytes() == path.read_bytes()


def test_checkpoint_corruption(tmp_path):
    path = tmp_path / "m.ckpt"
    save_checkpoint(_params(), path)
    data = path.read_bytes()
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"XXXXXXXX" + data[8:])
    with pytest.raises(FormatError, match="magic"):
        load_checkpoint(bad)
    bad.write_bytes(data[:-7])
    with pytest.raises(FormatError, match="truncated in section 'T_int'"):
        load_checkpoint(bad)
    bad.write_bytes(data + b"\0")
    with pytest.raises(FormatError, match="trailing"):
        load_checkpoint(bad)
