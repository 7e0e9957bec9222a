import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lrlstm.corpus import (
    BINARY, MAX_LEN, ConfigError, CorpusParseError, Dataset, Sentence,
    corpus_stats, extract_subset, load_mr, load_sst, make_synthetic, parse_sst_tree,
    split_dataset, synthetic_label,
)
from lrlstm.resources import (
    INTENSIFIER, NEGATOR, SENTIMENT, STRONG_NEG, STRONG_POS, WEAK_NEG, WEAK_POS,
    Lexicon, WordLists,
)

LISTS = WordLists(("not",), ("very",))
LEX = Lexicon({"good": WEAK_POS, "bad": WEAK_NEG})


# -- SST trees ---------------------------------------------------------------

words = st.text(alphabet="abcdefghij'-.,", min_size=1, max_size=6)


@st.composite
def trees(draw, depth=0):
    label = draw(st.integers(0, 4))
    if depth >= 3 or draw(st.booleans()):
        w = draw(words)
        return f"({label} {w})", [(w, label)]
    kids = [draw(trees(depth + 1)) for _ in range(draw(st.integers(1, 3)))]
    return f"({label} " + " ".join(k[0] for k in kids) + ")", [x for k in kids for x in k[1]]


@settings(max_examples=200, deadline=None)
@given(trees())
def test_sst_parser_round_trips_leaves(tree):
    text, leaves = tree
    sent, polar = parse_sst_tree(text)
    assert list(sent.tokens) == [w for w, _ in leaves]
    assert sent.label == int(text[1])
    assert polar == [(w, l) for w, l in leaves if l != 2]


def test_sst_example():
    sent, polar = parse_sst_tree("(3 (2 It) (4 (2 is) (4 Great)))")
    assert sent.tokens == ("it", "is", "great") and sent.label == 3
    assert polar == [("great", 4)]


@pytest.mark.parametrize("bad, offset", [
    ("(3 (2 a)", 8), ("(3 a))", 5), ("(x a)", 1), ("(7 a)", 1), ("(3 a) (2 b)", 6), ("", 0),
])
def test_sst_errors_report_offset(bad, offset):
    with pytest.raises(CorpusParseError, match=f"offset {offset}$"):
        parse_sst_tree(bad)


def test_load_sst(tmp_path):
    p = tmp_path / "train.txt"
    p.write_text("(1 (2 not) (3 good))\n\n(4 (4 great))\n", encoding="utf-8")
    ds = load_sst(p)
    assert [s.label for s in ds] == [1, 4] and ds.scheme.C == 5
    assert ds.polar_leaves == [("good", 3), ("great", 4)]
    p.write_text("(1 (2 a)\n", encoding="utf-8")
    with pytest.raises(CorpusParseError, match=":1:"):
        load_sst(p)


# -- MR ------------------------------------------------------------------------

def test_load_mr(tmp_path, caplog):
    pos, neg = tmp_path / "pos", tmp_path / "neg"
    pos.write_bytes("a caf\xe9 film .\n\ngood fun\n".encode("latin-1"))
    neg.write_text(" ".join(["x"] * (MAX_LEN + 5)) + "\n", encoding="utf-8")
    ds = load_mr(pos, neg)
    assert [s.label for s in ds] == [1, 1, 0]
    assert ds.sentences[0].tokens == ("a", "caf\xe9", "film", ".")
    assert len(ds.sentences[2].tokens) == MAX_LEN
    assert "truncating" in caplog.text


def test_empty_sentence_rejected():
    with pytest.raises(ValueError):
        Sentence((), 0)


# -- splits and subsets --------------------------------------------------------

def _toy(n=40):
    r = np.random.default_rng(0)
    vocab = ["not", "very", "good", "bad", "it", "was"]
    sents = [Sentence(tuple(r.choice(vocab, size=r.integers(1, 6))), int(r.integers(0, 2))) for _ in range(n)]
    return Dataset(sents, BINARY, "toy")


def test_split_is_seeded_partition():
    ds = _toy()
    tr, va, te = split_dataset(ds, (0.8, 0.1, 0.1), seed=3)
    assert (len(tr), len(va), len(te)) == (32, 4, 4)
    assert sorted(map(id, tr.sentences + va.sentences + te.sentences)) == sorted(map(id, ds.sentences))
    again = split_dataset(ds, (0.8, 0.1, 0.1), seed=3)
    assert again[0].sentences == tr.sentences
    assert split_dataset(ds, (0.8, 0.1, 0.1), seed=4)[0].sentences != tr.sentences


@pytest.mark.parametrize("ratios", [(0.5, 0.5), (0.9, 0.2, -0.1), (0.5, 0.3, 0.3)])
def test_split_bad_ratios(ratios):
    with pytest.raises(ConfigError):
        split_dataset(_toy(), ratios, 0)


@pytest.mark.parametrize("kind", [NEGATOR, INTENSIFIER, SENTIMENT])
def test_subset_commutes_with_split(kind):
    ds = _toy()
    parts = split_dataset(ds, (0.5, 0.25, 0.25), seed=1)
    whole = extract_subset(ds, kind, LISTS, LEX)
    pieces = [s for p in parts for s in extract_subset(p, kind, LISTS, LEX).sentences]
    assert sorted(map(id, pieces)) == sorted(map(id, whole.sentences))


def test_subset_unknown_role():
    with pytest.raises(ConfigError):
        extract_subset(_toy(), "adverb", LISTS, LEX)


def test_corpus_stats():
    ds = Dataset([Sentence(("not", "good"), 0), Sentence(("very", "bad"), 0), Sentence(("it",), 1)], BINARY)
    assert corpus_stats(ds, LISTS, LEX) == {
        "sentences": 3, "with_sentiment": 2, "with_negation": 1, "with_intensity": 1,
    }


# -- synthetic corpus ----------------------------------------------------------

@pytest.mark.parametrize("cls, neg, inten, label", [
    (WEAK_POS, False, False, 3), (WEAK_POS, False, True, 4), (STRONG_POS, True, False, 1),
    (WEAK_NEG, True, True, 3), (STRONG_NEG, False, False, 0), (None, False, False, 2),
])
def test_synthetic_label(cls, neg, inten, label):
    assert synthetic_label(cls, neg, inten, C=5) == label
    if cls is not None:
        assert synthetic_label(cls, neg, inten, C=2) == int(label > 2)


def test_make_synthetic_is_deterministic_and_consistent():
    a = make_synthetic(300, seed=5, words_per_class=10)
    b = make_synthetic(300, seed=5, words_per_class=10)
    assert a.dataset.sentences == b.dataset.sentences
    assert {s.label for s in a.dataset} == set(range(5))
    for s in a.dataset:
        negated = any(t in a.word_lists.negators for t in s.tokens)
        inten = any(t in a.word_lists.intensifiers for t in s.tokens)
        cls = next((a.lexicon.get(t) for t in s.tokens if t in a.lexicon), None)
        assert s.label == synthetic_label(cls, negated, inten, 5)
