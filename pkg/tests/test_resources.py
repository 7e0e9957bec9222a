import numpy as np
import pytest

from lrlstm.numeric import DimensionError
from lrlstm.resources import (
    INTENSIFIER, NEGATOR, PLAIN, SENTIMENT, STRONG_NEG, STRONG_POS, WEAK_NEG, WEAK_POS,
    Lexicon, ResourceParseError, WordLists, build_lexicon, classify_token, classify_tokens,
    load_embeddings, read_lexicon_tsv, tokenize, write_lexicon_tsv,
)

LEX = Lexicon({"good": WEAK_POS, "excellent": STRONG_POS, "bad": WEAK_NEG, "awful": STRONG_NEG})
LISTS = WordLists(("not", "never", "is not"), ("very", "much more"))


def test_tokenize():
    assert tokenize("It's NOT good, really!") == ["it's", "not", "good", ",", "really", "!"]
    assert tokenize("   ") == []


def test_shipped_word_lists():
    wl = WordLists.default()
    assert len(wl.negators) == 23 and len(wl.intensifiers) == 30
    assert "not" in wl.negators and "very" in wl.intensifiers
    assert not set(wl.negators) & set(wl.intensifiers)


def test_word_lists_must_be_disjoint():
    with pytest.raises(ResourceParseError):
        WordLists(("not", "too"), ("too",))


def test_classify_precedence():
    lex = Lexicon({"not": WEAK_NEG, "very": WEAK_POS, "good": WEAK_POS})
    assert classify_token("not", lex, LISTS).kind == NEGATOR
    assert classify_token("very", lex, LISTS).kind == INTENSIFIER
    r = classify_token("good", lex, LISTS)
    assert r.kind == SENTIMENT and r.lex_class == WEAK_POS
    assert classify_token("table", lex, LISTS).kind == PLAIN


def test_multiword_span_marks_first_token():
    roles = classify_tokens(["it", "is", "not", "much", "more", "good"], LEX, LISTS)
    kinds = [r.kind for r in roles]
    assert kinds == [PLAIN, NEGATOR, PLAIN, INTENSIFIER, PLAIN, SENTIMENT]
    assert roles[1].entry == "is not" and roles[3].entry == "much more"


def test_lone_prefix_of_multiword_is_single_token():
    roles = classify_tokens(["is", "good"], LEX, LISTS)
    assert [r.kind for r in roles] == [PLAIN, SENTIMENT]


def test_lexicon_tsv_round_trip(tmp_path):
    path = tmp_path / "lex.tsv"
    write_lexicon_tsv(LEX, path)
    assert read_lexicon_tsv(path) == LEX.classes


def test_lexicon_tsv_errors(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("good\tweak_pos\nbad\tterrible\n", encoding="utf-8")
    with pytest.raises(ResourceParseError, match=":2:"):
        read_lexicon_tsv(path)
    path.write_text("good\tweak_pos\ngood\tstrong_pos\n", encoding="utf-8")
    with pytest.raises(ResourceParseError, match="two classes"):
        read_lexicon_tsv(path)


def test_build_lexicon_drops_conflicts():
    lex = build_lexicon({"good": "weak_pos", "dull": "weak_neg"},
                        {"Good": "strong_pos", "great": "strong_pos"})
    assert lex.classes == {"dull": WEAK_NEG, "great": STRONG_POS}
    assert (lex.kept, lex.dropped) == (2, 1)


def test_load_embeddings(tmp_path):
    path = tmp_path / "vec.txt"
    path.write_text("3 2\ngood 0.5 -1\nbad 2 3\nzzz 1 1\n", encoding="utf-8")
    table = load_embeddings(path, ["<unk>", "good", "bad", "meh"], 2, seed=0)
    np.testing.assert_array_equal(table.vectors[1], [0.5, -1.0])
    np.testing.assert_array_equal(table.vectors[2], [2.0, 3.0])
    assert np.all(np.abs(table.vectors[[0, 3]]) <= 0.01)
    assert table.coverage == 0.5
    again = load_embeddings(path, ["<unk>", "good", "bad", "meh"], 2, seed=0)
    np.testing.assert_array_equal(table.vectors, again.vectors)


def test_load_embeddings_errors(tmp_path):
    path = tmp_path / "vec.txt"
    path.write_text("good 1 2 3\n", encoding="utf-8")
    with pytest.raises(DimensionError):
        load_embeddings(path, ["good"], 2, seed=0)
    path.write_text("good 1 2\nbad 1\n", encoding="utf-8")
    with pytest.raises(ResourceParseError, match=":2:"):
        load_embeddings(path, ["good"], 2, seed=0)


def test_no_embeddings_file_is_all_random():
    t = load_embeddings(None, ["a", "b"], 3, seed=1)
    assert t.coverage == 0.0 and t.vectors.shape == (2, 3)
