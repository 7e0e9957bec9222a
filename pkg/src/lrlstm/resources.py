"""Linguistic resources: sentiment lexicon, negator/intensifier lists,
pretrained embeddings, tokenization and per-token role assignment."""

from dataclasses import dataclass, field
from importlib import resources as _pkg_resources
import logging
import re

import numpy as np

from .numeric import DimensionError, rng

log = logging.getLogger(__name__)

STRONG_NEG, WEAK_NEG, WEAK_POS, STRONG_POS = range(4)
LEXICON_CLASSES = ("strong_neg", "weak_neg", "weak_pos", "strong_pos")
_CLASS_INDEX = {name: i for i, name in enumerate(LEXICON_CLASSES)}

# suggested collapse of 5-way SST leaf labels onto the 4 lexicon classes
SST_LEAF_TO_LEXICON = {0: STRONG_NEG, 1: WEAK_NEG, 3: WEAK_POS, 4: STRONG_POS}


class ResourceParseError(ValueError):
    pass


# -- tokenization ------------------------------------------------------------

_PUNCT = re.compile(r"([.,!?;:()\[\]{}\"`]|--)")


def tokenize(text):
    """Lowercase, split punctuation off, split on whitespace."""
    return _PUNCT.sub(r" \1 ", text.lower()).split()


# -- lexicon -----------------------------------------------------------------

@dataclass(frozen=True)
class Lexicon:
    classes: dict = field(default_factory=dict)  # word -> 0..3
    kept: int = 0
    dropped: int = 0

    def __contains__(self, word):
        return word in self.classes

    def __len__(self):
        return len(self.classes)

    def get(self, word):
        return self.classes.get(word)


def parse_class(label, where="<input>"):
    if isinstance(label, (int, np.integer)) and 0 <= label < 4:
        return int(label)
    try:
        return _CLASS_INDEX[str(label).strip().lower()]
    except KeyError:
        raise ResourceParseError(f"{where}: unknown lexicon class {label!r}") from None


def read_lexicon_tsv(path):
    """Read ``word<TAB>class`` lines into a word -> class dict."""
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ResourceParseError(f"{path}:{lineno}: expected 'word<TAB>class'")
            word = parts[0].strip().lower()
            cls = parse_class(parts[1], where=f"{path}:{lineno}")
            if entries.get(word, cls) != cls:
                raise ResourceParseError(f"{path}:{lineno}: {word!r} listed with two classes")
            entries[word] = cls
    return entries


def write_lexicon_tsv(lexicon, path):
    with open(path, "w", encoding="utf-8") as fh:
        for word in sorted(lexicon.classes):
            fh.write(f"{word}\t{LEXICON_CLASSES[lexicon.classes[word]]}\n")


def build_lexicon(source_a, source_b):
    """Union of two word -> class sources, dropping words the sources disagree on."""
    a = {w.lower(): parse_class(c) for w, c in dict(source_a).items()}
    b = {w.lower(): parse_class(c) for w, c in dict(source_b).items()}
    merged, dropped = {}, 0
    for word in sorted(set(a) | set(b)):
        ca, cb = a.get(word), b.get(word)
        if ca is not None and cb is not None and ca != cb:
            dropped += 1
            continue
        merged[word] = ca if ca is not None else cb
    log.info("lexicon: kept %d words, dropped %d conflicts", len(merged), dropped)
    return Lexicon(merged, kept=len(merged), dropped=dropped)


# -- word lists --------------------------------------------------------------

def _read_list(lines):
    out = []
    for line in lines:
        entry = " ".join(line.strip().lower().split())
        if entry and not entry.startswith("#") and entry not in out:
            out.append(entry)
    return tuple(out)


@dataclass(frozen=True)
class WordLists:
    negators: tuple
    intensifiers: tuple

    def __post_init__(self):
        overlap = set(self.negators) & set(self.intensifiers)
        if overlap:
            raise ResourceParseError(f"words listed as both negator and intensifier: {sorted(overlap)}")

    @classmethod
    def from_files(cls, negator_path, intensifier_path):
        with open(negator_path, encoding="utf-8") as fh:
            neg = _read_list(fh)
        with open(intensifier_path, encoding="utf-8") as fh:
            inten = _read_list(fh)
        return cls(neg, inten)

    @classmethod
    def default(cls):
        data = _pkg_resources.files("lrlstm") / "data"
        neg = _read_list(data.joinpath("negators.txt").read_text("utf-8").splitlines())
        inten = _read_list(data.joinpath("intensifiers.txt").read_text("utf-8").splitlines())
        return cls(neg, inten)


# -- token roles -------------------------------------------------------------

NEGATOR, INTENSIFIER, SENTIMENT, PLAIN = "negator", "intensifier", "sentiment", "plain"


@dataclass(frozen=True)
class TokenRole:
    kind: str
    entry: str = None       # word-list entry for negators/intensifiers
    lex_class: int = None   # lexicon class for sentiment words

    def __repr__(self):
        if self.kind in (NEGATOR, INTENSIFIER):
            return f"{self.kind.title()}({self.entry!r})"
        if self.kind == SENTIMENT:
            return f"Sentiment({LEXICON_CLASSES[self.lex_class]})"
        return "Plain"


PLAIN_ROLE = TokenRole(PLAIN)


def classify_token(word, lexicon, word_lists):
    """Role of a single token. Negator > Intensifier > Sentiment > Plain."""
    if word in word_lists.negators:
        return TokenRole(NEGATOR, entry=word)
    if word in word_lists.intensifiers:
        return TokenRole(INTENSIFIER, entry=word)
    cls = lexicon.get(word)
    if cls is not None:
        return TokenRole(SENTIMENT, lex_class=cls)
    return PLAIN_ROLE


def _multiword_table(word_lists):
    table = {}
    for kind, entries in ((NEGATOR, word_lists.negators), (INTENSIFIER, word_lists.intensifiers)):
        for entry in entries:
            parts = tuple(entry.split())
            if len(parts) > 1:
                table.setdefault(parts, TokenRole(kind, entry=entry))
    return table


def classify_tokens(tokens, lexicon, word_lists):
    """Roles for a token sequence.

    Multiword list entries ("is not", "much more") are matched greedily, longest
    first, before single tokens are classified. A matched span carries its role
    on its first token; the remaining tokens of the span are Plain, so the phrase
    acts as one modifier whose effect is complete once the whole span is read.
    """
    table = _multiword_table(word_lists)
    lengths = sorted({len(k) for k in table}, reverse=True)
    roles = []
    i, n = 0, len(tokens)
    while i < n:
        for L in lengths:
            span = tuple(tokens[i:i + L])
            if len(span) == L and span in table:
                roles.append(table[span])
                roles.extend([PLAIN_ROLE] * (L - 1))
                i += L
                break
        else:
            roles.append(classify_token(tokens[i], lexicon, word_lists))
            i += 1
    return roles


# -- embeddings --------------------------------------------------------------

@dataclass
class EmbeddingTable:
    vocab: dict      # word -> row index
    vectors: np.ndarray
    coverage: float = 1.0

    @property
    def dim(self):
        return self.vectors.shape[1]


def load_embeddings(path, vocab, d_emb, seed):
    """Rows from a ``word v1 .. vd`` text file; missing words get Uniform(-0.01, 0.01).

    ``vocab`` is an ordered sequence of words (row order). ``path`` may be None,
    in which case every row is random.
    """
    vocab = list(vocab)
    index = {w: i for i, w in enumerate(vocab)}
    if len(index) != len(vocab):
        raise ValueError("vocabulary contains duplicates")
    vectors = rng(seed, "embeddings-oov").uniform(-0.01, 0.01, size=(len(vocab), d_emb))
    found = np.zeros(len(vocab), dtype=bool)
    file_dim = None
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                parts = line.rstrip().split(" ")
                if len(parts) < 2:
                    continue
                word, arity = parts[0], len(parts) - 1
                if lineno == 1 and arity == 1:
                    continue  # word2vec-style "count dim" header
                if file_dim is None:
                    file_dim = arity
                    if file_dim != d_emb:
                        raise DimensionError(f"{path}: file vectors have {file_dim} dims, expected {d_emb}")
                elif arity != file_dim:
                    raise ResourceParseError(
                        f"{path}:{lineno}: expected {file_dim} values, found {arity}"
                    )
                row = index.get(word)
                if row is None or found[row]:
                    continue
                try:
                    vectors[row] = [float(x) for x in parts[1:]]
                except ValueError:
                    raise ResourceParseError(f"{path}:{lineno}: non-numeric value") from None
                found[row] = True
    coverage = float(found.mean()) if vocab else 1.0
    return EmbeddingTable(index, vectors, coverage)
