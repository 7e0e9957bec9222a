"""Datasets: MR sentence files, SST trees, deterministic splits, role-filtered
subsets, corpus statistics and a templated synthetic corpus."""

from dataclasses import dataclass, field, replace
import logging
import math

from .numeric import rng
from .resources import (
    INTENSIFIER, NEGATOR, SENTIMENT, STRONG_NEG, STRONG_POS, WEAK_NEG, WEAK_POS,
    Lexicon, WordLists, classify_tokens, tokenize,
)

log = logging.getLogger(__name__)

MAX_LEN = 60


class CorpusParseError(ValueError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LabelScheme:
    names: tuple

    @property
    def C(self):
        return len(self.names)


BINARY = LabelScheme(("negative", "positive"))
FIVE_WAY = LabelScheme(("very negative", "negative", "neutral", "positive", "very positive"))


@dataclass(frozen=True)
class Sentence:
    tokens: tuple
    label: int
    roles: tuple = None

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("sentence has no tokens")


@dataclass
class Dataset:
    sentences: list
    scheme: LabelScheme
    name: str = ""

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def with_roles(self, lexicon, word_lists):
        """Copy with token roles filled in."""
        out = [replace(s, roles=tuple(classify_tokens(s.tokens, lexicon, word_lists)))
               for s in self.sentences]
        return Dataset(out, self.scheme, self.name)


def _truncate(tokens, where):
    if len(tokens) > MAX_LEN:
        log.warning("%s: truncating %d tokens to %d", where, len(tokens), MAX_LEN)
        return tokens[:MAX_LEN]
    return tokens


# -- MR ----------------------------------------------------------------------

def _read_lines(path):
    # the public MR release is latin-1 encoded
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        text = raw.decode("latin-1")
    return text.splitlines()


def load_mr(pos_path, neg_path):
    """Positive sentences (label 1) then negative ones (label 0), file order kept."""
    sentences, skipped = [], 0
    for path, label in ((pos_path, 1), (neg_path, 0)):
        for lineno, line in enumerate(_read_lines(path), 1):
            tokens = tokenize(line)
            if not tokens:
                skipped += 1
                continue
            sentences.append(Sentence(tuple(_truncate(tokens, f"{path}:{lineno}")), label))
    if skipped:
        log.warning("MR: skipped %d empty lines", skipped)
    return Dataset(sentences, BINARY, "mr")


# -- SST ---------------------------------------------------------------------

def parse_sst_tree(line, lowercase=True):
    """Parse one PTB-style sentiment tree.

    Returns ``(sentence, polar_leaves)``: the root label with the leaf tokens in
    order, and ``(token, label)`` for every leaf whose label is not neutral (2).
    """
    s = line.strip()
    pos, n = 0, len(s)
    tokens, polar = [], []
    stack = []  # labels of open nodes
    root_label = None

    def error(msg, at):
        return CorpusParseError(f"{msg} at byte offset {len(s[:at].encode('utf-8'))}")

    while pos < n:
        ch = s[pos]
        if ch.isspace():
            pos += 1
        elif ch == "(":
            pos += 1
            start = pos
            while pos < n and not s[pos].isspace() and s[pos] not in "()":
                pos += 1
            try:
                label = int(s[start:pos])
            except ValueError:
                raise error(f"expected integer label, found {s[start:pos]!r}", start) from None
            if not 0 <= label <= 4:
                raise error(f"label {label} outside 0..4", start)
            if root_label is None:
                root_label = label
            elif not stack:
                raise error("text after the root node", start - 1)
            stack.append(label)
            while pos < n and s[pos].isspace():
                pos += 1
            if pos < n and s[pos] not in "()":
                start = pos
                while pos < n and s[pos] not in "()":
                    pos += 1
                word = s[start:pos].strip()
                if lowercase:
                    word = word.lower()
                tokens.append(word)
                if label != 2:
                    polar.append((word, label))
        elif ch == ")":
            if not stack:
                raise error("unbalanced ')'", pos)
            stack.pop()
            pos += 1
        else:
            raise error(f"unexpected character {ch!r}", pos)
    if stack or root_label is None:
        raise error("unbalanced '('" if stack else "empty tree", n)
    if not tokens:
        raise error("tree has no leaves", n)
    return Sentence(tuple(tokens), root_label), polar


def load_sst(path, name="sst"):
    sentences, polar = [], []
    for lineno, line in enumerate(_read_lines(path), 1):
        if not line.strip():
            continue
        try:
            sent, leaves = parse_sst_tree(line)
        except CorpusParseError as exc:
            raise CorpusParseError(f"{path}:{lineno}: {exc}") from None
        sentences.append(replace(sent, tokens=tuple(_truncate(list(sent.tokens), f"{path}:{lineno}"))))
        polar.extend(leaves)
    ds = Dataset(sentences, FIVE_WAY, name)
    ds.polar_leaves = polar
    return ds


# -- splits and subsets --------------------------------------------------------

def split_dataset(dataset, ratios, seed):
    """Seeded shuffle, then contiguous cuts of sizes given by ``ratios``."""
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"split ratios must be three nonnegative numbers summing to 1, got {ratios}")
    n = len(dataset)
    order = rng(seed, "split", dataset.name).permutation(n)
    n_train = int(round(ratios[0] * n))
    n_valid = min(int(round(ratios[1] * n)), n - n_train)
    cuts = (order[:n_train], order[n_train:n_train + n_valid], order[n_train + n_valid:])
    suffix = ("train", "valid", "test")
    return tuple(
        Dataset([dataset.sentences[i] for i in idx], dataset.scheme, f"{dataset.name}.{sfx}")
        for idx, sfx in zip(cuts, suffix)
    )


CONTAINS_NEGATOR = NEGATOR
CONTAINS_INTENSIFIER = INTENSIFIER
CONTAINS_SENTIMENT = SENTIMENT


def _roles(sentence, word_lists, lexicon):
    if sentence.roles is not None:
        return sentence.roles
    return classify_tokens(sentence.tokens, lexicon, word_lists)


def extract_subset(dataset, role_filter, word_lists, lexicon):
    """Sentences holding at least one token of the given role kind, order kept."""
    if role_filter not in (NEGATOR, INTENSIFIER, SENTIMENT):
        raise ConfigError(f"unknown role filter {role_filter!r}")
    keep = [s for s in dataset.sentences
            if any(r.kind == role_filter for r in _roles(s, word_lists, lexicon))]
    return Dataset(keep, dataset.scheme, f"{dataset.name}[{role_filter}]")


def corpus_stats(dataset, word_lists, lexicon):
    stats = {"sentences": len(dataset), "with_sentiment": 0, "with_negation": 0, "with_intensity": 0}
    key = {SENTIMENT: "with_sentiment", NEGATOR: "with_negation", INTENSIFIER: "with_intensity"}
    for s in dataset.sentences:
        kinds = {r.kind for r in _roles(s, word_lists, lexicon)}
        for kind, name in key.items():
            if kind in kinds:
                stats[name] += 1
    return stats


def format_stats(stats, name=""):
    lines = [f"dataset = {name}"] if name else []
    lines += [f"{k} = {v}" for k, v in stats.items()]
    return "\n".join(lines) + "\n"


# -- synthetic corpus ----------------------------------------------------------

@dataclass
class SyntheticCorpus:
    dataset: Dataset
    lexicon: Lexicon
    word_lists: WordLists
    vocab_by_class: dict = field(default_factory=dict)


_SCORE = {STRONG_NEG: -2, WEAK_NEG: -1, WEAK_POS: 1, STRONG_POS: 2}


def synthetic_label(lex_class, negated, intensified, C=5):
    """Gold label of a templated sentence.

    Intensifiers turn a weak word strong. Negators flip the polarity and cap the
    strength at weak ("not excellent" is merely negative). Neutral sentences
    (no sentiment word) get the middle class.
    """
    if lex_class is None:
        score = 0
    else:
        score = _SCORE[lex_class]
        if intensified:
            score = 2 * int(math.copysign(1, score))
        if negated:
            score = -int(math.copysign(1, score))
    if C == 2:
        return int(score > 0)
    return score + 2


def make_synthetic(n_sentences, seed, words_per_class=60, n_fillers=40, C=5,
                   p_negated=0.3, p_intensified=0.3, word_lists=None):
    """Templated corpus whose labels follow lexicon polarity, negation and intensity.

    Sentences look like ``filler* [negator] [intensifier] sentiment filler*``. The
    lexicon covers every sentiment word, so the linguistic regularizers see the
    same information the generator used. ``C`` is 5 or 2 (binary drops the
    strength distinction and the neutral class).
    """
    word_lists = word_lists or WordLists.default()
    r = rng(seed, "synthetic")
    names = ("sneg", "wneg", "wpos", "spos")
    vocab_by_class = {c: [f"{names[c]}{i}" for i in range(words_per_class)] for c in range(4)}
    fillers = [f"w{i}" for i in range(n_fillers)]
    negators = [w for w in word_lists.negators if " " not in w]
    intensifiers = [w for w in word_lists.intensifiers if " " not in w]
    lexicon = Lexicon({w: c for c, ws in vocab_by_class.items() for w in ws})
    sentences = []
    while len(sentences) < n_sentences:
        neutral = C == 5 and r.random() < 0.1
        tokens = [fillers[i] for i in r.integers(0, n_fillers, size=r.integers(0, 3))]
        cls = None
        negated = intensified = False
        if not neutral:
            cls = int(r.integers(0, 4))
            negated = r.random() < p_negated
            intensified = r.random() < p_intensified
            if negated:
                tokens.append(negators[r.integers(0, len(negators))])
            if intensified:
                tokens.append(intensifiers[r.integers(0, len(intensifiers))])
            tokens.append(vocab_by_class[cls][r.integers(0, words_per_class)])
        tokens += [fillers[i] for i in r.integers(0, n_fillers, size=r.integers(1 if neutral else 0, 3))]
        sentences.append(Sentence(tuple(tokens), synthetic_label(cls, negated, intensified, C)))
    scheme = FIVE_WAY if C == 5 else BINARY
    return SyntheticCorpus(Dataset(sentences, scheme, f"synthetic{seed}"), lexicon, word_lists, vocab_by_class)
