"""LSTM / Bi-LSTM encoders, the shared position-wise predictor, parameter
initialization and checkpoint files."""

from dataclasses import dataclass, field
import hashlib
import json
import struct

import numpy as np

from . import kernels
from .numeric import DimensionError, rng, softmax
from .resources import STRONG_NEG, STRONG_POS, WEAK_NEG, WEAK_POS, load_embeddings

UNK = "<unk>"
LSTM, BILSTM = "lstm", "bilstm"
VARIANTS = (LSTM, BILSTM)

# parameter blocks updated by AdaGrad; the embedding table E has its own SGD path
DENSE_BLOCKS = ("W", "U", "b", "S", "Sb", "shift", "T_neg", "T_int")

SHIFT_DELTA = 0.1


class FormatError(ValueError):
    pass


@dataclass
class ModelParams:
    variant: str
    d: int
    d_emb: int
    C: int
    vocab: list
    negators: tuple
    intensifiers: tuple
    arrays: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {w: i for i, w in enumerate(self.vocab)}
        self.neg_index = {w: i for i, w in enumerate(self.negators)}
        self.int_index = {w: i for i, w in enumerate(self.intensifiers)}

    def __getitem__(self, name):
        return self.arrays[name]

    @property
    def h_dim(self):
        return 2 * self.d if self.variant == BILSTM else self.d

    def token_ids(self, tokens):
        unk = self.index[UNK]
        return np.array([self.index.get(t, unk) for t in tokens], dtype=np.int64)

    def copy(self):
        return ModelParams(self.variant, self.d, self.d_emb, self.C, list(self.vocab),
                           self.negators, self.intensifiers,
                           {k: v.copy() for k, v in self.arrays.items()})

    def rounded(self):
        """Copy with every array passed through float32, as a checkpoint stores it."""
        out = self.copy()
        out.arrays = {k: v.astype(np.float32).astype(np.float64) for k, v in self.arrays.items()}
        return out


def build_vocab(datasets, extra=()):
    """Sorted token vocabulary over the given datasets, with ``<unk>`` at row 0."""
    words = set(extra)
    for ds in datasets:
        for s in ds:
            words.update(s.tokens)
    words.discard(UNK)
    return [UNK] + sorted(words)


def shift_prior(C, delta=SHIFT_DELTA):
    """Initial shifting vectors, one row per lexicon class.

    Output classes are ordered negative to positive; a positive lexicon class adds
    mass to the positive end and removes it from the negative end (strong classes
    twice as much). Each row sums to zero.
    """
    ranks = np.linspace(-1.0, 1.0, C)
    sign = {STRONG_NEG: -2.0, WEAK_NEG: -1.0, WEAK_POS: 1.0, STRONG_POS: 2.0}
    return np.stack([delta * sign[c] * ranks for c in range(4)])


def init_params(seed, d, d_emb, C, vocab, word_lists, variant=LSTM, embeddings_path=None):
    if variant not in VARIANTS:
        raise ValueError(f"unknown model variant {variant!r}")
    if min(d, d_emb, C) < 1:
        raise DimensionError("d, d_emb and C must be positive")
    r = rng(seed, "init")
    bound = 1.0 / np.sqrt(d)
    h_dim = 2 * d if variant == BILSTM else d
    negators, intensifiers = tuple(word_lists.negators), tuple(word_lists.intensifiers)
    emb = load_embeddings(embeddings_path, vocab, d_emb, seed)
    arrays = {
        "E": emb.vectors,
        "W": r.uniform(0.0, bound, size=(4 * d, d_emb)),
        "U": r.uniform(0.0, bound, size=(4 * d, d)),
        "b": np.zeros(4 * d),
        "S": r.uniform(0.0, bound, size=(C, h_dim)),
        "Sb": np.zeros(C),
        "shift": shift_prior(C),
        "T_neg": 2.0 * np.fliplr(np.eye(C))[None] + r.uniform(0.0, 0.01, size=(len(negators), C, C)),
        "T_int": 2.0 * np.eye(C)[None] + r.uniform(0.0, 0.01, size=(len(intensifiers), C, C)),
    }
    params = ModelParams(variant, d, d_emb, C, list(vocab), negators, intensifiers, arrays)
    params.embedding_coverage = emb.coverage
    return params


# -- plain forward path (evaluation) ------------------------------------------

def lstm_cell(c_prev, h_prev, x, W, U, b):
    """One LSTM step. Gates are stacked ``[input, forget, output, candidate]``."""
    d = U.shape[1]
    if W.shape != (4 * d, x.shape[0]) or U.shape != (4 * d, d) or c_prev.shape != (d,) or h_prev.shape != (d,):
        raise DimensionError("lstm_cell: inconsistent dimensions")
    z = W @ x + U @ h_prev + b
    sig = 1.0 / (1.0 + np.exp(-z[: 3 * d]))
    i, f, o = sig[:d], sig[d: 2 * d], sig[2 * d:]
    g = np.tanh(z[3 * d:])
    c = f * c_prev + i * g
    return c, o * np.tanh(c)


def encode(params, ids, variant=None):
    """Hidden states and the sentence representation for a sequence of token ids.

    Backward variant: states run right to left, so position t summarizes tokens
    t..n and the sentence representation is the state at the first token.
    Bidirectional: returns ``(H_fwd, H_bwd)`` as the per-position states and
    ``[h_fwd[n], h_bwd[1]]`` as the sentence representation.
    """
    variant = variant or params.variant
    if len(ids) == 0:
        raise ValueError("cannot encode an empty sentence")
    X = params["E"][ids]
    W, U, b = params["W"], params["U"], params["b"]
    Hb, _, _ = kernels.lstm_forward(X, W, U, b, reverse=True)
    if variant == LSTM:
        return Hb, Hb[0]
    Hf, _, _ = kernels.lstm_forward(X, W, U, b, reverse=False)
    return (Hf, Hb), np.concatenate([Hf[-1], Hb[0]])


def predict_position(h, S, Sb, dropout_mask=None, p_drop=0.5):
    if S.shape[1] != h.shape[0]:
        raise DimensionError(f"predictor expects {S.shape[1]} inputs, got {h.shape[0]}")
    if dropout_mask is not None:
        h = h * dropout_mask / (1.0 - p_drop)
    return softmax(S @ h + Sb)


def predict_sentence(params, tokens):
    _, rep = encode(params, params.token_ids(tokens))
    return predict_position(rep, params["S"], params["Sb"])


def predict_label(params, tokens):
    # np.argmax returns the first maximum, i.e. ties go to the lower class
    return int(np.argmax(predict_sentence(params, tokens)))


# -- checkpoints ---------------------------------------------------------------

MAGIC = b"LRLSTM1\x00"
_SECTIONS = ("E",) + DENSE_BLOCKS


def vocab_hash(vocab):
    return hashlib.sha256("\n".join(vocab).encode("utf-8")).hexdigest()


def save_checkpoint(params, path):
    """Write the binary checkpoint.

    Layout: magic, u64 metadata length, UTF-8 JSON metadata, u32 section count,
    then per section: u16 name length, name, u8 ndim, u64 dims, u64 byte length,
    little-endian float32 data.
    """
    meta = {
        "variant": params.variant, "d": params.d, "d_emb": params.d_emb, "C": params.C,
        "vocab_hash": vocab_hash(params.vocab), "vocab": params.vocab,
        "negators": list(params.negators), "intensifiers": list(params.intensifiers),
    }
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        fh.write(struct.pack("<I", len(_SECTIONS)))
        for name in _SECTIONS:
            arr = np.ascontiguousarray(params[name], dtype="<f4")
            raw = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)) + raw)
            fh.write(struct.pack("<B", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
            data = arr.tobytes()
            fh.write(struct.pack("<Q", len(data)))
            fh.write(data)


class _Reader:
    def __init__(self, data):
        self.data, self.pos = data, 0

    def take(self, n, section):
        if self.pos + n > len(self.data):
            raise FormatError(f"checkpoint truncated in section {section!r}")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt, section):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), section))


def load_checkpoint(path):
    with open(path, "rb") as fh:
        rd = _Reader(fh.read())
    if rd.take(len(MAGIC), "header") != MAGIC:
        raise FormatError("bad magic in section 'header': not an LRLSTM1 checkpoint")
    (meta_len,) = rd.unpack("<Q", "metadata")
    try:
        meta = json.loads(rd.take(meta_len, "metadata").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable section 'metadata': {exc}") from None
    if vocab_hash(meta["vocab"]) != meta["vocab_hash"]:
        raise FormatError("vocabulary hash mismatch in section 'metadata'")
    (count,) = rd.unpack("<I", "sections")
    arrays = {}
    for k in range(count):
        label = f"#{k}"
        (name_len,) = rd.unpack("<H", label)
        name = rd.take(name_len, label).decode("utf-8")
        (ndim,) = rd.unpack("<B", name)
        shape = rd.unpack(f"<{ndim}Q", name)
        (nbytes,) = rd.unpack("<Q", name)
        if nbytes != 4 * int(np.prod(shape, dtype=np.int64)):
            raise FormatError(f"length guard mismatch in section {name!r}")
        data = rd.take(nbytes, name)
        arrays[name] = np.frombuffer(data, dtype="<f4").reshape(shape).astype(np.float64)
    missing = set(_SECTIONS) - set(arrays)
    if missing:
        raise FormatError(f"missing section(s) {sorted(missing)}")
    if rd.pos != len(rd.data):
        raise FormatError("trailing bytes after the last section")
    return ModelParams(meta["variant"], meta["d"], meta["d_emb"], meta["C"], meta["vocab"],
                       tuple(meta["negators"]), tuple(meta["intensifiers"]), arrays)


def accuracy(params, sentences):
    sentences = list(sentences)
    if not sentences:
        return 0.0
    hits = sum(predict_label(params, s.tokens) == s.label for s in sentences)
    return hits / len(sentences)
