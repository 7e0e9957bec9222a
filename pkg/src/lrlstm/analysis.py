"""Evaluation, ablation sweeps and the negation / intensity analyses.

Every analysis writes plain CSV; plotting is left to external tools.
"""

from dataclasses import dataclass
import csv

import numpy as np

from .corpus import ConfigError
from .model import accuracy, predict_sentence
from .numeric import softmax
from .regularizers import ALL_REGULARIZERS
from .training import train


def evaluate(params, dataset):
    """Sentence-level accuracy; argmax ties go to the lower class index."""
    if dataset.scheme.C != params.C:
        raise ConfigError(f"dataset has {dataset.scheme.C} classes, model predicts {params.C}")
    return accuracy(params, dataset.sentences)


# -- ablation ----------------------------------------------------------------

@dataclass(frozen=True)
class AblationSpec:
    disabled_sets: tuple  # tuple of frozensets; the empty set is the full model

    def __post_init__(self):
        sets = tuple(frozenset(s) for s in self.disabled_sets)
        if frozenset() not in sets:
            sets = (frozenset(),) + sets
        for s in sets:
            if s - set(ALL_REGULARIZERS):
                raise ConfigError(f"unknown regularizer(s) in ablation: {sorted(s)}")
        object.__setattr__(self, "disabled_sets", sets)

    @classmethod
    def leave_one_out(cls):
        return cls(tuple(frozenset([r]) for r in ALL_REGULARIZERS))


def config_id(disabled):
    return "full" if not disabled else "".join(f"-{r}" for r in ALL_REGULARIZERS if r in disabled)


@dataclass
class AccuracyRow:
    config_id: str
    dataset: str
    accuracy: float


def run_ablation(spec, train_set, valid_set, eval_sets, make_params, config):
    """Train one model per configuration (same seed) and score it.

    ``eval_sets`` maps a name to a Dataset (the test set plus any negation or
    intensity subsets); ``make_params()`` returns fresh initial parameters.
    Returns ``(rows, models)`` keyed by configuration id.
    """
    if not spec.disabled_sets:
        raise ConfigError("empty ablation spec")
    rows, models = [], {}
    for disabled in spec.disabled_sets:
        cid = config_id(disabled)
        reg = config.reg.without(*disabled)
        cfg = _replace_reg(config, reg)
        best, _ = train(train_set, valid_set, make_params(), cfg)
        models[cid] = best
        for name, ds in eval_sets.items():
            rows.append(AccuracyRow(cid, name, evaluate(best, ds)))
    return rows, models


def _replace_reg(config, reg):
    from dataclasses import replace
    return replace(config, reg=reg)


def write_accuracy_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["config_id", "dataset", "accuracy"])
        for r in rows:
            w.writerow([r.config_id, r.dataset, repr(r.accuracy)])


# -- negation curve ----------------------------------------------------------

def negation_curve(T, grid_size=101):
    """Map ``[1-x, x]`` through ``softmax(T p)`` on a uniform grid of x in [0, 1].

    Returns ``(header, rows)``. For two classes rows are ``(x, y)`` with y the
    positive score. For more classes x interpolates between the most negative
    and the most positive one-hot distributions and rows carry every mapped
    probability (header ``x, p0 .. p{C-1}``).
    """
    T = np.asarray(T, dtype=np.float64)
    C = T.shape[0]
    if T.shape != (C, C):
        raise ValueError("transformation matrix must be square")
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    xs = np.linspace(0.0, 1.0, grid_size)
    rows = []
    for x in xs:
        p = np.zeros(C)
        p[0], p[-1] = 1.0 - x, x
        q = softmax(T @ p)
        rows.append((float(x), float(q[1])) if C == 2 else (float(x),) + tuple(float(v) for v in q))
    header = ("x", "y") if C == 2 else ("x",) + tuple(f"p{k}" for k in range(C))
    return header, rows


def write_rows_csv(header, rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])


# -- phrase pairs --------------------------------------------------------------

@dataclass
class PhrasePair:
    sentence_id: int
    position: int
    modifier: str
    base: tuple
    modified: tuple
    base_dist: np.ndarray
    modified_dist: np.ndarray

    @property
    def base_label(self):
        return int(np.argmax(self.base_dist))

    @property
    def modified_label(self):
        return int(np.argmax(self.modified_dist))

    @property
    def base_score(self):
        return float(self.base_dist[-1])

    @property
    def modified_score(self):
        return float(self.modified_dist[-1])


def _find_modifiers(tokens, entries):
    spans = sorted({tuple(e.split()) for e in entries}, key=len, reverse=True)
    i = 0
    while i < len(tokens):
        for span in spans:
            if tuple(tokens[i:i + len(span)]) == span:
                yield i, " ".join(span), len(span)
                i += len(span)
                break
        else:
            i += 1


def extract_phrase_pairs(params, dataset, modifier_set, window=None):
    """Score every (base, modifier + base) pair found in ``dataset``.

    The base phrase is the suffix after the modifier to the end of the sentence,
    or at most ``window`` tokens of it. Modifiers at the very end are skipped.
    """
    pairs = []
    for sid, s in enumerate(dataset.sentences):
        for pos, entry, width in _find_modifiers(s.tokens, modifier_set):
            stop = len(s.tokens) if window is None else min(len(s.tokens), pos + width + window)
            base = tuple(s.tokens[pos + width:stop])
            if not base:
                continue
            modified = tuple(s.tokens[pos:pos + width]) + base
            pairs.append(PhrasePair(sid, pos, entry, base, modified,
                                    predict_sentence(params, base), predict_sentence(params, modified)))
    return pairs


def write_pairs_csv(pairs, path, C):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if C == 2:
            w.writerow(["sentence_id", "position", "modifier", "base_score", "modified_score"])
            for p in pairs:
                w.writerow([p.sentence_id, p.position, p.modifier, repr(p.base_score), repr(p.modified_score)])
        else:
            w.writerow(["sentence_id", "position", "modifier", "base_label", "modified_label"])
            for p in pairs:
                w.writerow([p.sentence_id, p.position, p.modifier, p.base_label, p.modified_label])


@dataclass
class TransitionMatrix:
    word: str
    counts: np.ndarray  # counts[i, j]: base label i -> modified label j


def intensity_transitions(pairs, word, C):
    m = np.zeros((C, C), dtype=np.int64)
    for p in pairs:
        if p.modifier == word:
            m[p.base_label, p.modified_label] += 1
    return TransitionMatrix(word, m)


def write_transitions_csv(matrices, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["word", "i", "j", "count"])
        for tm in matrices:
            C = tm.counts.shape[0]
            for i in range(C):
                for j in range(C):
                    w.writerow([tm.word, i, j, int(tm.counts[i, j])])
