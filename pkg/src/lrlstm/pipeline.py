"""Glue between a resolved run configuration and the library: load resources
and datasets, build fresh parameters."""

from dataclasses import dataclass
import logging

from . import config as cfgmod
from .corpus import (
    ConfigError, Dataset, load_mr, load_sst, make_synthetic, split_dataset,
)
from .model import build_vocab, init_params
from .resources import Lexicon, WordLists, read_lexicon_tsv

log = logging.getLogger(__name__)


@dataclass
class Prepared:
    train: Dataset
    valid: Dataset
    test: Dataset
    lexicon: Lexicon
    word_lists: WordLists
    vocab: list

    @property
    def full(self):
        return Dataset(self.train.sentences + self.valid.sentences + self.test.sentences,
                       self.train.scheme, self.train.name.rsplit(".", 1)[0])


def load_resources(resolved):
    res = resolved["resources"]
    if bool(res["negators"]) != bool(res["intensifiers"]):
        raise ConfigError("[resources] negators and intensifiers must be given together")
    word_lists = (WordLists.from_files(res["negators"], res["intensifiers"])
                  if res["negators"] else WordLists.default())
    lexicon = Lexicon(read_lexicon_tsv(res["lexicon"])) if res["lexicon"] else None
    return lexicon, word_lists


def load_datasets(resolved, seed):
    """Returns ``(train, valid, test, lexicon_or_None)`` per ``[data] kind``."""
    data = resolved["data"]
    ratios = cfgmod.train_config(resolved).split_ratios
    kind = data["kind"].strip().lower()
    if kind == "mr":
        if not (data["mr_pos"] and data["mr_neg"]):
            raise ConfigError("[data] kind = mr needs mr_pos and mr_neg")
        return split_dataset(load_mr(data["mr_pos"], data["mr_neg"]), ratios, seed) + (None,)
    if kind == "sst":
        if data["sst_train"] and data["sst_dev"] and data["sst_test"]:
            parts = tuple(load_sst(data[k], f"sst.{k[4:]}") for k in ("sst_train", "sst_dev", "sst_test"))
            return parts + (None,)
        if not data["sst"]:
            raise ConfigError("[data] kind = sst needs sst_train/sst_dev/sst_test or sst")
        return split_dataset(load_sst(data["sst"]), ratios, seed) + (None,)
    if kind == "synthetic":
        syn = make_synthetic(int(data["synthetic_size"]), seed,
                             words_per_class=int(data["synthetic_words"]),
                             C=int(data["synthetic_classes"]))
        return split_dataset(syn.dataset, ratios, seed) + (syn.lexicon,)
    raise ConfigError(f"[data] kind: expected mr, sst or synthetic, got {kind!r}")


def prepare(resolved):
    cfgmod.check_paths(resolved)
    seed = cfgmod.train_config(resolved).seed
    lexicon, word_lists = load_resources(resolved)
    train, valid, test, builtin_lex = load_datasets(resolved, seed)
    if lexicon is None:
        lexicon = builtin_lex or Lexicon({})
        if builtin_lex is None:
            log.warning("no lexicon configured; sentiment regularizer will not fire")
    train, valid, test = (d.with_roles(lexicon, word_lists) for d in (train, valid, test))
    vocab = build_vocab([train, valid, test])
    return Prepared(train, valid, test, lexicon, word_lists, vocab)


def fresh_params(resolved, prepared):
    m = resolved["model"]
    seed = cfgmod.train_config(resolved).seed
    try:
        d, d_emb = int(m["d"]), int(m["d_emb"])
    except ValueError:
        raise ConfigError("[model] d and d_emb must be integers") from None
    if m["variant"] not in ("lstm", "bilstm"):
        raise ConfigError(f"[model] variant: expected lstm or bilstm, got {m['variant']!r}")
    emb = resolved["resources"]["embeddings"] or None
    return init_params(seed, d, d_emb, prepared.train.scheme.C, prepared.vocab,
                       prepared.word_lists, m["variant"], embeddings_path=emb)
