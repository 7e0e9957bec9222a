"""Run configuration: a sectioned ``key = value`` file plus command-line overrides.

Precedence is flag > file > built-in default. Every key is declared in
``DEFAULTS``; anything else in a file is rejected.
"""

import configparser
import os

from .corpus import ConfigError
from .regularizers import ALL_REGULARIZERS, RegularizerConfig
from .training import TrainConfig

DEFAULTS = {
    "model": {"variant": "lstm", "d": "300", "d_emb": "300"},
    "train": {
        "adagrad_lr": "0.1", "embed_lr": "0.2", "batch_size": "25", "max_batches": "3000",
        "dropout_p": "0.5", "eval_every": "100", "seed": "0", "clip_norm": "5.0",
        "threads": "1", "split": "0.8, 0.1, 0.1",
    },
    "regularizer": {"alpha": "0.5", "margin": "0.3", "beta": "0.0001", "disable": ""},
    "data": {
        "kind": "synthetic", "mr_pos": "", "mr_neg": "", "sst": "",
        "sst_train": "", "sst_dev": "", "sst_test": "",
        "synthetic_size": "2000", "synthetic_classes": "5", "synthetic_words": "60",
    },
    "resources": {"lexicon": "", "negators": "", "intensifiers": "", "embeddings": ""},
    "output": {"dir": "runs/latest"},
}

PATH_KEYS = {
    ("data", "mr_pos"), ("data", "mr_neg"), ("data", "sst"), ("data", "sst_train"),
    ("data", "sst_dev"), ("data", "sst_test"), ("resources", "lexicon"),
    ("resources", "negators"), ("resources", "intensifiers"), ("resources", "embeddings"),
}


def load(path=None, overrides=None):
    """Resolved ``{section: {key: str}}`` from defaults, an optional file and overrides."""
    resolved = {sec: dict(keys) for sec, keys in DEFAULTS.items()}
    if path is not None:
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        base = os.path.dirname(os.path.abspath(path))
        for sec in parser.sections():
            if sec not in resolved:
                raise ConfigError(f"{path}: unknown section [{sec}]")
            for key, value in parser.items(sec):
                if key not in resolved[sec]:
                    raise ConfigError(f"{path}: unknown key '{key}' in [{sec}]")
                if (sec, key) in PATH_KEYS and value and not os.path.isabs(value):
                    value = os.path.normpath(os.path.join(base, value))
                resolved[sec][key] = value
    for (sec, key), value in (overrides or {}).items():
        if value is not None:
            resolved[sec][key] = str(value)
    return resolved


def check_paths(resolved):
    for sec, key in sorted(PATH_KEYS):
        value = resolved[sec][key]
        if value and not os.path.exists(value):
            raise ConfigError(f"[{sec}] {key}: path does not exist: {value}")


def write_snapshot(resolved, path):
    parser = configparser.ConfigParser(interpolation=None)
    for sec, keys in resolved.items():
        parser[sec] = keys
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)


def _num(resolved, sec, key, kind):
    raw = resolved[sec][key]
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"[{sec}] {key}: expected {kind.__name__}, got {raw!r}") from None


def disabled_set(resolved):
    raw = resolved["regularizer"]["disable"]
    names = {x.strip().lower() for x in raw.replace(",", " ").split() if x.strip()}
    unknown = names - set(ALL_REGULARIZERS)
    if unknown:
        raise ConfigError(f"[regularizer] disable: unknown regularizer(s) {sorted(unknown)}")
    return frozenset(names)


def regularizer_config(resolved):
    try:
        return RegularizerConfig(
            alpha=_num(resolved, "regularizer", "alpha", float),
            margin=_num(resolved, "regularizer", "margin", float),
            beta=_num(resolved, "regularizer", "beta", float),
            enabled=frozenset(ALL_REGULARIZERS) - disabled_set(resolved),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[regularizer] {exc}") from None


def train_config(resolved):
    t = resolved["train"]
    try:
        split = tuple(float(x) for x in t["split"].split(","))
    except ValueError:
        raise ConfigError(f"[train] split: expected three comma-separated numbers, got {t['split']!r}") from None
    seed = _num(resolved, "train", "seed", int)
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("[train] seed: must be an unsigned 64-bit integer")
    try:
        return TrainConfig(
            adagrad_lr=_num(resolved, "train", "adagrad_lr", float),
            embed_lr=_num(resolved, "train", "embed_lr", float),
            batch_size=_num(resolved, "train", "batch_size", int),
            max_batches=_num(resolved, "train", "max_batches", int),
            dropout_p=_num(resolved, "train", "dropout_p", float),
            eval_every=_num(resolved, "train", "eval_every", int),
            seed=seed,
            clip_norm=_num(resolved, "train", "clip_norm", float),
            threads=_num(resolved, "train", "threads", int),
            reg=regularizer_config(resolved),
            split_ratios=split,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[train] {exc}") from None
