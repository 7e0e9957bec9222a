"""Command-line entry point.

Exit codes: 0 success, 1 runtime failure (I/O, parse, numeric), 2 usage or
configuration error.
"""

import argparse
import csv
import logging
import os
import sys

from . import analysis, config as cfgmod, gradcheck, pipeline
from .corpus import ConfigError, CorpusParseError, corpus_stats, extract_subset, format_stats, load_sst
from .model import FormatError, load_checkpoint, save_checkpoint
from .numeric import NumericError
from .regularizers import ALL_REGULARIZERS
from .resources import (
    LEXICON_CLASSES, NEGATOR, INTENSIFIER, SENTIMENT, SST_LEAF_TO_LEXICON,
    ResourceParseError, build_lexicon, read_lexicon_tsv, write_lexicon_tsv,
)
from .training import train

log = logging.getLogger("lrlstm")

COMMANDS = {
    "train": "train a model and save the best-validation checkpoint",
    "eval": "report accuracy of a checkpoint on the configured splits",
    "ablate": "retrain with each regularizer removed and report accuracies",
    "stats": "count sentences containing sentiment / negation / intensity words",
    "subset": "write the sentences containing a negator, intensifier or sentiment word",
    "analyze-negation": "negation curves and negator phrase-pair scores",
    "analyze-intensity": "intensifier transition matrices",
    "gradcheck": "finite-difference check of the full objective on a small instance",
    "export-lexicon": "merge two lexicon sources, dropping conflicting words",
}


class UsageError(Exception):
    pass


def _common(p):
    p.add_argument("--config", metavar="PATH", help="sectioned key = value run configuration")
    p.add_argument("--seed", type=int, metavar="U64")
    p.add_argument("--model", choices=("lstm", "bilstm"))
    p.add_argument("--disable", action="append", choices=ALL_REGULARIZERS, default=None,
                   help="disable a regularizer (repeatable)")
    p.add_argument("--margin", type=float, metavar="REAL")
    p.add_argument("--alpha", type=float, metavar="REAL")
    p.add_argument("--beta", type=float, metavar="REAL")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--threads", type=int, metavar="N")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lrlstm",
        description="Linguistically regularized LSTM sentiment classifiers.",
        epilog="\n".join(f"  {k:<18} {v}" for k, v in COMMANDS.items()),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    cmds = {name: sub.add_parser(name, help=text, description=text) for name, text in COMMANDS.items()}
    for name in ("train", "eval", "ablate", "stats", "subset", "analyze-negation", "analyze-intensity"):
        _common(cmds[name])
    for name in ("eval", "analyze-negation", "analyze-intensity"):
        cmds[name].add_argument("--checkpoint", metavar="PATH", required=True)
    cmds["stats"].add_argument("--csv", metavar="PATH", help="append a CSV row of the counts")
    cmds["subset"].add_argument("--role", choices=(NEGATOR, INTENSIFIER, SENTIMENT), required=True)
    for name in ("analyze-negation", "analyze-intensity"):
        cmds[name].add_argument("--window", type=int, help="limit base phrases to N tokens")
    cmds["analyze-negation"].add_argument("--grid", type=int, default=101)
    g = cmds["gradcheck"]
    g.add_argument("--seed", type=int, default=0, metavar="U64")
    g.add_argument("--model", choices=("lstm", "bilstm"), default="lstm")
    g.add_argument("--classes", type=int, choices=(2, 5), default=5)
    g.add_argument("--tol", type=float, default=1e-4)
    e = cmds["export-lexicon"]
    e.add_argument("--source-a", metavar="TSV", required=True, help="word<TAB>class lexicon (e.g. MPQA)")
    e.add_argument("--source-b", metavar="TSV", help="second word<TAB>class lexicon")
    e.add_argument("--sst-leaves", metavar="TREES", help="derive the second source from SST leaf labels")
    e.add_argument("--out", metavar="PATH", required=True)
    return parser


def _resolve(args):
    overrides = {
        ("train", "seed"): args.seed,
        ("model", "variant"): args.model,
        ("regularizer", "margin"): args.margin,
        ("regularizer", "alpha"): args.alpha,
        ("regularizer", "beta"): args.beta,
        ("output", "dir"): args.out,
        ("train", "threads"): args.threads,
        ("regularizer", "disable"): ",".join(args.disable) if args.disable else None,
    }
    resolved = cfgmod.load(args.config, overrides)
    cfgmod.train_config(resolved)  # validate early
    return resolved


def _outdir(resolved):
    out = resolved["output"]["dir"]
    os.makedirs(out, exist_ok=True)
    cfgmod.write_snapshot(resolved, os.path.join(out, "config.resolved.ini"))
    with open(os.path.join(out, "seed"), "w", encoding="utf-8") as fh:
        fh.write(resolved["train"]["seed"] + "\n")
    return out


def cmd_train(args):
    resolved = _resolve(args)
    prep = pipeline.prepare(resolved)
    out = _outdir(resolved)
    tcfg = cfgmod.train_config(resolved)
    params = pipeline.fresh_params(resolved, prep)
    best, tlog = train(prep.train, prep.valid, params, tcfg)
    save_checkpoint(best, os.path.join(out, "model.ckpt"))
    tlog.write_csv(os.path.join(out, "train_log.csv"))
    rows = [analysis.AccuracyRow("model", name, analysis.evaluate(best, ds))
            for name, ds in (("valid", prep.valid), ("test", prep.test))]
    analysis.write_accuracy_csv(rows, os.path.join(out, "accuracy.csv"))
    for r in rows:
        print(f"{r.dataset} accuracy = {r.accuracy:.4f}")
    return 1 if tlog.error else 0


def cmd_eval(args):
    resolved = _resolve(args)
    prep = pipeline.prepare(resolved)
    out = _outdir(resolved)
    params = load_checkpoint(args.checkpoint)
    rows = [analysis.AccuracyRow(os.path.basename(args.checkpoint), name, analysis.evaluate(params, ds))
            for name, ds in _eval_sets(prep).items()]
    analysis.write_accuracy_csv(rows, os.path.join(out, "accuracy.csv"))
    for r in rows:
        print(f"{r.dataset} accuracy = {r.accuracy:.4f}")
    return 0


def _eval_sets(prep):
    return {
        "test": prep.test,
        "test_negation": extract_subset(prep.test, NEGATOR, prep.word_lists, prep.lexicon),
        "test_intensity": extract_subset(prep.test, INTENSIFIER, prep.word_lists, prep.lexicon),
    }


def cmd_ablate(args):
    resolved = _resolve(args)
    prep = pipeline.prepare(resolved)
    out = _outdir(resolved)
    tcfg = cfgmod.train_config(resolved)
    spec = analysis.AblationSpec.leave_one_out()
    rows, _ = analysis.run_ablation(spec, prep.train, prep.valid, _eval_sets(prep),
                                    lambda: pipeline.fresh_params(resolved, prep), tcfg)
    analysis.write_accuracy_csv(rows, os.path.join(out, "ablation.csv"))
    for r in rows:
        print(f"{r.config_id:<8} {r.dataset:<16} {r.accuracy:.4f}")
    return 0


def cmd_stats(args):
    resolved = _resolve(args)
    prep = pipeline.prepare(resolved)
    _outdir(resolved)
    stats = corpus_stats(prep.full, prep.word_lists, prep.lexicon)
    sys.stdout.write(format_stats(stats, prep.full.name))
    if args.csv:
        new = not os.path.exists(args.csv)
        with open(args.csv, "a", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            if new:
                w.writerow(["dataset"] + list(stats))
            w.writerow([prep.full.name] + list(stats.values()))
    return 0


def cmd_subset(args):
    resolved = _resolve(args)
    prep = pipeline.prepare(resolved)
    out = _outdir(resolved)
    path = os.path.join(out, f"subset_{args.role}.tsv")
    with open(path, "w", encoding="utf-8") as fh:
        for part in (prep.train, prep.valid, prep.test):
            sub = extract_subset(part, args.role, prep.word_lists, prep.lexicon)
            for s in sub:
                fh.write(f"{part.name}\t{s.label}\t{' '.join(s.tokens)}\n")
    print(f"wrote {path}")
    return 0


def cmd_analyze_negation(args):
    resolved = _resolve(args)
    prep = pipeline.prepare(resolved)
    out = _outdir(resolved)
    params = load_checkpoint(args.checkpoint)
    for k, word in enumerate(params.negators):
        header, rows = analysis.negation_curve(params["T_neg"][k], args.grid)
        analysis.write_rows_csv(header, rows, os.path.join(out, f"negation_curve_{word.replace(' ', '_')}.csv"))
    pairs = analysis.extract_phrase_pairs(params, prep.full, params.negators, window=args.window)
    analysis.write_pairs_csv(pairs, os.path.join(out, "negation_pairs.csv"), params.C)
    print(f"{len(params.negators)} curves, {len(pairs)} phrase pairs written to {out}")
    return 0


def cmd_analyze_intensity(args):
    resolved = _resolve(args)
    prep = pipeline.prepare(resolved)
    out = _outdir(resolved)
    params = load_checkpoint(args.checkpoint)
    pairs = analysis.extract_phrase_pairs(params, prep.full, params.intensifiers, window=args.window)
    analysis.write_pairs_csv(pairs, os.path.join(out, "intensity_pairs.csv"), params.C)
    words = sorted({p.modifier for p in pairs})
    mats = [analysis.intensity_transitions(pairs, w, params.C) for w in words]
    analysis.write_transitions_csv(mats, os.path.join(out, "intensity_transitions.csv"))
    print(f"{len(pairs)} phrase pairs over {len(words)} intensifiers written to {out}")
    return 0


def cmd_gradcheck(args):
    result = gradcheck.check(args.seed, args.model, args.classes)
    print(f"max relative error = {result.max_error:.3e} over {result.checked} entries "
          f"(worst {result.worst[0]}[{result.worst[1]}])")
    return 0 if result.passed(args.tol) else 1


def cmd_export_lexicon(args):
    if bool(args.source_b) == bool(args.sst_leaves):
        raise UsageError("give exactly one of --source-b or --sst-leaves")
    a = read_lexicon_tsv(args.source_a)
    if args.sst_leaves:
        b, conflicts = {}, set()
        for word, label in load_sst(args.sst_leaves).polar_leaves:
            cls = SST_LEAF_TO_LEXICON[label]
            if b.get(word, cls) != cls:
                conflicts.add(word)
            b[word] = cls
        for w in conflicts:
            del b[w]
    else:
        b = read_lexicon_tsv(args.source_b)
    lex = build_lexicon(a, b)
    write_lexicon_tsv(lex, args.out)
    print(f"kept = {lex.kept}\ndropped = {lex.dropped}")
    counts = {name: 0 for name in LEXICON_CLASSES}
    for cls in lex.classes.values():
        counts[LEXICON_CLASSES[cls]] += 1
    for name, n in counts.items():
        print(f"{name} = {n}")
    return 0


HANDLERS = {
    "train": cmd_train, "eval": cmd_eval, "ablate": cmd_ablate, "stats": cmd_stats,
    "subset": cmd_subset, "analyze-negation": cmd_analyze_negation,
    "analyze-intensity": cmd_analyze_intensity, "gradcheck": cmd_gradcheck,
    "export-lexicon": cmd_export_lexicon,
}


def dispatch(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.verbose:
        logging.getLogger("lrlstm").setLevel(logging.INFO)
    try:
        return HANDLERS[args.command](args)
    except (ConfigError, UsageError) as exc:
        print(f"lrlstm {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, NumericError, FormatError, CorpusParseError, ResourceParseError, ValueError) as exc:
        print(f"lrlstm {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
