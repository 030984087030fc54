"""Command line entry point: ``clbt <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 data or format error,
3 numerical failure.
"""
import argparse
import json
import os
import sys
import time
from dataclasses import fields

import numpy as np

from . import __version__
from .alignment import extract_pairs, parse_bitext, parse_parallel, parse_pharaoh, write_pairs
from .embeddings import REDUCTIONS, EmbeddingMatrix, PairedEmbeddings, apply_transform, assemble_pairs, reduce_to_words, unit_normalize
from .errors import ClbtError, DimensionError, UsageError
from .evaluation import SynthSpec, ablate, as_embedding_matrices, evaluate, export_projection, generate_synthetic
from .fit import METHODS, FitConfig, fit
from .formats import read_embeddings, read_transform, write_embeddings, write_transform
from .wordpiece import WordPieceVocab, word_to_piece_spans


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text):
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _add_fit_flags(p):
    p.add_argument("--method", choices=METHODS, default=None, help="default: svd")
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--beta1", type=float, default=None)
    p.add_argument("--beta2", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--l2", type=float, default=None)
    p.add_argument("--config", help="key = value file of FitConfig fields; flags override it")


def _add_common(p):
    p.add_argument("--seed", type=int, default=None, help="default: 0")
    p.add_argument("--summary", help="also write the run summary as JSON here")


def build_parser():
    parser = _Parser(prog="clbt", description="Cross-lingual linear maps for contextual embeddings.")
    parser.add_argument("--version", action="version", version=f"clbt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract-pairs", help="one-to-one contextual pairs from bitext + alignments")
    p.add_argument("--bitext", required=True, help="'target ||| source' lines, or the target side with --bitext-source")
    p.add_argument("--bitext-source", help="source side as a separate line-aligned file")
    p.add_argument("--align", required=True, help="Pharaoh alignment file (left index = target)")
    p.add_argument("--vocab", help="WordPiece vocabulary, one piece per line")
    p.add_argument("--unk-token", default="[UNK]")
    p.add_argument("--pretokenized", action="store_true", help="bitext tokens are already wordpieces")
    p.add_argument("--pairs-out", required=True)
    p.add_argument("--target-emb", help="target piece embeddings; with --source-emb also assembles X and Y")
    p.add_argument("--source-emb")
    p.add_argument("--pairs-x", help="output path for assembled target matrix X")
    p.add_argument("--pairs-y", help="output path for assembled source matrix Y")
    p.add_argument("--strict", action="store_true", help="fail on missing embedding keys")
    p.add_argument("--format", choices=("text", "binary"), default="binary")
    _add_common(p)

    p = sub.add_parser("fit", help="learn W from paired matrices")
    p.add_argument("--pairs-x", required=True)
    p.add_argument("--pairs-y", required=True)
    p.add_argument("--out", required=True, help="transform file to write")
    p.add_argument("--normalize", action="store_true", help="unit-normalise rows before fitting")
    p.add_argument("--trace", help="write the per-epoch objective as CSV (gd only)")
    _add_fit_flags(p)
    _add_common(p)

    p = sub.add_parser("apply", help="map embeddings through a transform")
    p.add_argument("--transform", required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("text", "binary"), default="binary")
    p.add_argument("--reduce", choices=REDUCTIONS, default=None,
                   help="reduce pieces to words (needs --bitext); default leftmost when --bitext is given")
    p.add_argument("--bitext", help="bitext whose target side defines the word spans")
    p.add_argument("--bitext-source", help="source side file when --bitext holds only the target side")
    p.add_argument("--vocab")
    p.add_argument("--unk-token", default="[UNK]")
    p.add_argument("--pretokenized", action="store_true")
    _add_common(p)

    p = sub.add_parser("eval", help="retrieval and distance metrics on paired test data")
    p.add_argument("--transform", required=True)
    p.add_argument("--pairs-x", required=True)
    p.add_argument("--pairs-y", required=True)
    p.add_argument("--k", type=_int_list, default=[1, 5, 10])
    p.add_argument("--out", help="JSON report path")
    _add_common(p)

    p = sub.add_parser("ablate", help="training-size curve")
    p.add_argument("--pairs-x", required=True)
    p.add_argument("--pairs-y", required=True)
    p.add_argument("--test-x", required=True)
    p.add_argument("--test-y", required=True)
    p.add_argument("--counts", type=_int_list, required=True)
    p.add_argument("--k", type=_int_list, default=[1, 5, 10])
    p.add_argument("--resample", action="store_true", help="seeded random subsets instead of prefixes")
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--report", help="JSON report path")
    _add_fit_flags(p)
    _add_common(p)

    p = sub.add_parser("synth", help="planted-map synthetic pairs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--n-test", type=int, default=1000)
    p.add_argument("--planted", choices=("orthogonal", "linear"), default="orthogonal")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--format", choices=("text", "binary"), default="binary")
    _add_common(p)

    p = sub.add_parser("project", help="2-D PCA export of two embedding sets")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--in-b", required=True)
    p.add_argument("--labels", help="TSV of key<TAB>label")
    p.add_argument("--out", required=True)
    _add_common(p)
    return parser


def read_config_file(path):
    """Parse ``key = value`` lines (``#`` comments) into FitConfig keyword args."""
    known = {f.name: f.type for f in fields(FitConfig)}
    casts = {"method": str, "batch_size": lambda v: None if v.lower() in ("none", "full") else int(v),
             "max_epochs": int, "seed": int, "window": int}
    out = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                key, sep, value = line.partition(":")
            key, value = key.strip().replace("-", "_"), value.strip()
            if not sep or key not in known:
                raise UsageError(f"{path}:{line_no}: unknown or malformed config entry {line!r}")
            try:
                out[key] = casts.get(key, float)(value)
            except ValueError:
                raise UsageError(f"{path}:{line_no}: bad value for {key}: {value!r}") from None
    return out


def fit_config_from_args(args):
    values = read_config_file(args.config) if args.config else {}
    overrides = {
        "method": args.method, "learning_rate": args.lr, "beta1": args.beta1, "beta2": args.beta2,
        "max_epochs": args.epochs, "batch_size": args.batch_size, "rel_tolerance": args.tolerance,
        "l2_weight": args.l2,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    if args.seed is not None or "seed" not in values:
        values["seed"] = _seed(args)
    return FitConfig(**values)


def _seed(args):
    return 0 if args.seed is None else args.seed


def _load_pairs(x_path, y_path, normalize=False):
    x, y = read_embeddings(x_path), read_embeddings(y_path)
    if len(x) != len(y):
        raise DimensionError(f"{x_path} has {len(x)} rows but {y_path} has {len(y)}")
    if normalize:
        x, y = unit_normalize(x), unit_normalize(y)
    return PairedEmbeddings(x.vectors, y.vectors)


def _read_lines(path):
    with open(path, encoding="utf-8") as f:
        return f.read().splitlines()


def _load_bitext(args):
    if args.bitext_source:
        return parse_parallel(_read_lines(args.bitext), _read_lines(args.bitext_source))
    return parse_bitext(_read_lines(args.bitext))


def _load_vocab(args):
    if args.pretokenized:
        return None
    if not args.vocab:
        raise UsageError("--vocab is required unless --pretokenized is given")
    return WordPieceVocab.load(args.vocab, args.unk_token)


def cmd_extract_pairs(args, summary):
    vocab = _load_vocab(args)
    bitext = _load_bitext(args)
    alignments = parse_pharaoh(_read_lines(args.align))
    extracted = extract_pairs(bitext, alignments, vocab)
    with open(args.pairs_out, "w", encoding="utf-8", newline="\n") as f:
        n_pairs = write_pairs(f, extracted)
    summary["counts"] = {"sentences": len(bitext), "pairs": n_pairs}
    wants_matrices = any((args.target_emb, args.source_emb, args.pairs_x, args.pairs_y))
    if wants_matrices:
        if not all((args.target_emb, args.source_emb, args.pairs_x, args.pairs_y)):
            raise UsageError("--target-emb, --source-emb, --pairs-x and --pairs-y go together")
        records = [r for s in extracted for r in s.records()]
        paired = assemble_pairs(records, read_embeddings(args.target_emb), read_embeddings(args.source_emb), args.strict)
        keys = [f"{r.sentence_index}:{r.target_piece}" for r in paired.provenance]
        source_keys = [f"{r.sentence_index}:{r.source_piece}" for r in paired.provenance]
        write_embeddings(args.pairs_x, EmbeddingMatrix(keys, paired.x), args.format)
        write_embeddings(args.pairs_y, EmbeddingMatrix(source_keys, paired.y), args.format)
        summary["counts"].update(assembled=paired.n, skipped_missing=paired.skipped)


def cmd_fit(args, summary):
    config = fit_config_from_args(args)
    summary["config"] = config.to_dict()
    pairs = _load_pairs(args.pairs_x, args.pairs_y, args.normalize)
    transform, trace = fit(pairs, config)
    write_transform(args.out, transform)
    summary["counts"] = {"pairs": pairs.n, "target_dim": pairs.target_dim, "source_dim": pairs.source_dim}
    summary["objective"] = transform.objective
    if transform.ridge:
        summary["ridge"] = transform.ridge
    if trace is not None:
        summary["epochs"] = trace.epochs
        summary["stop_reason"] = trace.stop_reason
        if args.trace:
            with open(args.trace, "w", encoding="utf-8", newline="\n") as f:
                f.write("epoch,objective\n")
                for i, value in enumerate(trace.objectives, start=1):
                    f.write(f"{i},{value:.9g}\n")
    elif args.trace:
        raise UsageError("--trace is only meaningful with --method gd")


def cmd_apply(args, summary):
    transform = read_transform(args.transform)
    emb = read_embeddings(args.inp)
    out = apply_transform(transform, emb)
    if args.reduce and not args.bitext:
        raise UsageError("--reduce needs --bitext to know word boundaries")
    if args.bitext:
        vocab = _load_vocab(args)
        spans = {s.index: word_to_piece_spans(s.target_tokens, vocab) for s in _load_bitext(args)}
        out = reduce_to_words(out, spans, args.reduce or "leftmost")
    write_embeddings(args.out, out, args.format)
    summary["counts"] = {"input_rows": len(emb), "output_rows": len(out), "dim": out.dim}


def cmd_eval(args, summary):
    transform = read_transform(args.transform)
    test = _load_pairs(args.pairs_x, args.pairs_y)
    report = evaluate(transform, test, args.k)
    print(report.to_text())
    if args.out:
        _write_text(args.out, report.to_json() + "\n")
    summary["counts"] = {"pairs": test.n}
    summary["report"] = report.to_dict()


def cmd_ablate(args, summary):
    config = fit_config_from_args(args)
    summary["config"] = config.to_dict()
    train = _load_pairs(args.pairs_x, args.pairs_y)
    test = _load_pairs(args.test_x, args.test_y)
    report = ablate(train, args.counts, config, test, args.k, resample_seed=_seed(args) if args.resample else None)
    print(report.to_text())
    _write_text(args.out, report.to_csv())
    if args.report:
        _write_text(args.report, report.to_json() + "\n")
    summary["counts"] = {"train_pairs": train.n, "test_pairs": test.n}


def cmd_synth(args, summary):
    spec = SynthSpec(args.n, args.d, args.noise, _seed(args), args.planted, args.n_test)
    train, test, planted = generate_synthetic(spec)
    os.makedirs(args.out_dir, exist_ok=True)
    outputs = {"train": train, "test": test}
    for name, pairs in outputs.items():
        if pairs is None:
            continue
        x, y = as_embedding_matrices(pairs)
        write_embeddings(os.path.join(args.out_dir, f"{name}_x.clbe"), x, args.format)
        write_embeddings(os.path.join(args.out_dir, f"{name}_y.clbe"), y, args.format)
    # the planted map is stored as a CLBE matrix, one key per output row
    write_embeddings(
        os.path.join(args.out_dir, "planted.clbe"),
        EmbeddingMatrix([f"row:{i}" for i in range(spec.d)], planted),
        "binary",
    )
    summary["config"] = {"n": spec.n, "d": spec.d, "noise_sigma": spec.noise_sigma,
                         "seed": spec.seed, "planted": spec.planted, "n_test": spec.n_test}


def cmd_project(args, summary):
    a, b = read_embeddings(args.inp), read_embeddings(args.in_b)
    labels = {}
    if args.labels:
        for line in _read_lines(args.labels):
            if line.strip():
                key, _, label = line.partition("\t")
                labels[key] = label
    _write_text(args.out, export_projection(a, b, labels, set_names=("a", "b")))
    summary["counts"] = {"a": len(a), "b": len(b)}


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


COMMANDS = {
    "extract-pairs": cmd_extract_pairs,
    "fit": cmd_fit,
    "apply": cmd_apply,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "synth": cmd_synth,
    "project": cmd_project,
}


def run(argv=None):
    """Run one invocation and return its exit code."""
    started = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    inputs = {k: v for k, v in vars(args).items() if k not in ("command", "summary") and v not in (None, False)}
    summary = {"command": args.command, "inputs": inputs}
    try:
        COMMANDS[args.command](args, summary)
    except ClbtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    summary["wall_time"] = round(time.perf_counter() - started, 6)
    text = json.dumps(summary, indent=2, sort_keys=True, default=_json_default)
    print(text, file=sys.stderr)
    if args.summary:
        _write_text(args.summary, text + "\n")
    return 0


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    return str(obj)


def main():
    sys.exit(run())
