"""Command line interface: corpus cleaning and splitting, model training,
lexicon building, prediction, evaluation and length sweeps.

Every subcommand exits 0 on success and 1 on failure (message on stderr),
writes output files atomically (temp file + rename) and embeds its resolved
configuration in whatever manifest or report it produces. `--config FILE`
loads per-subcommand defaults from a JSON object; explicit flags win.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
import tempfile
import time
from pathlib import Path

from sklearn.exceptions import NotFittedError

from .corpus import clean_text, corpora_by_language, load_corpus, split_train_test
from .evaluation import (
    DEFAULT_SWEEP_LENGTHS,
    compare_external,
    emit_report,
    evaluate,
    length_sweep,
)
from .languages import ALL_LANGUAGES
from .lexicon import LexiconVoteClassifier, build_lexicon, load_lexicon, save_lexicon
from .naive_bayes import CharNgramNaiveBayes, load_model, save_model
from .stacked import StackedLanguageClassifier

#: Environment variable naming the default directory for model artifacts
#: (an ``nb.model`` file and a ``lexicon/`` directory).
MODEL_DIR_ENV = "SALID_MODEL_DIR"

_NB_FILENAME = "nb.model"
_LEXICON_DIRNAME = "lexicon"


class CliError(ValueError):
    """A user-facing command line failure."""


def _write_bytes_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _write_text_atomic(path: Path, text: str) -> None:
    _write_bytes_atomic(path, text.encode("utf-8"))


def _write_json_atomic(path: Path, obj) -> None:
    _write_bytes_atomic(
        path, (json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")
    )


def _emit_bytes(data: bytes, output: str | None) -> None:
    """Write to a file atomically, or to stdout when output is '-' or None."""
    if output is None or output == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        _write_bytes_atomic(Path(output), data)


def _input_lines(paths_or_texts: list[str]) -> list[str]:
    """Positional texts if given, otherwise one text per stdin line."""
    if paths_or_texts:
        return list(paths_or_texts)
    return sys.stdin.read().splitlines()


def _resolved_config(args: argparse.Namespace, command: str) -> dict:
    """The effective option values, for embedding into manifests/reports.
    Input data (the texts to classify) is not configuration and is skipped."""
    skip = {"func", "config", "texts"}
    config = {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in skip and not key.startswith("_")
    }
    return {"command": command, **config}


def _model_dir(args: argparse.Namespace) -> str | None:
    explicit = getattr(args, "model_dir", None)
    return explicit if explicit is not None else os.environ.get(MODEL_DIR_ENV)


def _nb_model_path(args: argparse.Namespace) -> Path:
    if getattr(args, "nb_model", None):
        return Path(args.nb_model)
    base = _model_dir(args)
    if base:
        return Path(base) / _NB_FILENAME
    raise CliError(
        f"no model given: pass --nb-model/--model-dir or set ${MODEL_DIR_ENV}"
    )


def _lexicon_dir_path(args: argparse.Namespace) -> Path:
    if getattr(args, "lexicon_dir", None):
        return Path(args.lexicon_dir)
    base = _model_dir(args)
    if base:
        return Path(base) / _LEXICON_DIRNAME
    raise CliError(
        f"no lexicon given: pass --lexicon-dir/--model-dir or set ${MODEL_DIR_ENV}"
    )


def _resolve_margin(args: argparse.Namespace) -> int:
    """Explicit --margin wins; otherwise a bundle manifest in the model
    directory supplies it; otherwise 1."""
    if getattr(args, "margin", None) is not None:
        return args.margin
    base = _model_dir(args)
    if base:
        manifest_path = Path(base) / "manifest.json"
        if manifest_path.is_file():
            with contextlib.suppress(ValueError, OSError, KeyError):
                margin = json.loads(manifest_path.read_text(encoding="utf-8"))["margin"]
                if isinstance(margin, int) and margin >= 1:
                    return margin
    return 1


class _CleanedNgramModel:
    """Adapter giving a fitted n-gram model the raw-text predict interface
    (cleaning each input the way the model's training corpus was cleaned)."""

    def __init__(self, nb: CharNgramNaiveBayes):
        self.nb = nb

    def predict(self, X):
        return self.nb.predict([clean_text(t, lowercase=self.nb.lowercase) for t in X])


class _CleanedLexiconModel:
    def __init__(self, clf: LexiconVoteClassifier, lowercase: bool):
        self.clf = clf
        self.lowercase = lowercase

    def predict(self, X):
        return self.clf.predict([clean_text(t, lowercase=self.lowercase) for t in X])


# ---------------------------------------------------------------------------
# subcommands


def _cmd_clean(args: argparse.Namespace) -> int:
    lowercase = not args.no_lowercase
    if args.format == "text":
        if args.input == "-":
            raw = sys.stdin.read()
        else:
            raw = Path(args.input).read_text(encoding="utf-8")
        cleaned = "\n".join(clean_text(line, lowercase=lowercase) for line in raw.splitlines())
        _emit_bytes((cleaned + "\n" if cleaned else "").encode("utf-8"), args.output)
        return 0

    # labeled corpus: parse, clean, re-emit as TSV (empty-cleaned rows drop out)
    if args.input == "-":
        if args.format != "tsv":
            raise CliError("stdin input needs --format text or tsv; 'lines' needs file paths")
        with tempfile.NamedTemporaryFile(
            "w", encoding="utf-8", suffix=".tsv", delete=False
        ) as handle:
            handle.write(sys.stdin.read())
            source = Path(handle.name)
        try:
            records = load_corpus(source, format="tsv", lowercase=lowercase)
        finally:
            with contextlib.suppress(OSError):
                source.unlink()
    else:
        records = load_corpus(args.input, format=args.format, lowercase=lowercase)
    lines = "".join(f"{r.text}\t{r.label.value}\n" for r in records)
    _emit_bytes(lines.encode("utf-8"), args.output)
    print(f"cleaned {len(records)} records", file=sys.stderr)
    return 0


def _cmd_split(args: argparse.Namespace) -> int:
    lowercase = not args.no_lowercase
    corpus = load_corpus(args.input, format=args.format, lowercase=lowercase)
    split = split_train_test(
        corpus,
        n_train=args.n_train,
        n_test=args.n_test,
        length_min=args.min_len,
        length_max=args.max_len,
        seed=args.seed,
    )
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_lines = "".join(f"{r.text}\t{r.label.value}\n" for r in split.train)
    test_lines = "".join(f"{r.text}\t{r.label.value}\n" for r in split.test)
    _write_text_atomic(out_dir / "train.tsv", train_lines)
    _write_text_atomic(out_dir / "test.tsv", test_lines)

    per_language: dict[str, dict[str, int]] = {}
    for record in split.train:
        per_language.setdefault(record.label.value, {"train": 0, "test": 0})["train"] += 1
    for record in split.test:
        per_language.setdefault(record.label.value, {"train": 0, "test": 0})["test"] += 1
    manifest = {
        "config": _resolved_config(args, "split"),
        "rng": split.rng,
        "languages": per_language,
        "n_train": len(split.train),
        "n_test": len(split.test),
    }
    _write_json_atomic(out_dir / "split.json", manifest)
    print(
        f"wrote {len(split.train)} train / {len(split.test)} test sentences "
        f"for {len(per_language)} languages to {out_dir}"
    )
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    lowercase = not args.no_lowercase
    records = load_corpus(args.train, format=args.format, lowercase=lowercase)
    texts = [r.text for r in records]
    labels = [r.label.value for r in records]
    classes = args.classes if args.classes else [c.value for c in ALL_LANGUAGES]

    output = Path(args.output) if args.output else None
    if output is None:
        base = _model_dir(args)
        output = Path(base) / _NB_FILENAME if base else Path(_NB_FILENAME)

    start = time.perf_counter()
    model = CharNgramNaiveBayes(n=args.n, alpha=args.alpha, classes=classes, lowercase=lowercase)
    model.fit(texts, labels)
    output.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, output)
    elapsed = time.perf_counter() - start

    size_mb = output.stat().st_size / 1e6
    print(
        f"trained {args.n}-gram model on {len(texts)} documents, "
        f"{len(model.classes_)} classes"
    )
    print(f"vocabulary: {len(model.vocabulary_)} features")
    print(f"model file: {output} ({size_mb:.1f} MB)")
    print(f"wall time: {elapsed:.1f}s")
    return 0


def _cmd_build_lexicon(args: argparse.Namespace) -> int:
    lowercase = not args.no_lowercase
    records = load_corpus(args.input, format=args.format, lowercase=lowercase)
    lexicon = build_lexicon(corpora_by_language(records))

    out_dir = Path(args.output_dir) if args.output_dir else None
    if out_dir is None:
        base = _model_dir(args)
        out_dir = Path(base) / _LEXICON_DIRNAME if base else Path(_LEXICON_DIRNAME)
    save_lexicon(lexicon, out_dir)

    total = sum(len(words) for words in lexicon.words.values())
    print(f"built lexicon for {len(lexicon.languages)} languages ({total} words) in {out_dir}")
    for lang in lexicon.languages:
        stats = lexicon.source_stats[lang]
        print(f"  {lang.value}: {len(lexicon.words[lang])} words from {stats.sentences} sentences")
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    nb = load_model(_nb_model_path(args))
    texts = _input_lines(args.texts)

    config = _resolved_config(args, "predict")
    config["mode"] = "nb" if args.nb_only else "stacked"
    config["lowercase"] = nb.lowercase

    if args.nb_only:
        config["margin"] = None
        print(json.dumps(config, sort_keys=True, ensure_ascii=False), file=sys.stderr)
        for text in texts:
            prediction = nb.predict_one(clean_text(text, lowercase=nb.lowercase))
            if args.json:
                print(
                    json.dumps(
                        {
                            "text": text,
                            "label": prediction.label,
                            "log_scores": prediction.log_scores,
                        },
                        sort_keys=True,
                        ensure_ascii=False,
                    )
                )
            else:
                print(prediction.label)
        return 0

    margin = _resolve_margin(args)
    lexicon = load_lexicon(_lexicon_dir_path(args))
    clf = StackedLanguageClassifier.from_components(
        nb, lexicon, margin=margin, lowercase=nb.lowercase
    )
    config["margin"] = margin
    print(json.dumps(config, sort_keys=True, ensure_ascii=False), file=sys.stderr)
    for text, prediction in zip(texts, clf.classify_batch(texts)):
        if args.json:
            print(
                json.dumps(
                    {
                        "text": text,
                        "label": prediction.final_label.value,
                        "nb_label": prediction.nb_label.value,
                        "family": prediction.family.value,
                        "hit_counts": {
                            lang.value: count for lang, count in prediction.hit_counts.items()
                        },
                        "lexicon_used": prediction.lexicon_used,
                    },
                    sort_keys=True,
                    ensure_ascii=False,
                )
            )
        else:
            print(prediction.final_label.value)
    return 0


def _load_eval_classifier(args: argparse.Namespace):
    """Build the (classifier, label set, config extras) for an evaluate/sweep
    mode. Test text is cleaned the way the model expects."""
    if args.mode == "nb":
        nb = load_model(_nb_model_path(args))
        return _CleanedNgramModel(nb), [str(c) for c in nb.classes_], {
            "lowercase": nb.lowercase,
            "margin": None,
        }
    if args.mode == "stacked":
        nb = load_model(_nb_model_path(args))
        lexicon = load_lexicon(_lexicon_dir_path(args))
        margin = _resolve_margin(args)
        clf = StackedLanguageClassifier.from_components(
            nb, lexicon, margin=margin, lowercase=nb.lowercase
        )
        labels = sorted(
            {str(c) for c in nb.classes_} | {lang.value for lang in lexicon.languages}
        )
        return clf, labels, {"lowercase": nb.lowercase, "margin": margin}
    if args.mode == "lexicon":
        lexicon = load_lexicon(_lexicon_dir_path(args))
        margin = _resolve_margin(args)
        clf = LexiconVoteClassifier.from_lexicon(lexicon, margin=margin)
        labels = [lang.value for lang in lexicon.languages]
        return _CleanedLexiconModel(clf, lowercase=True), labels, {
            "lowercase": True,
            "margin": margin,
        }
    raise CliError(f"unknown evaluation mode {args.mode!r}")


def _cmd_evaluate(args: argparse.Namespace) -> int:
    if args.external_predictions and args.mode:
        raise CliError("--external-predictions and --mode are mutually exclusive")
    test_set = load_corpus(args.test, format=args.format)

    if args.external_predictions:
        if not args.supported:
            raise CliError("--external-predictions requires --supported CODE [CODE ...]")
        config = _resolved_config(args, "evaluate")
        report = compare_external(
            args.external_predictions, test_set, args.supported, config=config
        )
    else:
        args.mode = args.mode or "stacked"
        classifier, labels, extras = _load_eval_classifier(args)
        config = {**_resolved_config(args, "evaluate"), **extras}
        report = evaluate(classifier, test_set, labels=labels, config=config)

    _emit_bytes(emit_report(report, format=args.report_format, matrix=args.matrix), args.output)
    if args.output and args.output != "-":
        print(
            f"accuracy {report.accuracy:.4f}, macro F1 {report.macro_f1:.4f} "
            f"({report.cm.total} samples) -> {args.output}",
            file=sys.stderr,
        )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    test_set = load_corpus(args.test, format=args.format)
    args.mode = args.mode or "stacked"
    classifier, labels, extras = _load_eval_classifier(args)
    config = {**_resolved_config(args, "sweep"), **extras}
    lengths = args.lengths if args.lengths else list(DEFAULT_SWEEP_LENGTHS)

    reports = length_sweep(classifier, test_set, lengths=lengths, labels=labels, config=config)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    accuracy_by_length = {}
    print("length  accuracy  macro_f1")
    for length in sorted(reports):
        report = reports[length]
        _write_bytes_atomic(out_dir / f"report-{length}.json", emit_report(report, "json"))
        accuracy_by_length[str(length)] = report.accuracy
        print(f"{length:>6}  {report.accuracy:.4f}    {report.macro_f1:.4f}")
    _write_json_atomic(
        out_dir / "sweep.json",
        {
            "config": config,
            "accuracy_by_length": accuracy_by_length,
            "reports": {str(l): f"report-{l}.json" for l in sorted(reports)},
        },
    )
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_corpus_format_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format",
        choices=["tsv", "lines"],
        default="tsv",
        help="corpus layout: text<TAB>code lines, or per-language <code>.txt files",
    )


def _add_model_source_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--model-dir",
        default=None,
        help=f"directory holding {_NB_FILENAME} and {_LEXICON_DIRNAME}/ "
        f"(default: ${MODEL_DIR_ENV})",
    )
    parser.add_argument("--nb-model", default=None, help="path to the n-gram model file")
    parser.add_argument("--lexicon-dir", default=None, help="path to the lexicon directory")
    parser.add_argument(
        "--margin",
        type=int,
        default=None,
        help="lexicon dominance margin (default: bundle manifest value, else 1)",
    )


def _build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="salid",
        description="Two-stage language identifier for the 11 official South African languages.",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    registry: dict[str, argparse.ArgumentParser] = {}

    def register(name: str, func, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text, description=help_text)
        sub.set_defaults(func=func)
        sub.add_argument(
            "--config",
            default=None,
            metavar="FILE",
            help="JSON object of option defaults for this subcommand",
        )
        registry[name] = sub
        return sub

    sub = register("clean", _cmd_clean, "normalize raw text or a labeled corpus")
    sub.add_argument("--input", default="-", help="input file, or - for stdin")
    sub.add_argument("--output", default="-", help="output file, or - for stdout")
    sub.add_argument(
        "--format",
        choices=["text", "tsv", "lines"],
        default="text",
        help="text: clean each line; tsv/lines: clean a labeled corpus, emit TSV",
    )
    sub.add_argument("--no-lowercase", action="store_true", help="keep letter case")

    sub = register("split", _cmd_split, "draw per-language train/test samples")
    sub.add_argument("--input", required=True, help="labeled corpus file or directory")
    _add_corpus_format_option(sub)
    sub.add_argument("--output-dir", required=True, help="directory for train.tsv/test.tsv")
    sub.add_argument("--n-train", type=int, default=3000, help="training sentences per language")
    sub.add_argument("--n-test", type=int, default=1000, help="test sentences per language")
    sub.add_argument("--min-len", type=int, default=200, help="minimum sentence length")
    sub.add_argument("--max-len", type=int, default=300, help="maximum sentence length")
    sub.add_argument("--seed", type=int, default=42, help="sampling seed")
    sub.add_argument("--no-lowercase", action="store_true", help="keep letter case")

    sub = register("train", _cmd_train, "train the character n-gram model")
    sub.add_argument("--train", required=True, help="training corpus")
    _add_corpus_format_option(sub)
    sub.add_argument(
        "--output",
        default=None,
        help=f"model file (default: ${MODEL_DIR_ENV}/{_NB_FILENAME} or ./{_NB_FILENAME})",
    )
    sub.add_argument("--model-dir", default=None, help=argparse.SUPPRESS)
    sub.add_argument("--n", type=int, default=5, help="n-gram order")
    sub.add_argument("--alpha", type=float, default=1.0, help="additive smoothing strength")
    sub.add_argument(
        "--classes",
        nargs="+",
        default=None,
        metavar="CODE",
        help="class label set (default: all 11 language codes)",
    )
    sub.add_argument("--no-lowercase", action="store_true", help="keep letter case")

    sub = register("build-lexicon", _cmd_build_lexicon, "collect per-language word sets")
    sub.add_argument("--input", required=True, help="labeled corpus file or directory")
    _add_corpus_format_option(sub)
    sub.add_argument(
        "--output-dir",
        default=None,
        help=f"lexicon directory (default: ${MODEL_DIR_ENV}/{_LEXICON_DIRNAME} "
        f"or ./{_LEXICON_DIRNAME})",
    )
    sub.add_argument("--model-dir", default=None, help=argparse.SUPPRESS)
    sub.add_argument("--no-lowercase", action="store_true", help="keep letter case")

    sub = register("predict", _cmd_predict, "identify the language of texts")
    sub.add_argument("texts", nargs="*", help="texts to classify (default: stdin lines)")
    _add_model_source_options(sub)
    group = sub.add_mutually_exclusive_group()
    group.add_argument(
        "--stacked",
        action="store_true",
        default=True,
        help="two-stage prediction (default)",
    )
    group.add_argument(
        "--nb-only",
        action="store_true",
        default=False,
        help="skip the lexicon stage, n-gram model only",
    )
    sub.add_argument("--json", action="store_true", help="one JSON object per input line")

    sub = register("evaluate", _cmd_evaluate, "score a model or external predictions")
    sub.add_argument("--test", required=True, help="labeled test corpus")
    _add_corpus_format_option(sub)
    sub.add_argument(
        "--mode",
        choices=["nb", "stacked", "lexicon"],
        default=None,
        help="which classifier to evaluate (default: stacked)",
    )
    _add_model_source_options(sub)
    sub.add_argument(
        "--external-predictions",
        default=None,
        metavar="FILE",
        help="score a file of predicted labels (one per test line) instead of a model",
    )
    sub.add_argument(
        "--supported",
        nargs="+",
        default=None,
        metavar="CODE",
        help="languages the external system supports",
    )
    sub.add_argument("--output", default="-", help="report file, or - for stdout")
    sub.add_argument(
        "--report-format",
        choices=["json", "csv", "heatmap"],
        default="json",
        help="report serialization",
    )
    sub.add_argument(
        "--matrix",
        choices=["language", "family"],
        default="language",
        help="which confusion matrix csv/heatmap show",
    )

    sub = register("sweep", _cmd_sweep, "evaluate across truncation lengths")
    sub.add_argument("--test", required=True, help="labeled test corpus of long sentences")
    _add_corpus_format_option(sub)
    sub.add_argument(
        "--mode", choices=["nb", "stacked", "lexicon"], default=None,
        help="which classifier to sweep (default: stacked)",
    )
    _add_model_source_options(sub)
    sub.add_argument(
        "--lengths",
        nargs="+",
        type=int,
        default=None,
        metavar="LEN",
        help=f"truncation lengths (default: {' '.join(str(l) for l in DEFAULT_SWEEP_LENGTHS)})",
    )
    sub.add_argument("--output-dir", required=True, help="directory for per-length reports")

    return parser, registry


def _apply_config_file(argv: list[str], registry: dict[str, argparse.ArgumentParser]) -> None:
    """Honor `--config FILE` by installing the file's values as defaults of
    the invoked subcommand, so explicit command line flags still win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config or known.command not in registry:
        return
    sub = registry[known.command]
    with open(known.config, encoding="utf-8") as handle:
        values = json.load(handle)
    if not isinstance(values, dict):
        raise CliError(f"{known.config}: config must be a JSON object")
    valid = {action.dest for action in sub._actions if action.dest != "help"}
    overrides = {}
    for key, value in values.items():
        dest = key.replace("-", "_")
        if dest not in valid:
            raise CliError(
                f"{known.config}: unknown option {key!r} for {known.command!r} "
                f"(valid: {', '.join(sorted(valid - {'func', 'config'}))})"
            )
        overrides[dest] = value
    sub.set_defaults(**overrides)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser, registry = _build_parser()
    try:
        _apply_config_file(argv, registry)
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_help()
            return 1
        return args.func(args)
    except (ValueError, OSError, NotFittedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
