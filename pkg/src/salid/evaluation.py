"""Accuracy, per-class precision/recall/F1, confusion matrices at language
and family level, string-length sweeps, and scoring of externally produced
prediction files.

All counting is integer and the derived ratios are computed with exact
rational arithmetic before the final conversion to float, so reported
numbers are reproducible to the bit.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import LabeledText, truncate_word_boundary
from .languages import LanguageCode, family_of

REPORT_SCHEMA_VERSION = 1

DEFAULT_SWEEP_LENGTHS = (15, 30, 50, 100, 200, 300)

_EXTERNAL_LABEL_RE = re.compile(r"^[A-Za-z][A-Za-z_-]{0,15}$")

#: Column label that out-of-set external predictions are folded into.
OTHER_LABEL = "other"


class EmptyTestSetError(ValueError):
    """evaluate() was called with no samples."""


class ExternalPredictionError(ValueError):
    """An external prediction file does not align with the test set."""


@dataclass(eq=False)
class ConfusionMatrix:
    """Square count matrix; rows are gold labels, columns predictions."""

    labels: tuple[str, ...]
    counts: np.ndarray  # (L, L) int64

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(Fraction(int(np.trace(self.counts)), self.total))

    def normalized_rows(self) -> np.ndarray:
        """Row-stochastic view of the counts; all-zero rows stay zero."""
        row_sums = self.counts.sum(axis=1, keepdims=True)
        safe = np.where(row_sums == 0, 1, row_sums)
        return self.counts / safe

    def to_csv_text(self) -> str:
        lines = ["gold\\pred," + ",".join(self.labels)]
        for label, row in zip(self.labels, self.counts):
            lines.append(label + "," + ",".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"

    def to_heatmap_text(self) -> str:
        """Fixed-width terminal rendering of the row-normalized matrix."""
        width = max(6, max(len(l) for l in self.labels) + 1)
        header = " " * width + "".join(f"{l[: width - 1]:>{width}}" for l in self.labels)
        lines = [header]
        for label, row in zip(self.labels, self.normalized_rows()):
            cells = "".join(f"{v:>{width}.2f}" for v in row)
            lines.append(f"{label:<{width}}" + cells)
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(eq=False)
class EvalReport:
    accuracy: float
    micro_f1: float
    macro_f1: float
    per_class: dict[str, ClassMetrics]
    cm: ConfusionMatrix
    family_cm: ConfusionMatrix | None
    config: dict = field(default_factory=dict)


def _predict_labels(classifier, texts: list[str]) -> list[str]:
    """Run any label-producing classifier: an estimator with .predict or a
    plain text -> label callable."""
    if hasattr(classifier, "predict"):
        predictions = classifier.predict(texts)
    else:
        predictions = [classifier(t) for t in texts]
    labels = [str(p) for p in predictions]
    if len(labels) != len(texts):
        raise ValueError(
            f"classifier returned {len(labels)} predictions for {len(texts)} texts"
        )
    return labels


def _build_cm(gold: Sequence[str], pred: Sequence[str], labels: Sequence[str]) -> ConfusionMatrix:
    index = {label: i for i, label in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for g, p in zip(gold, pred):
        try:
            gi = index[g]
        except KeyError:
            raise ValueError(f"gold label {g!r} not in label set {list(labels)}") from None
        try:
            pi = index[p]
        except KeyError:
            raise ValueError(f"predicted label {p!r} not in label set {list(labels)}") from None
        counts[gi, pi] += 1
    return ConfusionMatrix(labels=tuple(labels), counts=counts)


def _class_metric_fractions(
    cm: ConfusionMatrix,
) -> dict[str, tuple[Fraction, Fraction, Fraction, int]]:
    out = {}
    col_sums = cm.counts.sum(axis=0)
    row_sums = cm.counts.sum(axis=1)
    for i, label in enumerate(cm.labels):
        tp = int(cm.counts[i, i])
        fp = int(col_sums[i]) - tp
        fn = int(row_sums[i]) - tp
        precision = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
        recall = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else Fraction(0)
        out[label] = (precision, recall, f1, int(row_sums[i]))
    return out


def _family_cm(cm: ConfusionMatrix) -> ConfusionMatrix | None:
    codes = {c.value for c in LanguageCode}
    if not set(cm.labels).issubset(codes):
        return None
    families = sorted({family_of(label).value for label in cm.labels})
    family_index = {f: i for i, f in enumerate(families)}
    counts = np.zeros((len(families), len(families)), dtype=np.int64)
    for i, gold_label in enumerate(cm.labels):
        gi = family_index[family_of(gold_label).value]
        for j, pred_label in enumerate(cm.labels):
            counts[gi, family_index[family_of(pred_label).value]] += cm.counts[i, j]
    return ConfusionMatrix(labels=tuple(families), counts=counts)


def _build_report(
    gold: Sequence[str],
    pred: Sequence[str],
    labels: Sequence[str],
    config: Mapping | None,
    macro_labels: Sequence[str] | None = None,
) -> EvalReport:
    cm = _build_cm(gold, pred, labels)
    fractions = _class_metric_fractions(cm)
    per_class = {
        label: ClassMetrics(float(p), float(r), float(f1), support)
        for label, (p, r, f1, support) in fractions.items()
    }
    macro_over = list(macro_labels) if macro_labels is not None else list(labels)
    macro_f1 = float(sum(fractions[l][2] for l in macro_over) / len(macro_over))
    accuracy = float(Fraction(int(np.trace(cm.counts)), cm.total))
    return EvalReport(
        accuracy=accuracy,
        # single-label multiclass: micro precision = micro recall = accuracy
        micro_f1=accuracy,
        macro_f1=macro_f1,
        per_class=per_class,
        cm=cm,
        family_cm=_family_cm(cm),
        config=dict(config) if config else {},
    )


def evaluate(
    classifier,
    test_set: Sequence[LabeledText],
    labels: Iterable[str] | None = None,
    config: Mapping | None = None,
) -> EvalReport:
    """Score a classifier on a labeled test set.

    ``classifier`` is anything that produces a label per text: an estimator
    with ``.predict`` (batched) or a plain callable. ``labels`` fixes the
    confusion matrix axes (sorted); by default the union of gold and
    predicted labels is used. The family-level matrix is included whenever
    every label is one of the 11 language codes.
    """
    records = list(test_set)
    if not records:
        raise EmptyTestSetError("test set is empty")
    texts = [r.text for r in records]
    gold = [str(r.label) for r in records]
    pred = _predict_labels(classifier, texts)
    if labels is None:
        label_list = sorted(set(gold) | set(pred))
    else:
        label_list = sorted({str(l) for l in labels})
    return _build_report(gold, pred, label_list, config)


def length_sweep(
    classifier,
    long_test_set: Sequence[LabeledText],
    lengths: Iterable[int] | None = None,
    labels: Iterable[str] | None = None,
    config: Mapping | None = None,
) -> dict[int, EvalReport]:
    """Evaluate on word-boundary truncations of the test sentences, one
    report per requested prefix length (ascending). A length at or beyond a
    sentence's full length leaves that sentence untouched."""
    sweep = sorted(set(lengths)) if lengths is not None else list(DEFAULT_SWEEP_LENGTHS)
    base_config = dict(config) if config else {}
    reports: dict[int, EvalReport] = {}
    for length in sweep:
        truncated = [
            LabeledText(truncate_word_boundary(r.text, length), r.label)
            for r in long_test_set
        ]
        reports[length] = evaluate(
            classifier, truncated, labels=labels, config={**base_config, "length": length}
        )
    return reports


def read_prediction_file(path: str | Path, expected_count: int) -> list[str]:
    """Read one label per line, validating count and token shape."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if len(lines) != expected_count:
        raise ExternalPredictionError(
            f"{path}: {len(lines)} prediction lines for {expected_count} test samples"
        )
    labels = []
    for lineno, line in enumerate(lines, start=1):
        token = line.strip()
        if not _EXTERNAL_LABEL_RE.match(token):
            raise ExternalPredictionError(f"{path}:{lineno}: unparseable label {line!r}")
        labels.append(token.lower())
    return labels


def compare_external(
    pred_file: str | Path,
    test_set: Sequence[LabeledText],
    supported: Iterable[str | LanguageCode],
    config: Mapping | None = None,
) -> EvalReport:
    """Score an externally produced prediction file against the test set.

    The file must align 1:1 with the test set by line. Evaluation is
    restricted to samples whose gold label the external system supports;
    predictions outside the supported set are folded into an ``"other"``
    column. Per-class and macro metrics cover the supported labels only.
    """
    records = list(test_set)
    if not records:
        raise EmptyTestSetError("test set is empty")
    predictions = read_prediction_file(pred_file, len(records))
    supported_set = sorted({str(s) for s in supported})
    gold, pred = [], []
    for record, prediction in zip(records, predictions):
        g = str(record.label)
        if g not in supported_set:
            continue
        gold.append(g)
        pred.append(prediction if prediction in supported_set else OTHER_LABEL)
    if not gold:
        raise EmptyTestSetError("no test samples with gold label in the supported set")
    labels = list(supported_set)
    if OTHER_LABEL in set(pred):
        labels.append(OTHER_LABEL)
    return _build_report(gold, pred, labels, config, macro_labels=supported_set)


def _cm_to_obj(cm: ConfusionMatrix | None):
    if cm is None:
        return None
    return {"labels": list(cm.labels), "counts": cm.counts.tolist()}


def _cm_from_obj(obj) -> ConfusionMatrix | None:
    if obj is None:
        return None
    return ConfusionMatrix(
        labels=tuple(obj["labels"]),
        counts=np.asarray(obj["counts"], dtype=np.int64),
    )


def report_to_json_bytes(report: EvalReport) -> bytes:
    """Canonical JSON (sorted keys, compact, UTF-8); parse and re-emit is
    byte-identical as long as ``config`` holds plain JSON values."""
    obj = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": report.config,
        "accuracy": report.accuracy,
        "micro_f1": report.micro_f1,
        "macro_f1": report.macro_f1,
        "per_class": {
            label: {
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
                "support": m.support,
            }
            for label, m in report.per_class.items()
        },
        "cm": _cm_to_obj(report.cm),
        "family_cm": _cm_to_obj(report.family_cm),
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def report_from_json(data: bytes | str) -> EvalReport:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    obj = json.loads(data)
    version = obj.get("schema_version")
    if version != REPORT_SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema version {version!r}")
    per_class = {
        label: ClassMetrics(
            precision=m["precision"], recall=m["recall"], f1=m["f1"], support=m["support"]
        )
        for label, m in obj["per_class"].items()
    }
    return EvalReport(
        accuracy=obj["accuracy"],
        micro_f1=obj["micro_f1"],
        macro_f1=obj["macro_f1"],
        per_class=per_class,
        cm=_cm_from_obj(obj["cm"]),
        family_cm=_cm_from_obj(obj["family_cm"]),
        config=obj["config"],
    )


def emit_report(report: EvalReport, format: str = "json", matrix: str = "language") -> bytes:
    """Serialise a report: ``json`` (schema v1, canonical), ``csv`` (the
    confusion matrix with header row and column) or ``heatmap`` (row
    normalized text rendering). ``matrix`` selects the language or family
    matrix for the csv/heatmap formats."""
    if matrix == "language":
        cm = report.cm
    elif matrix == "family":
        if report.family_cm is None:
            raise ValueError("report has no family-level confusion matrix")
        cm = report.family_cm
    else:
        raise ValueError(f"unknown matrix {matrix!r}")
    if format == "json":
        return report_to_json_bytes(report)
    if format == "csv":
        return cm.to_csv_text().encode("utf-8")
    if format in ("heatmap", "text-heatmap"):
        return cm.to_heatmap_text().encode("utf-8")
    raise ValueError(f"unknown report format {format!r}")
