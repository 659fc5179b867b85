"""Two-stage classifier: n-gram naive Bayes picks the language (and with it
the family), then a lexicon vote may refine the label within that family.

The lexicon stage can override the n-gram language but never its family, so
family-level results of the stacked and plain n-gram classifiers are always
identical. When the vote abstains (no family member dominates the word hit
counts) the n-gram label stands.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, clone

from ._validation import as_label_list, as_text_list, check_fitted
from .corpus import LabeledText, clean_text, group_by_language
from .languages import LanguageCode, LanguageFamily, family_of, parse_language
from .lexicon import (
    FamilyHitCounts,
    Lexicon,
    build_lexicon,
    count_hits,
    dominant_language,
    load_lexicon,
    save_lexicon,
)
from .naive_bayes import CharNgramNaiveBayes, load_model, save_model

BUNDLE_FORMAT_VERSION = 1
FAMILY_MAP_VERSION = 1

_NB_FILENAME = "nb.model"
_LEXICON_DIRNAME = "lexicon"


class BundleFormatError(ValueError):
    """A stacked-model directory is incomplete or fails its checksums."""


@dataclass(frozen=True)
class StackedPrediction:
    """Final label plus the evidence both stages contributed.

    ``lexicon_used`` is True exactly when ``final_label`` came from the
    dominance vote; otherwise the n-gram label was kept. ``final_label``
    always lies in the family of ``nb_label``.
    """

    final_label: LanguageCode
    nb_label: LanguageCode
    family: LanguageFamily
    hit_counts: FamilyHitCounts
    lexicon_used: bool


class StackedLanguageClassifier(ClassifierMixin, BaseEstimator):
    """n-gram naive Bayes + within-family lexicon vote.

    Parameters
    ----------
    nb : a CharNgramNaiveBayes used as the first stage. May be pre-fitted
        (then fit() leaves it untouched for the n-gram side) or a blueprint
        that fit() clones and trains.
    lexicon : optional pre-built Lexicon. When None, fit() builds one from
        its own training data; the common two-corpus workflow builds the
        lexicon from the full corpora and passes it here.
    margin : dominance margin of the lexicon vote.
    lowercase : cleaning policy applied to input text before classification;
        must match how the training corpus was cleaned.

    classify() cleans its input first (cleaning is idempotent, so already
    clean text is unaffected), which lets raw user strings and corpus
    sentences behave identically.
    """

    def __init__(
        self,
        nb: CharNgramNaiveBayes | None = None,
        lexicon: Lexicon | None = None,
        margin: int = 1,
        lowercase: bool = True,
    ):
        self.nb = nb
        self.lexicon = lexicon
        self.margin = margin
        self.lowercase = lowercase

    def fit(self, X, y):
        texts = as_text_list(X)
        labels = [parse_language(l) for l in as_label_list(y)]
        if self.nb is not None and hasattr(self.nb, "vocabulary_"):
            self.nb_ = self.nb
        else:
            blueprint = self.nb if self.nb is not None else CharNgramNaiveBayes(
                lowercase=self.lowercase
            )
            self.nb_ = clone(blueprint).fit(texts, [l.value for l in labels])
        if self.lexicon is not None:
            self.lexicon_ = self.lexicon
        else:
            records = [LabeledText(t, l) for t, l in zip(texts, labels)]
            self.lexicon_ = build_lexicon(group_by_language(records))
        return self

    @classmethod
    def from_components(
        cls,
        nb: CharNgramNaiveBayes,
        lexicon: Lexicon,
        margin: int = 1,
        lowercase: bool = True,
    ) -> "StackedLanguageClassifier":
        """Assemble a ready-to-use classifier from a fitted n-gram model and
        a built lexicon, without another pass over training data."""
        check_fitted(nb, "vocabulary_")
        clf = cls(nb=nb, lexicon=lexicon, margin=margin, lowercase=lowercase)
        clf.nb_ = nb
        clf.lexicon_ = lexicon
        return clf

    def classify(self, text: str) -> StackedPrediction:
        """Full two-stage decision for one text."""
        check_fitted(self, "nb_", "lexicon_")
        cleaned = clean_text(text, lowercase=self.lowercase)
        nb_label = parse_language(str(self.nb_.predict_one(cleaned).label))
        family = family_of(nb_label)
        hits = count_hits(cleaned, self.lexicon_, family)
        vote = dominant_language(hits, self.margin)
        return StackedPrediction(
            final_label=vote if vote is not None else nb_label,
            nb_label=nb_label,
            family=family,
            hit_counts=hits,
            lexicon_used=vote is not None,
        )

    def classify_batch(self, texts) -> list[StackedPrediction]:
        """Element-wise classify; output order matches input order.

        Classification is total over strings, so the only per-item failure
        is a non-string entry; all offending indices are reported in one
        error before any work is done.
        """
        check_fitted(self, "nb_", "lexicon_")
        items = as_text_list(texts)
        if not items:
            return []
        cleaned = [clean_text(t, lowercase=self.lowercase) for t in items]
        # single batched scoring pass; per-row results are identical to
        # one-at-a-time classify calls
        nb_labels = self.nb_.predict(cleaned)
        out = []
        for text, raw_label in zip(cleaned, nb_labels):
            nb_label = parse_language(str(raw_label))
            family = family_of(nb_label)
            hits = count_hits(text, self.lexicon_, family)
            vote = dominant_language(hits, self.margin)
            out.append(
                StackedPrediction(
                    final_label=vote if vote is not None else nb_label,
                    nb_label=nb_label,
                    family=family,
                    hit_counts=hits,
                    lexicon_used=vote is not None,
                )
            )
        return out

    def predict(self, X) -> np.ndarray:
        return np.asarray(
            [p.final_label.value for p in self.classify_batch(X)], dtype=object
        )

    def save(self, out_dir: str | Path) -> None:
        save_bundle(self, out_dir)

    @classmethod
    def load(cls, path: str | Path) -> "StackedLanguageClassifier":
        return load_bundle(path)


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def save_bundle(model: StackedLanguageClassifier, out_dir: str | Path) -> None:
    """Write a stacked-model directory: the n-gram model file, the lexicon
    directory, and a manifest with checksums. The manifest comes last, so an
    interrupted save leaves no valid bundle behind."""
    check_fitted(model, "nb_", "lexicon_")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    nb_path = out_dir / _NB_FILENAME
    save_model(model.nb_, nb_path)
    lex_dir = out_dir / _LEXICON_DIRNAME
    save_lexicon(model.lexicon_, lex_dir)
    manifest = {
        "format_version": BUNDLE_FORMAT_VERSION,
        "family_map_version": FAMILY_MAP_VERSION,
        "margin": model.margin,
        "lowercase": bool(model.lowercase),
        "checksums": {
            _NB_FILENAME: _sha256_file(nb_path),
            f"{_LEXICON_DIRNAME}/manifest.json": _sha256_file(lex_dir / "manifest.json"),
        },
    }
    tmp = out_dir / "manifest.json.tmp"
    tmp.write_text(json.dumps(manifest, sort_keys=True, indent=2), encoding="utf-8")
    tmp.replace(out_dir / "manifest.json")


def load_bundle(path: str | Path) -> StackedLanguageClassifier:
    """Load a bundle written by :func:`save_bundle`, verifying checksums."""
    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.is_file():
        raise BundleFormatError(f"{path}: missing manifest.json")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        version = int(manifest["format_version"])
        family_map_version = int(manifest["family_map_version"])
        margin = int(manifest["margin"])
        lowercase = bool(manifest["lowercase"])
        checksums = manifest["checksums"]
    except (ValueError, KeyError, TypeError) as exc:
        raise BundleFormatError(f"{path}: malformed manifest ({exc})") from None
    if version != BUNDLE_FORMAT_VERSION:
        raise BundleFormatError(f"{path}: unsupported bundle format version {version}")
    if family_map_version != FAMILY_MAP_VERSION:
        raise BundleFormatError(
            f"{path}: unsupported family map version {family_map_version}"
        )
    for rel_name, expected in checksums.items():
        file_path = path / rel_name
        if not file_path.is_file():
            raise BundleFormatError(f"{path}: missing bundle file {rel_name}")
        if _sha256_file(file_path) != expected:
            raise BundleFormatError(f"{path}: checksum mismatch for {rel_name}")
    nb = load_model(path / _NB_FILENAME)
    lexicon = load_lexicon(path / _LEXICON_DIRNAME)
    return StackedLanguageClassifier.from_components(
        nb, lexicon, margin=margin, lowercase=lowercase
    )


__all__ = [
    "StackedLanguageClassifier",
    "StackedPrediction",
    "BundleFormatError",
    "save_bundle",
    "load_bundle",
]
