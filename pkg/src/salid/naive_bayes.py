"""Multinomial naive Bayes over binary character n-gram features.

Training counts, for every class, the number of documents whose binary
feature vector contains each n-gram; Laplace-style smoothing with a
pseudo-count ``alpha`` turns those counts into multinomial likelihoods:

    log_prior(c)         = log(N_c / N)
    log_likelihood(c, f) = log((F[c, f] + alpha) / (sum_g F[c, g] + alpha * |V|))

Scoring is done entirely in log space, summing likelihoods left-to-right in
feature-index order so results are reproducible across runs. Ties on the
final scores break to the lexicographically smallest class label.

Model file format (version 1, little-endian):

    bytes 0..8   magic ``b"SALIDNB\\x00"``
    u32          format version (1)
    u32          header length in bytes
    header       canonical JSON: alpha, classes, lowercase, n,
                 payload_sha256, vocab_size
    payload      vocabulary in index order (per n-gram: u16 byte length +
                 UTF-8 bytes), then class_log_prior as float64[C], then
                 feature_log_prob as row-major float64[C * V]

The sha256 of the payload is stored in the header; load verifies it and the
exact file length, so a truncated or corrupted file never yields a model.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ._validation import as_label_list, as_text_list, check_fitted
from .features import NGramVocabulary, build_vocabulary, texts_to_csr

MODEL_MAGIC = b"SALIDNB\x00"
MODEL_FORMAT_VERSION = 1


class EmptyClassError(ValueError):
    """A declared class has no training samples."""


class ModelFormatError(ValueError):
    """The model file is not in the documented format or fails its checksum."""


class ModelVersionError(ModelFormatError):
    """The model file declares an unsupported format version."""


@dataclass(frozen=True)
class Prediction:
    """A predicted label with the per-class unnormalised log scores."""

    label: str
    log_scores: dict[str, float]


class CharNgramNaiveBayes(ClassifierMixin, BaseEstimator):
    """Character n-gram naive Bayes language classifier.

    Parameters
    ----------
    n : length of the character n-grams (default 5).
    alpha : smoothing pseudo-count, must be > 0.
    classes : optional explicit label set. When given, every training label
        must belong to it and every member must have at least one sample;
        when None the label set is inferred from the training data.
    lowercase : recorded in saved model files so prediction tools clean
        their input the same way the training corpus was cleaned. fit and
        predict themselves never alter the text they are given.

    Texts shorter than ``n`` produce no features and are classified by the
    class priors alone.
    """

    def __init__(
        self,
        n: int = 5,
        alpha: float = 1.0,
        classes: Sequence[str] | None = None,
        lowercase: bool = True,
    ):
        self.n = n
        self.alpha = alpha
        self.classes = classes
        self.lowercase = lowercase

    def fit(self, X, y):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        texts = as_text_list(X)
        labels = as_label_list(y)
        if len(texts) != len(labels):
            raise ValueError(f"{len(texts)} texts but {len(labels)} labels")
        if not texts:
            raise ValueError("cannot fit on an empty training set")

        observed = set(labels)
        if self.classes is None:
            class_list = sorted(observed)
        else:
            class_list = sorted(str(c) for c in self.classes)
            unknown = observed.difference(class_list)
            if unknown:
                raise ValueError(f"training labels outside declared classes: {sorted(unknown)}")
            empty = [c for c in class_list if c not in observed]
            if empty:
                raise EmptyClassError(f"declared classes without samples: {empty}")
        class_index = {c: i for i, c in enumerate(class_list)}

        vocab = build_vocabulary(texts, self.n)
        n_classes, n_features = len(class_list), len(vocab)

        # F[c, f] = number of class-c documents containing feature f
        doc_feature_count = np.zeros((n_classes, n_features), dtype=np.float64)
        class_count = np.zeros(n_classes, dtype=np.int64)
        index_of, n = vocab.index_of, vocab.n
        for text, label in zip(texts, labels):
            ci = class_index[label]
            class_count[ci] += 1
            grams = {text[i : i + n] for i in range(len(text) - n + 1)}
            row = [index_of[g] for g in grams]  # vocab covers every training gram
            if row:
                doc_feature_count[ci, row] += 1.0

        self.classes_ = np.asarray(class_list, dtype=object)
        self.vocabulary_ = vocab
        self.class_count_ = class_count
        self.class_log_prior_ = np.log(class_count) - np.log(class_count.sum())
        totals = doc_feature_count.sum(axis=1, keepdims=True)
        self.feature_log_prob_ = np.log(doc_feature_count + self.alpha) - np.log(
            totals + self.alpha * n_features
        )
        # (V, C) C-contiguous copy so sparse scoring never re-copies per call
        self._scoring_weights_ = np.ascontiguousarray(self.feature_log_prob_.T)
        return self

    def log_scores(self, X) -> np.ndarray:
        """Unnormalised per-class log scores, shape (n_texts, n_classes).

        Row order matches ``X``; column order matches ``classes_``.
        """
        check_fitted(self, "vocabulary_")
        texts = as_text_list(X)
        matrix = texts_to_csr(texts, self.vocabulary_)
        # CSR @ dense accumulates sequentially in stored (sorted) index order
        return matrix @ self._scoring_weights_ + self.class_log_prior_

    def predict(self, X) -> np.ndarray:
        """Predicted labels; score ties break to the smallest label."""
        scores = self.log_scores(X)
        return self.classes_[np.argmax(scores, axis=1)]

    def predict_one(self, text: str) -> Prediction:
        """Classify a single text, keeping the full score breakdown."""
        scores = self.log_scores([text])[0]
        label = self.classes_[int(np.argmax(scores))]
        return Prediction(
            label=str(label),
            log_scores={str(c): float(s) for c, s in zip(self.classes_, scores)},
        )

    def save(self, path: str | Path) -> None:
        save_model(self, path)

    @classmethod
    def load(cls, path: str | Path) -> "CharNgramNaiveBayes":
        return load_model(path)


def _payload_chunks(model: CharNgramNaiveBayes) -> list[bytes]:
    vocab_parts = []
    for gram in model.vocabulary_.ngrams:
        raw = gram.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ValueError(f"n-gram too long to serialise: {gram!r}")
        vocab_parts.append(struct.pack("<H", len(raw)))
        vocab_parts.append(raw)
    return [
        b"".join(vocab_parts),
        np.ascontiguousarray(model.class_log_prior_, dtype="<f8").tobytes(),
        np.ascontiguousarray(model.feature_log_prob_, dtype="<f8").tobytes(),
    ]


def save_model(model: CharNgramNaiveBayes, path: str | Path) -> None:
    """Write a fitted model in the documented binary format (atomic rename)."""
    check_fitted(model, "vocabulary_")
    chunks = _payload_chunks(model)
    digest = hashlib.sha256()
    for chunk in chunks:
        digest.update(chunk)
    header = {
        "alpha": model.alpha,
        "classes": [str(c) for c in model.classes_],
        "lowercase": bool(model.lowercase),
        "n": model.vocabulary_.n,
        "payload_sha256": digest.hexdigest(),
        "vocab_size": len(model.vocabulary_),
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")

    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as handle:
        handle.write(MODEL_MAGIC)
        handle.write(struct.pack("<I", MODEL_FORMAT_VERSION))
        handle.write(struct.pack("<I", len(header_bytes)))
        handle.write(header_bytes)
        for chunk in chunks:
            handle.write(chunk)
    tmp.replace(path)


def _read_exact(handle: BinaryIO, size: int, what: str) -> bytes:
    data = handle.read(size)
    if len(data) != size:
        raise ModelFormatError(f"truncated model file while reading {what}")
    return data


def load_model(path: str | Path) -> CharNgramNaiveBayes:
    """Load a model saved by :func:`save_model`, validating it completely.

    Raises ModelVersionError for an unsupported format version and
    ModelFormatError for truncation, trailing garbage or checksum failure.
    A partially-read model is never returned.
    """
    with open(path, "rb") as handle:
        magic = _read_exact(handle, len(MODEL_MAGIC), "magic")
        if magic != MODEL_MAGIC:
            raise ModelFormatError(f"{path}: not a salid naive Bayes model file")
        (version,) = struct.unpack("<I", _read_exact(handle, 4, "version"))
        if version != MODEL_FORMAT_VERSION:
            raise ModelVersionError(f"{path}: unsupported model format version {version}")
        (header_len,) = struct.unpack("<I", _read_exact(handle, 4, "header length"))
        try:
            header = json.loads(_read_exact(handle, header_len, "header"))
            alpha = float(header["alpha"])
            classes = [str(c) for c in header["classes"]]
            lowercase = bool(header["lowercase"])
            n = int(header["n"])
            expected_sha = str(header["payload_sha256"])
            vocab_size = int(header["vocab_size"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ModelFormatError(f"{path}: malformed model header ({exc})") from None
        if not classes or vocab_size < 1:
            raise ModelFormatError(f"{path}: model header declares an empty model")

        digest = hashlib.sha256()
        gram_blobs = []
        for _ in range(vocab_size):
            len_bytes = _read_exact(handle, 2, "n-gram length")
            digest.update(len_bytes)
            (gram_len,) = struct.unpack("<H", len_bytes)
            gram_bytes = _read_exact(handle, gram_len, "n-gram")
            digest.update(gram_bytes)
            gram_blobs.append(gram_bytes)

        n_classes = len(classes)
        prior_bytes = _read_exact(handle, 8 * n_classes, "class priors")
        digest.update(prior_bytes)
        prob_bytes = _read_exact(handle, 8 * n_classes * vocab_size, "likelihoods")
        digest.update(prob_bytes)
        if handle.read(1) != b"":
            raise ModelFormatError(f"{path}: trailing bytes after model payload")
        if digest.hexdigest() != expected_sha:
            raise ModelFormatError(f"{path}: payload checksum mismatch")

    # decode only after the checksum has vouched for the bytes
    try:
        vocabulary = NGramVocabulary(n, [blob.decode("utf-8") for blob in gram_blobs])
    except (UnicodeDecodeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: invalid vocabulary payload ({exc})") from None

    model = CharNgramNaiveBayes(n=n, alpha=alpha, classes=classes, lowercase=lowercase)
    model.classes_ = np.asarray(classes, dtype=object)
    model.vocabulary_ = vocabulary
    model.class_log_prior_ = np.frombuffer(prior_bytes, dtype="<f8").astype(np.float64)
    model.feature_log_prob_ = (
        np.frombuffer(prob_bytes, dtype="<f8").astype(np.float64).reshape(n_classes, vocab_size)
    )
    model.class_count_ = None  # not stored; priors carry the information
    model._scoring_weights_ = np.ascontiguousarray(model.feature_log_prob_.T)
    return model
