"""Character n-gram extraction and binary sparse vectorization.

Features are presence-only: a text maps to the set of vocabulary indices of
its distinct character n-grams. No padding is added at string boundaries, so
texts shorter than n contribute no features at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import as_text_list, check_fitted


class EmptyVocabularyError(ValueError):
    """No training text was long enough to produce a single n-gram."""


class NGramVocabulary:
    """Immutable bijection between character n-grams and dense feature indices.

    Indices follow the lexicographic order of the n-grams, which makes the
    mapping reproducible regardless of corpus order or hash seeds.
    """

    __slots__ = ("n", "ngrams", "index_of")

    def __init__(self, n: int, ngrams: Sequence[str]):
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        self.n = n
        self.ngrams = tuple(ngrams)
        for gram in self.ngrams:
            if len(gram) != n:
                raise ValueError(f"n-gram {gram!r} does not have length {n}")
        self.index_of = {gram: i for i, gram in enumerate(self.ngrams)}
        if len(self.index_of) != len(self.ngrams):
            raise ValueError("duplicate n-grams in vocabulary")

    def __len__(self) -> int:
        return len(self.ngrams)

    def __contains__(self, gram: str) -> bool:
        return gram in self.index_of

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NGramVocabulary):
            return NotImplemented
        return self.n == other.n and self.ngrams == other.ngrams

    def __repr__(self) -> str:
        return f"NGramVocabulary(n={self.n}, size={len(self)})"


@dataclass(frozen=True)
class BinaryFeatureVector:
    """Strictly increasing vocabulary indices present in one text."""

    indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.indices)


def extract_ngrams(text: str, n: int) -> set[str]:
    """All distinct length-n substrings of ``text`` (stride 1, no padding)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return {text[i : i + n] for i in range(len(text) - n + 1)}


def build_vocabulary(texts: Iterable[str], n: int) -> NGramVocabulary:
    """Union of n-grams over all texts, indexed lexicographically.

    Raises EmptyVocabularyError when no text reaches length n.
    """
    grams: set[str] = set()
    for text in texts:
        if len(text) >= n:
            grams.update(text[i : i + n] for i in range(len(text) - n + 1))
    if not grams:
        raise EmptyVocabularyError(f"no text of length >= {n} in corpus")
    return NGramVocabulary(n, sorted(grams))


def vectorize(text: str, vocab: NGramVocabulary) -> BinaryFeatureVector:
    """Binary feature vector of ``text``; out-of-vocabulary n-grams are dropped."""
    index_of = vocab.index_of
    found = {index_of[g] for g in extract_ngrams(text, vocab.n) if g in index_of}
    return BinaryFeatureVector(tuple(sorted(found)))


def texts_to_csr(texts: Sequence[str], vocab: NGramVocabulary) -> sparse.csr_matrix:
    """Stack binary feature vectors into one CSR matrix (rows in text order).

    Column indices within each row are sorted ascending, which downstream
    scoring relies on for a fixed summation order.
    """
    indptr = [0]
    indices: list[int] = []
    index_of = vocab.index_of
    n = vocab.n
    for text in texts:
        grams = {text[i : i + n] for i in range(len(text) - n + 1)}
        row = sorted(index_of[g] for g in grams if g in index_of)
        indices.extend(row)
        indptr.append(len(indices))
    data = np.ones(len(indices), dtype=np.float64)
    return sparse.csr_matrix(
        (data, np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(texts), len(vocab)),
    )


class BinaryNgramVectorizer(TransformerMixin, BaseEstimator):
    """sklearn-style transformer from raw strings to binary n-gram CSR matrices.

    fit learns the vocabulary, transform maps texts onto it. Unseen n-grams
    are silently ignored at transform time.
    """

    def __init__(self, n: int = 5):
        self.n = n

    def fit(self, X, y=None):
        self.vocabulary_ = build_vocabulary(as_text_list(X), self.n)
        return self

    def transform(self, X) -> sparse.csr_matrix:
        check_fitted(self, "vocabulary_")
        return texts_to_csr(as_text_list(X), self.vocabulary_)

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        check_fitted(self, "vocabulary_")
        return np.asarray(self.vocabulary_.ngrams, dtype=object)
