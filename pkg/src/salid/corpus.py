"""Corpus ingestion, cleaning, train/test sampling and prefix truncation.

Cleaning replaces decimal digits and all punctuation or symbol characters
except '-' with spaces, collapses whitespace and (by default) lowercases.
It is idempotent, so already-clean corpora can be re-loaded safely.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .languages import LanguageCode, parse_language

#: Identifier of the sampling RNG, recorded in every split for reproducibility.
SPLIT_RNG_ID = "numpy:PCG64:permutation"


class CorpusFormatError(ValueError):
    """A corpus file that cannot be parsed; the message carries the line number."""


class InsufficientDataError(ValueError):
    """A language has fewer usable sentences than the requested sample size."""

    def __init__(self, language: LanguageCode, available: int, requested: int):
        self.language = language
        self.available = available
        self.requested = requested
        super().__init__(
            f"language {language.value!r} has only {available} sentences in range, "
            f"{requested} requested"
        )


@dataclass(frozen=True)
class LabeledText:
    """One cleaned, non-empty sentence with its gold language label."""

    text: str
    label: LanguageCode


@dataclass(frozen=True)
class DatasetSplit:
    """A reproducible train/test sample.

    ``seed`` together with ``rng`` (the sampling algorithm identifier) and the
    source corpus order fully determine the sample.
    """

    train: tuple[LabeledText, ...]
    test: tuple[LabeledText, ...]
    seed: int
    length_min: int
    length_max: int
    rng: str = field(default=SPLIT_RNG_ID)


class _CleanTable(dict):
    # str.translate mapping: digits (Nd) and punctuation/symbols (P*/S*)
    # other than '-' become spaces, everything else passes through.
    def __missing__(self, cp: int) -> int:
        ch = chr(cp)
        cat = unicodedata.category(ch)
        out = 0x20 if (cat == "Nd" or (cat[0] in "PS" and ch != "-")) else cp
        self[cp] = out
        return out


_CLEAN_TABLE = _CleanTable()


def clean_text(raw: str, lowercase: bool = True) -> str:
    """Normalise a raw string into the cleaned form used everywhere else.

    NFC-normalises, optionally lowercases, replaces decimal digits and all
    punctuation and symbol characters except '-' with spaces, then collapses
    whitespace runs to single spaces and trims. Diacritics such as "š" pass
    through unchanged. Idempotent: ``clean_text(clean_text(s)) == clean_text(s)``.
    """
    text = unicodedata.normalize("NFC", raw)
    if lowercase:
        # lower() may denormalise (e.g. İ -> i + combining dot), renormalise
        text = unicodedata.normalize("NFC", text.lower())
    text = text.translate(_CLEAN_TABLE)
    return " ".join(text.split())


def truncate_word_boundary(text: str, target_len: int) -> str:
    """Shortest prefix of ``text`` with at least ``target_len`` characters
    that ends at the end of a word (never splitting one).

    Takes the first ``target_len`` characters; unless that cut lands exactly
    at the end of a word, the prefix is extended through the end of the word
    in progress. The result always has at least ``min(target_len, len(text))``
    characters and no trailing space. Expects cleaned (single-space
    separated) text.
    """
    if target_len < 1:
        raise ValueError(f"target_len must be >= 1, got {target_len}")
    if target_len >= len(text):
        return text
    if text[target_len] == " ":
        return text[:target_len]
    end = text.find(" ", target_len)
    return text if end == -1 else text[:end]


def _load_tsv(path: Path, lowercase: bool) -> list[LabeledText]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            text, sep, code = line.rpartition("\t")
            if not sep:
                raise CorpusFormatError(
                    f"{path}:{lineno}: expected 'text<TAB>lang_code', got no tab"
                )
            try:
                label = parse_language(code.strip())
            except ValueError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from None
            cleaned = clean_text(text, lowercase=lowercase)
            if cleaned:
                records.append(LabeledText(cleaned, label))
    return records


def _load_language_lines(path: Path, label: LanguageCode, lowercase: bool) -> list[LabeledText]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            cleaned = clean_text(line.rstrip("\n"), lowercase=lowercase)
            if cleaned:
                records.append(LabeledText(cleaned, label))
    return records


def load_corpus(
    path: str | Path,
    format: str = "tsv",
    lowercase: bool = True,
) -> list[LabeledText]:
    """Load a labeled corpus, cleaning every record.

    Formats:
      * ``"tsv"``: one ``text<TAB>lang_code`` record per line, no header.
      * ``"lines"``: a file named ``<code>.txt`` with one sentence per line,
        or a directory of such files (read in sorted name order).

    Cleaning is idempotent, so feeding an already-clean corpus back in is a
    no-op. Records whose text cleans to nothing are dropped; otherwise record
    order is preserved. Malformed records raise CorpusFormatError with the
    offending line number.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus path does not exist: {path}")
    if format == "tsv":
        return _load_tsv(path, lowercase)
    if format in ("lines", "per-language-lines"):
        if path.is_dir():
            records: list[LabeledText] = []
            files = sorted(path.glob("*.txt"))
            if not files:
                raise CorpusFormatError(f"{path}: no <code>.txt files found")
            for file in files:
                records.extend(_load_language_lines(file, parse_language(file.stem), lowercase))
            return records
        return _load_language_lines(path, parse_language(path.stem), lowercase)
    raise ValueError(f"unknown corpus format: {format!r}")


def save_corpus_tsv(records: Iterable[LabeledText], path: str | Path) -> None:
    """Write records as ``text<TAB>lang_code`` lines (UTF-8, no header)."""
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(f"{record.text}\t{record.label.value}\n")


def group_by_language(records: Iterable[LabeledText]) -> dict[LanguageCode, list[LabeledText]]:
    """Group records by gold label, preserving order within each language."""
    groups: dict[LanguageCode, list[LabeledText]] = {}
    for record in records:
        groups.setdefault(record.label, []).append(record)
    return groups


def split_train_test(
    corpus: list[LabeledText],
    n_train: int,
    n_test: int,
    length_min: int,
    length_max: int,
    seed: int,
) -> DatasetSplit:
    """Draw a per-language train/test sample from sentences whose length
    (in Unicode scalar values) lies in ``[length_min, length_max]``.

    For every language present in the corpus, ``n_train + n_test`` in-range
    sentences are drawn uniformly without replacement; the first ``n_train``
    go to train, the rest to test, so the two sets never share a sentence.
    Deterministic for a fixed corpus order and seed.

    Raises:
        InsufficientDataError: if any language has fewer than
            ``n_train + n_test`` in-range sentences.
    """
    if n_train < 0 or n_test < 0:
        raise ValueError("n_train and n_test must be >= 0")
    if length_min > length_max:
        raise ValueError(f"length_min {length_min} > length_max {length_max}")

    in_range = [r for r in corpus if length_min <= len(r.text) <= length_max]
    groups = group_by_language(in_range)

    needed = n_train + n_test
    rng = np.random.default_rng(seed)
    train: list[LabeledText] = []
    test: list[LabeledText] = []
    # languages visited in sorted code order so the draw sequence is stable
    for label in sorted(groups, key=lambda c: c.value):
        records = groups[label]
        if len(records) < needed:
            raise InsufficientDataError(label, len(records), needed)
        order = rng.permutation(len(records))
        train.extend(records[i] for i in order[:n_train])
        test.extend(records[i] for i in order[n_train:needed])
    return DatasetSplit(
        train=tuple(train),
        test=tuple(test),
        seed=seed,
        length_min=length_min,
        length_max=length_max,
    )


def corpora_by_language(
    records_or_groups: Iterable[LabeledText] | Mapping[LanguageCode, list[LabeledText]],
) -> dict[LanguageCode, list[LabeledText]]:
    """Accept either a flat record list or a ready-made per-language mapping."""
    if isinstance(records_or_groups, Mapping):
        return dict(records_or_groups)
    return group_by_language(records_or_groups)
