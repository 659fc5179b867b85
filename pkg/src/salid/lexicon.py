"""Per-language word lexicons and the within-family dominance vote.

The lexicon stores, for every language, the set of word types seen in its
cleaned corpus. To refine a prediction inside a language family, the words
of an input text are counted against each family member's set; a member
whose count beats every other member by at least ``margin`` wins the vote,
otherwise the vote abstains.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ._validation import as_label_list, as_text_list, check_fitted
from .corpus import LabeledText
from .languages import LanguageCode, LanguageFamily, family_members, parse_language

LEXICON_FORMAT_VERSION = 1

#: Hit counts for the members of one family (or any language subset).
FamilyHitCounts = dict[LanguageCode, int]


class EmptyCorpusError(ValueError):
    """A language was given zero sentences to build its word set from."""


class LexiconFormatError(ValueError):
    """A lexicon directory is missing files or fails its manifest checksums."""


@dataclass(frozen=True)
class SourceStats:
    sentences: int
    tokens: int


@dataclass(frozen=True)
class Lexicon:
    """Immutable per-language word sets plus statistics of their sources."""

    words: dict[LanguageCode, frozenset[str]]
    source_stats: dict[LanguageCode, SourceStats]

    @property
    def languages(self) -> tuple[LanguageCode, ...]:
        return tuple(sorted(self.words, key=lambda c: c.value))


def build_lexicon(corpora: Mapping[LanguageCode, list[LabeledText]]) -> Lexicon:
    """Collect the word types of every language's cleaned sentences.

    Tokens are the space-separated words of the cleaned text; '-' survives
    cleaning, so hyphenated forms are single tokens. A word may end up in
    several languages' sets.

    Raises EmptyCorpusError if a language maps to zero sentences.
    """
    words: dict[LanguageCode, frozenset[str]] = {}
    stats: dict[LanguageCode, SourceStats] = {}
    for lang in sorted(corpora, key=lambda c: c.value):
        records = corpora[lang]
        if not records:
            raise EmptyCorpusError(f"no sentences for language {lang.value!r}")
        seen: set[str] = set()
        n_tokens = 0
        for record in records:
            tokens = record.text.split()
            n_tokens += len(tokens)
            seen.update(tokens)
        words[lang] = frozenset(seen)
        stats[lang] = SourceStats(sentences=len(records), tokens=n_tokens)
    return Lexicon(words=words, source_stats=stats)


def _count_hits(tokens: list[str], lexicon: Lexicon, languages: Iterable[LanguageCode]) -> FamilyHitCounts:
    return {
        lang: sum(1 for tok in tokens if tok in lexicon.words.get(lang, frozenset()))
        for lang in languages
    }


def count_hits(text: str, lexicon: Lexicon, family: LanguageFamily) -> FamilyHitCounts:
    """Token occurrences of ``text`` (with multiplicity) found in each family
    member's word set. Expects cleaned text; empty text gives all zeros.
    """
    return _count_hits(text.split(), lexicon, family_members(family))


def dominant_language(counts: Mapping[LanguageCode, int], margin: int = 1) -> LanguageCode | None:
    """The language whose count beats every other by at least ``margin``.

    Returns None (no decision) on ties, insufficient lead, or when the best
    count is below ``margin`` itself; so raising the margin only ever turns
    decisions into abstentions. For a single-candidate mapping the candidate
    wins iff its count reaches ``margin``.
    """
    if margin < 1:
        raise ValueError(f"margin must be >= 1, got {margin}")
    if not counts:
        return None
    best = max(counts.values())
    if best < margin:
        return None
    leaders = [lang for lang, count in counts.items() if count == best]
    if len(leaders) > 1:
        return None
    runner_up = max((c for lang, c in counts.items() if lang != leaders[0]), default=0)
    if best - runner_up < margin:
        return None
    return leaders[0]


class LexiconVoteClassifier(ClassifierMixin, BaseEstimator):
    """Standalone word-hit classifier over all learned languages.

    The dominance vote is run over every language's hit count. Because an
    evaluation needs a label for every sample, an abstaining vote falls back
    to the lexicographically smallest language among the tied leaders (this
    fallback never fires inside the stacked classifier, which keeps its own
    fallback to the n-gram stage).
    """

    def __init__(self, margin: int = 1):
        self.margin = margin

    def fit(self, X, y):
        texts = as_text_list(X)
        labels = [parse_language(l) for l in as_label_list(y)]
        if len(texts) != len(labels):
            raise ValueError(f"{len(texts)} texts but {len(labels)} labels")
        grouped: dict[LanguageCode, list[LabeledText]] = {}
        for text, label in zip(texts, labels):
            grouped.setdefault(label, []).append(LabeledText(text, label))
        self.lexicon_ = build_lexicon(grouped)
        return self

    @classmethod
    def from_lexicon(cls, lexicon: Lexicon, margin: int = 1) -> "LexiconVoteClassifier":
        clf = cls(margin=margin)
        clf.lexicon_ = lexicon
        return clf

    def hit_counts(self, text: str) -> FamilyHitCounts:
        check_fitted(self, "lexicon_")
        return _count_hits(text.split(), self.lexicon_, self.lexicon_.languages)

    def predict_one(self, text: str) -> LanguageCode:
        counts = self.hit_counts(text)
        decision = dominant_language(counts, self.margin)
        if decision is not None:
            return decision
        best = max(counts.values(), default=0)
        leaders = sorted(
            (lang for lang, count in counts.items() if count == best),
            key=lambda c: c.value,
        )
        return leaders[0]

    def predict(self, X) -> np.ndarray:
        texts = as_text_list(X)
        return np.asarray([self.predict_one(t).value for t in texts], dtype=object)


def save_lexicon(lexicon: Lexicon, out_dir: str | Path) -> None:
    """Write ``<code>.lex`` word lists (one word per line, sorted) plus a
    ``manifest.json`` carrying per-language counts and file checksums.

    The manifest is written last, so a directory without one is not a valid
    lexicon.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest: dict = {"format_version": LEXICON_FORMAT_VERSION, "languages": {}}
    for lang in lexicon.languages:
        content = "".join(f"{w}\n" for w in sorted(lexicon.words[lang])).encode("utf-8")
        lex_path = out_dir / f"{lang.value}.lex"
        lex_path.write_bytes(content)
        stats = lexicon.source_stats[lang]
        manifest["languages"][lang.value] = {
            "n_words": len(lexicon.words[lang]),
            "n_sentences": stats.sentences,
            "n_tokens": stats.tokens,
            "sha256": hashlib.sha256(content).hexdigest(),
        }
    manifest_bytes = json.dumps(manifest, sort_keys=True, indent=2).encode("utf-8")
    tmp = out_dir / "manifest.json.tmp"
    tmp.write_bytes(manifest_bytes)
    tmp.replace(out_dir / "manifest.json")


def load_lexicon(path: str | Path) -> Lexicon:
    """Load a lexicon directory written by :func:`save_lexicon`, verifying
    every word list against the manifest checksums."""
    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.is_file():
        raise LexiconFormatError(f"{path}: missing manifest.json")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        version = int(manifest["format_version"])
        languages = manifest["languages"]
    except (ValueError, KeyError, TypeError) as exc:
        raise LexiconFormatError(f"{path}: malformed manifest ({exc})") from None
    if version != LEXICON_FORMAT_VERSION:
        raise LexiconFormatError(f"{path}: unsupported lexicon format version {version}")

    words: dict[LanguageCode, frozenset[str]] = {}
    stats: dict[LanguageCode, SourceStats] = {}
    for code, entry in languages.items():
        lang = parse_language(code)
        lex_path = path / f"{code}.lex"
        if not lex_path.is_file():
            raise LexiconFormatError(f"{path}: missing word list {code}.lex")
        content = lex_path.read_bytes()
        try:
            expected_sha = str(entry["sha256"])
            n_words = int(entry["n_words"])
            entry_stats = SourceStats(
                sentences=int(entry["n_sentences"]), tokens=int(entry["n_tokens"])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise LexiconFormatError(f"{path}: malformed manifest entry for {code} ({exc})") from None
        if hashlib.sha256(content).hexdigest() != expected_sha:
            raise LexiconFormatError(f"{path}: checksum mismatch for {code}.lex")
        word_set = frozenset(w for w in content.decode("utf-8").splitlines() if w)
        if len(word_set) != n_words:
            raise LexiconFormatError(f"{path}: word count mismatch for {code}.lex")
        words[lang] = word_set
        stats[lang] = entry_stats
    return Lexicon(words=words, source_stats=stats)
