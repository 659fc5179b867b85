"""Shared fixtures: a small synthetic multilingual corpus with the family
structure of the real task (shared words inside a family, unique words per
language) so two-stage behavior is exercisable without the real dataset."""

from __future__ import annotations

import random
from dataclasses import dataclass

import pytest

from salid import (
    CharNgramNaiveBayes,
    LabeledText,
    LexiconVoteClassifier,
    StackedLanguageClassifier,
    build_lexicon,
    clean_text,
    group_by_language,
    parse_language,
)

_NGUNI_SHARED = "abantu inja ikati ubisi ekhaya umuntu".split()
_SOTHO_SHARED = "batho ntja katse lebese gae motho".split()

WORD_POOLS: dict[str, list[str]] = {
    "afr": "die kat hond melk brood oggend baie hou van ek sit kyk appels groot huis water".split(),
    "eng": "the cat dog milk bread morning very like off it sat look apples big house water".split(),
    "nbl": _NGUNI_SHARED + "kwanele umtjhana isikolo begodu nelanga ukudla".split(),
    "xho": _NGUNI_SHARED + "ndiyathanda intsasa ukutya impilo iveki xelela".split(),
    "zul": _NGUNI_SHARED + "ngiyathanda ekuseni ukudla impilo namhlanje zulu".split(),
    "ssw": _NGUNI_SHARED + "ngiyatsandza ekuseni kudla imphilo lamuhla swati".split(),
    "nso": _SOTHO_SHARED + "sekolo mosomo lehono kudu gore pele".split(),
    "sot": _SOTHO_SHARED + "sekolo mosebetsi kajeno haholo hore pele".split(),
    "tsn": _SOTHO_SHARED + "sekole tiro gompieno thata gore pele".split(),
    "tso": "vanhu swakudya ximanga mbyana nhloko mixo ndzi rhandza ku tshama henhla yindlu mati".split(),
    "ven": "vhathu zwiliwa tsimba mmbwa mukano matsheloni ndi funa u dzula ntha nndu madi".split(),
}


def make_sentence(rng: random.Random, code: str, n_words: int | None = None) -> str:
    pool = WORD_POOLS[code]
    count = n_words if n_words is not None else rng.randint(8, 16)
    return " ".join(rng.choice(pool) for _ in range(count))


def make_corpus(
    n_per_language: int = 40,
    seed: int = 0,
    languages: list[str] | None = None,
    noisy: bool = False,
) -> list[tuple[str, str]]:
    """Raw (text, code) pairs; with noisy=True a third of the texts carry
    capitalisation, digits and punctuation that cleaning must strip."""
    rng = random.Random(seed)
    pairs = []
    for code in languages if languages is not None else sorted(WORD_POOLS):
        for i in range(n_per_language):
            text = make_sentence(rng, code)
            if noisy and i % 3 == 0:
                text = text.capitalize() + f"! {rng.randint(0, 999)}"
            pairs.append((text, code))
    return pairs


def as_records(pairs: list[tuple[str, str]]) -> list[LabeledText]:
    return [LabeledText(clean_text(text), parse_language(code)) for text, code in pairs]


@dataclass(frozen=True)
class ToyPipeline:
    nb: CharNgramNaiveBayes
    stacked: StackedLanguageClassifier
    lexvote: LexiconVoteClassifier
    train: list[LabeledText]
    test: list[LabeledText]


@pytest.fixture(scope="session")
def toy_records() -> list[LabeledText]:
    return as_records(make_corpus(n_per_language=40, seed=0))


@pytest.fixture(scope="session")
def toy_pipeline(toy_records) -> ToyPipeline:
    groups = group_by_language(toy_records)
    train: list[LabeledText] = []
    test: list[LabeledText] = []
    for label in sorted(groups, key=lambda c: c.value):
        train.extend(groups[label][:30])
        test.extend(groups[label][30:])
    texts = [r.text for r in train]
    labels = [r.label.value for r in train]
    nb = CharNgramNaiveBayes().fit(texts, labels)
    lexicon = build_lexicon(group_by_language(train))
    stacked = StackedLanguageClassifier.from_components(nb, lexicon)
    lexvote = LexiconVoteClassifier.from_lexicon(lexicon)
    return ToyPipeline(nb=nb, stacked=stacked, lexvote=lexvote, train=train, test=test)
