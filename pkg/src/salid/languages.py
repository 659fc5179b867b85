"""The 11 official South African languages and their family taxonomy.

Afrikaans and English are Germanic. isiNdebele, isiXhosa, isiZulu and
siSwati form the Nguni family; Sepedi, Sesotho and Setswana the
Sotho-Tswana family; Xitsonga is Tswa-Ronga and Tshivenda is Venda.
Most identification confusion happens between members of one family,
which is what the lexicon stage exploits.
"""

from __future__ import annotations

from enum import Enum


class UnknownLanguageError(ValueError):
    """Raised when a string is not one of the 11 supported language codes."""


class LanguageCode(str, Enum):
    """ISO-639-2 style 3-letter codes for the 11 official languages."""

    AFR = "afr"  # Afrikaans
    ENG = "eng"  # English
    NBL = "nbl"  # isiNdebele
    XHO = "xho"  # isiXhosa
    ZUL = "zul"  # isiZulu
    SSW = "ssw"  # siSwati
    NSO = "nso"  # Sepedi
    SOT = "sot"  # Sesotho
    TSN = "tsn"  # Setswana
    TSO = "tso"  # Xitsonga
    VEN = "ven"  # Tshivenda

    def __str__(self) -> str:
        return self.value


class LanguageFamily(str, Enum):
    GERMANIC = "Germanic"
    NGUNI = "Nguni"
    SOTHO_TSWANA = "Sotho-Tswana"
    TSWA_RONGA = "Tswa-Ronga"
    VENDA = "Venda"

    def __str__(self) -> str:
        return self.value


_FAMILY_OF: dict[LanguageCode, LanguageFamily] = {
    LanguageCode.AFR: LanguageFamily.GERMANIC,
    LanguageCode.ENG: LanguageFamily.GERMANIC,
    LanguageCode.NBL: LanguageFamily.NGUNI,
    LanguageCode.XHO: LanguageFamily.NGUNI,
    LanguageCode.ZUL: LanguageFamily.NGUNI,
    LanguageCode.SSW: LanguageFamily.NGUNI,
    LanguageCode.NSO: LanguageFamily.SOTHO_TSWANA,
    LanguageCode.SOT: LanguageFamily.SOTHO_TSWANA,
    LanguageCode.TSN: LanguageFamily.SOTHO_TSWANA,
    LanguageCode.TSO: LanguageFamily.TSWA_RONGA,
    LanguageCode.VEN: LanguageFamily.VENDA,
}

#: All 11 codes in lexicographic order ("afr" first), the canonical class
#: order used by the classifiers.
ALL_LANGUAGES: tuple[LanguageCode, ...] = tuple(sorted(LanguageCode, key=lambda c: c.value))

ALL_FAMILIES: tuple[LanguageFamily, ...] = tuple(
    sorted(LanguageFamily, key=lambda f: f.value)
)


def parse_language(code: str) -> LanguageCode:
    """Parse a 3-letter code, raising UnknownLanguageError for anything else."""
    try:
        return LanguageCode(code)
    except ValueError:
        raise UnknownLanguageError(f"unknown language code: {code!r}") from None


def family_of(lang: LanguageCode | str) -> LanguageFamily:
    """Map a language to its family. Total over the 11 codes."""
    if not isinstance(lang, LanguageCode):
        lang = parse_language(lang)
    return _FAMILY_OF[lang]


def family_members(family: LanguageFamily | str) -> tuple[LanguageCode, ...]:
    """Members of a family, in lexicographic code order."""
    if not isinstance(family, LanguageFamily):
        family = LanguageFamily(family)
    return tuple(c for c in ALL_LANGUAGES if _FAMILY_OF[c] is family)
