"""Small input-validation helpers shared by the estimators."""

from __future__ import annotations

from typing import Sequence

from sklearn.exceptions import NotFittedError


def check_fitted(estimator, *attributes: str) -> None:
    """Raise NotFittedError unless every fitted attribute is present."""
    missing = [a for a in attributes if not hasattr(estimator, a)]
    if missing:
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted; call fit() first "
            f"(missing {', '.join(missing)})"
        )


def as_text_list(X) -> list[str]:
    """Materialise an iterable of texts, rejecting non-string items by index."""
    if isinstance(X, str):
        raise TypeError("expected an iterable of texts, got a single string")
    texts = list(X)
    bad = [i for i, t in enumerate(texts) if not isinstance(t, str)]
    if bad:
        shown = ", ".join(str(i) for i in bad[:10])
        more = "" if len(bad) <= 10 else f" (+{len(bad) - 10} more)"
        raise TypeError(f"non-string items at indices {shown}{more}")
    return texts


def as_label_list(y) -> list[str]:
    """Normalise labels to plain strings (LanguageCode values pass through)."""
    return [str(label) for label in y]
