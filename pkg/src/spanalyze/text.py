"""Tokenization and rule-based noun singularization.

Text is lowercased and split on every character that is not a Unicode
letter or digit, so ``"dye-sensitized"`` becomes ``["dye", "sensitized"]``.
Each token is then singularized by a small suffix table.  Stemming is
deliberately avoided: ``"nanoporous"`` and ``"nanopore"`` stay distinct.
"""
from __future__ import annotations

import re
from functools import lru_cache
from pathlib import Path
from typing import Mapping

__all__ = [
    "INVARIANT_WORDS",
    "IRREGULAR_PLURALS",
    "Normalizer",
    "load_overrides",
    "normalize_phrase",
    "normalize_text",
    "singularize",
    "tokenize",
]

_TOKEN_RE = re.compile(r"[^\W_]+")

# Words ending in "s" that are already singular (or have no plural form).
INVARIANT_WORDS = frozenset(
    """
    alias always atlas bias canvas chaos corpus does ethos gas glass lens less
    mass news perhaps plus process series species thus whereas yes
    """.split()
)

IRREGULAR_PLURALS: dict[str, str] = {
    "analyses": "analysis",
    "axes": "axis",
    "bases": "base",
    "biases": "bias",
    "caches": "cache",
    "children": "child",
    "criteria": "criterion",
    "data": "data",
    "diagnoses": "diagnosis",
    "gases": "gas",
    "hypotheses": "hypothesis",
    "indices": "index",
    "lenses": "lens",
    "matrices": "matrix",
    "men": "man",
    "niches": "niche",
    "phenomena": "phenomenon",
    "syntheses": "synthesis",
    "theses": "thesis",
    "vertices": "vertex",
    "women": "woman",
}


def tokenize(text: str) -> list[str]:
    """Lowercase *text* and split it into letter/digit runs."""
    return _TOKEN_RE.findall(text.lower())


def _rule_singular(word: str) -> str:
    if len(word) <= 3 or word in INVARIANT_WORDS or not word.isalpha():
        return word
    if word.endswith(("ss", "us", "is")):
        return word
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith(("sses", "xes", "ches", "shes", "zzes")):
        return word[:-2]
    if word.endswith("s"):
        return word[:-1]
    return word


def singularize(word: str, overrides: Mapping[str, str] | None = None) -> str:
    """Return the singular form of a lowercase token.

    ``overrides`` takes precedence over the built-in irregular table, which
    takes precedence over the suffix rules.
    """
    table = {**IRREGULAR_PLURALS, **overrides} if overrides else IRREGULAR_PLURALS
    if word in table:
        return table[word]
    stem = _rule_singular(word)
    # "mens" -> "men" must continue on to "man"
    return table.get(stem, stem)


class Normalizer:
    """Text normalizer with an optional plural -> singular override table.

    Override targets must themselves be fixed points of the normalizer,
    otherwise normalization would not be idempotent; this is checked when
    the table is loaded.
    """

    def __init__(self, overrides: Mapping[str, str] | None = None):
        self.overrides = dict(overrides or {})
        for plural, singular in self.overrides.items():
            if tokenize(plural) != [plural] or tokenize(singular) != [singular]:
                raise ValueError(f"override must map single tokens: {plural!r} -> {singular!r}")
        for singular in self.overrides.values():
            if self._word(singular) != singular:
                raise ValueError(f"override target {singular!r} is not a fixed point")
        self._cache: dict[str, tuple[str, ...]] = {}

    def _word(self, token: str) -> str:
        return singularize(token, self.overrides)

    def tokens(self, text: str) -> tuple[str, ...]:
        hit = self._cache.get(text)
        if hit is None:
            hit = tuple(self._word(t) for t in tokenize(text))
            self._cache[text] = hit
        return hit

    def phrase(self, text: str) -> str:
        return " ".join(self.tokens(text))

    def __call__(self, text: str) -> list[str]:
        return list(self.tokens(text))


def load_overrides(path: str | Path) -> dict[str, str]:
    """Read ``plural singular`` pairs, one per line, ``#`` comments allowed."""
    table: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'plural singular'")
        table[parts[0].lower()] = parts[1].lower()
    return table


@lru_cache(maxsize=None)
def _default() -> Normalizer:
    return Normalizer()


def normalize_text(text: str) -> list[str]:
    """Lowercase, split on punctuation and singularize each token.

    >>> normalize_text("thin films; Raman spectroscopy")
    ['thin', 'film', 'raman', 'spectroscopy']
    """
    return _default()(text)


def normalize_phrase(text: str) -> str:
    """Normalized tokens joined by single spaces."""
    return _default().phrase(text)
