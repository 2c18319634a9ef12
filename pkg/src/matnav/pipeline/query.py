"""Objective-text parsing: free text -> (property, direction).

The default is a small phrase lexicon so Stage I stays deterministic and
offline; richer parsers plug in behind the same function shape.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["QueryIntent", "parse_query", "PROPERTY_LEXICON"]

PROPERTY_LEXICON: dict[str, tuple[str, str]] = {
    # phrase -> (property_name, unit)
    "debye temperature": ("debye_temperature", "K"),
    "thermal conductivity": ("thermal_conductivity", "W/(m K)"),
    "band gap": ("band_gap", "eV"),
    "bulk modulus": ("bulk_modulus", "GPa"),
    "melting point": ("melting_point", "K"),
}

_HIGH_WORDS = ("high", "higher", "large", "maximal", "maximize", "above", "exceed")
_LOW_WORDS = ("low", "lower", "small", "minimal", "minimize", "below", "under")


@dataclass(frozen=True)
class QueryIntent:
    property_name: str
    unit: str
    direction: str  # "high" | "low"
    phrase: str


def parse_query(text: str) -> QueryIntent:
    """Match the longest lexicon phrase and a direction word; direction
    defaults to "high" (screening for standout materials)."""
    lowered = " ".join(text.lower().split())
    matches = [p for p in PROPERTY_LEXICON if p in lowered]
    if not matches:
        known = ", ".join(sorted(PROPERTY_LEXICON))
        raise ValueError(f"query names no known property; lexicon phrases: {known}")
    phrase = max(matches, key=len)
    name, unit = PROPERTY_LEXICON[phrase]
    direction = "high"
    if any(w in lowered.split() for w in _LOW_WORDS) and not any(
        w in lowered.split() for w in _HIGH_WORDS
    ):
        direction = "low"
    return QueryIntent(property_name=name, unit=unit, direction=direction, phrase=phrase)
