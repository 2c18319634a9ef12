"""Default map-stage record extractor.

The architecture treats per-batch record extraction as a pluggable
producer (the original loop delegates it to a language model). This
default implementation pattern-matches explicit measurement sentences so
the bundled corpus processes deterministically offline. Anything it cannot
parse it simply does not emit.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Sequence

from ..evidence import Chunk, PropertyRecord, RankedChunk

__all__ = ["RegexExtractor", "DEFAULT_PATTERNS"]

_MAT = r"[A-Za-z][A-Za-z0-9()\-/ ]*?"
_VAL = r"\d+(?:\.\d+)?"

DEFAULT_PATTERNS: tuple[str, ...] = (
    rf"(?P<mat>{_MAT})\s+(?:has|exhibits|shows)\s+a\s+Debye temperature of\s+"
    rf"(?P<val>{_VAL})\s*K",
    rf"Debye temperature of\s+(?P<mat>{_MAT})\s+(?:is|was measured at|reaches)\s+"
    rf"(?:about\s+|approximately\s+)?(?P<val>{_VAL})\s*K",
    rf"\(Theta_D\s*=\s*(?P<val>{_VAL})\s*K was found for a pure\s+(?P<mat>{_MAT})\)",
)


class RegexExtractor:
    """Extract PropertyRecord fragments from a batch of chunks."""

    def __init__(
        self,
        property_name: str = "debye_temperature",
        unit: str = "K",
        patterns: Sequence[str] = DEFAULT_PATTERNS,
    ) -> None:
        self.property_name = property_name
        self.unit = unit
        self.patterns = [re.compile(p) for p in patterns]

    def __call__(self, batch: Iterable[Chunk | RankedChunk]) -> list[PropertyRecord]:
        records = []
        for item in batch:
            chunk = item.chunk if isinstance(item, RankedChunk) else item
            for pattern in self.patterns:
                for match in pattern.finditer(chunk.text):
                    records.append(
                        PropertyRecord(
                            material=match.group("mat").strip(),
                            property_name=self.property_name,
                            value=float(match.group("val")),
                            unit=self.unit,
                            source_snippet=match.group(0).strip(),
                        )
                    )
        return records
