"""Deterministic literature-evidence processing.

Chunks a text corpus, ranks passages against a query, merges extracted
property records, normalizes material names, and derives a screening
threshold from percentile statistics. The extraction step itself (turning
a passage into records) is a pluggable producer; everything on this side
of that boundary is pure and reproducible.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from collections import Counter
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from .core import format_formula, parse_formula
from .errors import (
    EmptyCorpus,
    InsufficientData,
    InvalidWindow,
    MatnavError,
    SchemaViolation,
)

__all__ = [
    "Chunk",
    "RankedChunk",
    "PropertyRecord",
    "PercentileBands",
    "ScreeningCriterion",
    "NormalizedName",
    "hashed_tf_embedder",
    "chunk_text",
    "rank_chunks",
    "batch_chunks",
    "merge_records",
    "normalize_material",
    "percentile_bands",
    "derive_threshold",
    "records_from_json",
    "records_to_json",
]

DEFAULT_WINDOW = 500
DEFAULT_OVERLAP = 100
DEFAULT_TOP_K = 100
DEFAULT_BATCH_SIZE = 5
DEFAULT_EMBED_DIM = 512
VALUE_TOLERANCE = 0.005  # relative; absorbs cross-paper rounding
DEFAULT_MIN_RECORDS = 10
DEFAULT_ROUNDING = 50.0


@dataclass(frozen=True)
class Chunk:
    doc_id: str
    start: int
    text: str


@dataclass(frozen=True)
class RankedChunk:
    chunk: Chunk
    score: float


@dataclass(frozen=True)
class PropertyRecord:
    """One extracted measurement, in the shape of the record-file format."""

    material: str
    property_name: str
    value: float
    unit: str
    source_snippet: str
    normalized: tuple[str, ...] = ()
    extra: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class PercentileBands:
    low_band: tuple[float, ...]
    high_band: tuple[float, ...]
    p10: float
    p90: float


@dataclass(frozen=True)
class ScreeningCriterion:
    property_name: str
    comparator: str  # ">" or "<"
    threshold: float
    unit: str
    provenance: dict = field(compare=False, default_factory=dict)


# ---------------------------------------------------------------- chunking


def chunk_text(
    doc_id: str,
    text: str,
    window: int = DEFAULT_WINDOW,
    overlap: int = DEFAULT_OVERLAP,
) -> list[Chunk]:
    """Slice text into windows starting every (window - overlap) characters.

    The final chunk may be shorter; stripping the first `overlap` characters
    of every non-initial chunk and concatenating reconstructs the input.
    """
    if window <= 0 or overlap < 0 or overlap >= window:
        raise InvalidWindow(f"need 0 <= overlap < window, got window={window}, overlap={overlap}")
    stride = window - overlap
    return [Chunk(doc_id, o, text[o : o + window]) for o in range(0, len(text), stride)]


# ----------------------------------------------------------------- ranking


def hashed_tf_embedder(dim: int = DEFAULT_EMBED_DIM) -> Callable[[str], np.ndarray]:
    """Deterministic term-frequency embedder: lowercase word tokens hashed
    into `dim` buckets, L2-normalized. Stable across processes (blake2b,
    not the salted builtin hash)."""

    def embed(text: str) -> np.ndarray:
        vec = np.zeros(dim)
        for token in re.findall(r"[a-z0-9]+", text.lower()):
            digest = hashlib.blake2b(token.encode(), digest_size=8).digest()
            vec[int.from_bytes(digest, "big") % dim] += 1.0
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0 else vec

    return embed


def rank_chunks(
    query: str,
    chunks: Sequence[Chunk],
    k: int = DEFAULT_TOP_K,
    embedder: Callable[[str], np.ndarray] | None = None,
) -> list[RankedChunk]:
    """Top-k chunks by cosine similarity; ties broken by (doc_id, start)."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if not chunks:
        raise EmptyCorpus("cannot rank an empty chunk list")
    embed = embedder if embedder is not None else hashed_tf_embedder()
    qvec = np.asarray(embed(query), dtype=float)
    scored = []
    for chunk in chunks:
        cvec = np.asarray(embed(chunk.text), dtype=float)
        if cvec.shape != qvec.shape:
            raise ValueError(
                f"embedder dimension mismatch: {cvec.shape} vs {qvec.shape}"
            )
        qn, cn = np.linalg.norm(qvec), np.linalg.norm(cvec)
        score = float(qvec @ cvec / (qn * cn)) if qn > 0 and cn > 0 else 0.0
        scored.append(RankedChunk(chunk, score))
    scored.sort(key=lambda r: (-r.score, r.chunk.doc_id, r.chunk.start))
    return scored[:k]


def batch_chunks(ranked: Sequence, size: int = DEFAULT_BATCH_SIZE) -> list[list]:
    """Group into order-preserving batches; only the last may be short."""
    if size < 1:
        raise ValueError(f"batch size must be at least 1, got {size}")
    return [list(ranked[i : i + size]) for i in range(0, len(ranked), size)]


# ----------------------------------------------------------- record merge


def _validate_record(rec: PropertyRecord) -> None:
    if not isinstance(rec.material, str) or not rec.material.strip():
        raise SchemaViolation("record field 'material' must be a non-empty string")
    if not isinstance(rec.property_name, str) or not rec.property_name.strip():
        raise SchemaViolation("record field 'property_name' must be a non-empty string")
    if isinstance(rec.value, bool) or not isinstance(rec.value, (int, float)):
        raise SchemaViolation(f"record field 'value' must be numeric, got {rec.value!r}")
    if not math.isfinite(rec.value):
        raise SchemaViolation(f"record field 'value' must be finite, got {rec.value!r}")
    if not isinstance(rec.unit, str) or not rec.unit.strip():
        raise SchemaViolation("record field 'unit' must be a non-empty string")
    if not isinstance(rec.source_snippet, str):
        raise SchemaViolation("record field 'source_snippet' must be a string")


def _normalize_unit(unit: str) -> str:
    # v1 table: Kelvin spellings only; anything else passes through verbatim
    return "K" if unit.strip() in ("K", "k", "Kelvin", "kelvin") else unit.strip()


def _material_key(rec: PropertyRecord) -> str:
    names = rec.normalized or tuple(normalize_material(rec.material))
    return "+".join(sorted(names)) if names else rec.material.strip().lower()


def _close(v: float, w: float) -> bool:
    scale = max(abs(v), abs(w))
    return scale == 0.0 or abs(v - w) <= VALUE_TOLERANCE * scale


def merge_records(fragments: Iterable[Iterable[PropertyRecord]]) -> list[PropertyRecord]:
    """Deduplicate record fragments from the map stage.

    Records agreeing on (material key, property name, normalized unit) whose
    values sit within 0.5% relative of each other collapse to one, keeping
    the longest source snippet. Value clustering takes the transitive
    closure over the sorted values, which makes the merge idempotent.
    """
    flat: list[PropertyRecord] = []
    for fragment in fragments:
        for rec in fragment:
            _validate_record(rec)
            flat.append(rec)

    groups: dict[tuple[str, str, str], list[PropertyRecord]] = {}
    for rec in flat:
        key = (_material_key(rec), rec.property_name.strip(), _normalize_unit(rec.unit))
        groups.setdefault(key, []).append(rec)

    merged: list[tuple[str, float, PropertyRecord]] = []
    for (mat_key, _, _), members in groups.items():
        members.sort(key=lambda r: r.value)
        cluster: list[PropertyRecord] = []
        for rec in members:
            if cluster and not _close(cluster[-1].value, rec.value):
                merged.append((mat_key, min(r.value for r in cluster), _pick(cluster)))
                cluster = []
            cluster.append(rec)
        if cluster:
            merged.append((mat_key, min(r.value for r in cluster), _pick(cluster)))

    merged.sort(key=lambda item: (item[0], item[1], item[2].property_name))
    return [rec for _, _, rec in merged]


def _pick(cluster: list[PropertyRecord]) -> PropertyRecord:
    best = max(cluster, key=lambda r: (len(r.source_snippet), -r.value))
    if not best.normalized:
        best = replace(best, normalized=tuple(normalize_material(best.material)))
    return best


# ------------------------------------------------------------ name cleanup


class NormalizedName(str):
    """A canonical formula string, or a raw name flagged unresolvable."""

    resolved: bool

    def __new__(cls, text: str, resolved: bool = True):
        obj = super().__new__(cls, text)
        obj.resolved = resolved
        return obj


_POLYTYPE_PREFIX = re.compile(r"^(\d+[HCR]-|alpha-|beta-|gamma-|α-|β-|γ-)", re.IGNORECASE)
_PARENTHETICAL = re.compile(r"\([^()]*\)")


def normalize_material(raw: str) -> list[NormalizedName]:
    """Canonical formulas for one raw material name.

    Strips parenthetical annotations, removes polytype prefixes (nH-, nC-,
    nR-, Greek-letter phases), and splits slash/comma/" and "-separated
    lists. Names that still fail formula parsing come back flagged
    ``resolved=False`` rather than failing the batch.
    """
    if not raw or not raw.strip():
        return []
    text = raw
    while _PARENTHETICAL.search(text):
        text = _PARENTHETICAL.sub(" ", text)
    pieces = re.split(r"/|,|\band\b", text)
    out: list[NormalizedName] = []
    for piece in pieces:
        name = piece.strip()
        if not name:
            continue
        name = _POLYTYPE_PREFIX.sub("", name).strip()
        if not name:
            continue
        try:
            out.append(NormalizedName(format_formula(parse_formula(name))))
        except MatnavError:
            out.append(NormalizedName(name, resolved=False))
    return out


# -------------------------------------------------------------- statistics


def _quantile(sorted_values: Sequence[float], q: float) -> float:
    """Linear interpolation between order statistics (the 'type 7' rule)."""
    n = len(sorted_values)
    if n == 1:
        return sorted_values[0]
    h = (n - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, n - 1)
    return sorted_values[lo] + (h - lo) * (sorted_values[hi] - sorted_values[lo])


def percentile_bands(values: Sequence[float]) -> PercentileBands:
    """0-10% and 90-100% bands over the deduplicated value set."""
    finite = [float(v) for v in values if math.isfinite(v)]
    if len(finite) < 2:
        raise InsufficientData(f"need at least 2 finite values, got {len(finite)}")
    unique = sorted(set(finite))
    p10 = _quantile(unique, 0.10)
    p90 = _quantile(unique, 0.90)
    low = tuple(v for v in unique if v <= p10)
    high = tuple(v for v in unique if v >= p90)
    return PercentileBands(low_band=low, high_band=high, p10=p10, p90=p90)


def derive_threshold(
    records: Sequence[PropertyRecord],
    property_name: str,
    direction: str = "high",
    min_records: int = DEFAULT_MIN_RECORDS,
    rounding: float = DEFAULT_ROUNDING,
) -> ScreeningCriterion:
    """Screening criterion from the P90 (or P10 for "low" queries) of the
    deduplicated evidence, rounded to the nearest `rounding` units."""
    if direction not in ("high", "low"):
        raise ValueError(f"direction must be 'high' or 'low', got {direction!r}")
    matching = [r for r in records if r.property_name.strip() == property_name]
    if not matching:
        raise InsufficientData(f"no records for property {property_name!r}")
    unit_counts = Counter(_normalize_unit(r.unit) for r in matching)
    unit = min(unit_counts, key=lambda u: (-unit_counts[u], u))
    usable = [r for r in matching if _normalize_unit(r.unit) == unit]
    if len(usable) < min_records:
        raise InsufficientData(
            f"{len(usable)} deduplicated records for {property_name!r}; need {min_records}"
        )
    bands = percentile_bands([r.value for r in usable])
    pivot = bands.p90 if direction == "high" else bands.p10
    threshold = round(pivot / rounding) * rounding if rounding > 0 else pivot
    return ScreeningCriterion(
        property_name=property_name,
        comparator=">" if direction == "high" else "<",
        threshold=float(threshold),
        unit=unit,
        provenance={
            "p10": bands.p10,
            "p90": bands.p90,
            "low_band_size": len(bands.low_band),
            "high_band_size": len(bands.high_band),
            "record_count": len(usable),
            "skipped_other_units": len(matching) - len(usable),
            "rounding": rounding,
            "direction": direction,
        },
    )


# ---------------------------------------------------------------- file IO

_RECORD_KEYS = ("material", "property_name", "value", "unit", "source_snippet")


def records_from_json(text: str) -> list[PropertyRecord]:
    """Parse the record-file format: a JSON array of objects with keys
    material, property_name, value, unit, source_snippet. Unknown keys are
    preserved and round-trip through records_to_json."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"record file is not valid JSON: {exc}") from None
    if not isinstance(data, list):
        raise SchemaViolation("record file must be a JSON array")
    records = []
    for i, obj in enumerate(data):
        if not isinstance(obj, dict):
            raise SchemaViolation(f"record {i} is not a JSON object")
        missing = [k for k in _RECORD_KEYS if k not in obj]
        if missing:
            raise SchemaViolation(f"record {i} missing keys: {', '.join(missing)}")
        value = obj["value"]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaViolation(f"record {i} has non-numeric value {value!r}")
        rec = PropertyRecord(
            material=obj["material"],
            property_name=obj["property_name"],
            value=float(value),
            unit=obj["unit"],
            source_snippet=obj["source_snippet"],
            normalized=tuple(obj.get("normalized", ())),
            extra={k: v for k, v in obj.items() if k not in (*_RECORD_KEYS, "normalized")},
        )
        _validate_record(rec)
        records.append(rec)
    return records


def records_to_json(records: Sequence[PropertyRecord]) -> str:
    out = []
    for rec in records:
        obj = {
            "material": rec.material,
            "property_name": rec.property_name,
            "value": rec.value,
            "unit": rec.unit,
            "source_snippet": rec.source_snippet,
        }
        if rec.normalized:
            obj["normalized"] = list(rec.normalized)
        obj.update(sorted(rec.extra.items()))
        out.append(obj)
    return json.dumps(out, indent=2, sort_keys=True)
