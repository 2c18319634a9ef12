"""Materials-database client and the retrieve/validate/repair loop.

The client speaks a small REST surface (structures and elasticity lookups)
with on-disk response caching, so test runs replay against a bundled stub
server with zero live traffic.

Retrieval routines are declarative descriptors (endpoint name, parameters,
transform pipeline) interpreted by a runner, never arbitrary code. A
RoutineSource proposes a descriptor, sees the full diagnostics of every
failed attempt, and proposes again, until validation passes or the retry
budget runs out.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import time
import traceback
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as _FutureTimeout
from dataclasses import dataclass, field
from pathlib import Path

import httpx
import numpy as np

from .cif import parse_cif
from .core import Structure, format_formula
from .elasticity import ElasticTensor, debye_from_tensor
from .errors import (
    AuthError,
    BudgetExhausted,
    DecodeError,
    MatnavError,
    NetworkError,
    Timeout,
)

__all__ = [
    "PropertySpec",
    "PropertyTable",
    "ValidationReport",
    "CheckResult",
    "RoutineDescriptor",
    "RoutineSource",
    "RoutineRunner",
    "DatabaseClient",
    "validate_table",
    "fetch_with_repair",
    "derive_debye_table",
    "DEBYE_SPEC",
]

log = logging.getLogger(__name__)

API_KEY_ENV = "MKNA_DB_KEY"
TABLE_COLUMNS = ("material_id", "formula", "value", "unit")
DEFAULT_TIMEOUT_S = 120.0
DEFAULT_BUDGET = 3


@dataclass(frozen=True)
class PropertySpec:
    """What a retrieved table must look like to count as a success."""

    name: str
    unit: str
    physical_range: tuple[float, float]
    required_columns: tuple[str, ...] = TABLE_COLUMNS

    def __post_init__(self):
        lo, hi = self.physical_range
        if not lo < hi:
            raise ValueError(f"physical_range must satisfy min < max, got {self.physical_range}")
        if not self.required_columns:
            raise ValueError("required_columns must be non-empty")


DEBYE_SPEC = PropertySpec(
    name="debye_temperature",
    unit="K",
    physical_range=(1.0, 5000.0),
)


@dataclass(frozen=True)
class PropertyTable:
    """A generic columnar property table; canonical columns TABLE_COLUMNS."""

    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    unit: str

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]

    def to_json(self) -> str:
        return json.dumps(
            {"columns": list(self.columns), "rows": [list(r) for r in self.rows], "unit": self.unit},
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "PropertyTable":
        try:
            obj = json.loads(text)
            return cls(
                columns=tuple(obj["columns"]),
                rows=tuple(tuple(r) for r in obj["rows"]),
                unit=obj["unit"],
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DecodeError(f"cannot deserialize property table: {exc}") from None


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    diagnostic: str


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    checks: tuple[CheckResult, ...]

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]


def validate_table(table: PropertyTable, spec: PropertySpec) -> ValidationReport:
    """Run the five standard checks; every check always runs (no masking)."""
    checks: list[CheckResult] = []

    n = len(table.rows)
    checks.append(CheckResult("non_empty", n > 0, f"{n} rows"))

    missing = [c for c in spec.required_columns if c not in table.columns]
    checks.append(
        CheckResult("schema", not missing, f"missing columns: {missing}" if missing else "all columns present")
    )

    if "value" in table.columns:
        values = table.column("value")
        bad_finite = [v for v in values if not isinstance(v, (int, float)) or not math.isfinite(v)]
        checks.append(
            CheckResult(
                "finite",
                not bad_finite,
                f"{len(bad_finite)} non-finite values" if bad_finite else "all values finite",
            )
        )
        lo, hi = spec.physical_range
        numeric = [v for v in values if isinstance(v, (int, float)) and math.isfinite(v)]
        out = [v for v in numeric if not lo <= v <= hi]
        out_count = len(out) + len(bad_finite)
        checks.append(
            CheckResult(
                "range",
                out_count == 0,
                f"{out_count} values outside [{lo}, {hi}]" if out_count else "all values in range",
            )
        )
    else:
        checks.append(CheckResult("finite", False, "value column absent"))
        checks.append(CheckResult("range", False, "value column absent"))

    unit_ok = table.unit == spec.unit
    diag = f"table unit {table.unit!r} vs spec unit {spec.unit!r}"
    if unit_ok and "unit" in table.columns:
        rogue = [u for u in table.column("unit") if u != table.unit]
        if rogue:
            unit_ok = False
            diag = f"{len(rogue)} rows disagree with declared unit {table.unit!r}"
    checks.append(CheckResult("unit", unit_ok, diag))

    return ValidationReport(passed=all(c.passed for c in checks), checks=tuple(checks))


# ------------------------------------------------------------- HTTP client


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + f".tmp{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


class DatabaseClient:
    """REST client with a content-addressed on-disk response cache."""

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        cache_dir: str | Path | None = None,
        transport: httpx.BaseTransport | None = None,
        timeout: float = 30.0,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.cache_dir = Path(cache_dir) if cache_dir else None
        if self.cache_dir:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
        self._http = httpx.Client(
            base_url=self.base_url, transport=transport, timeout=timeout
        )
        self.network_calls = 0  # observable for cache-contract tests

    def close(self) -> None:
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _cache_path(self, path: str, params: dict) -> Path | None:
        if not self.cache_dir:
            return None
        canonical = path + "?" + "&".join(f"{k}={params[k]}" for k in sorted(params))
        digest = hashlib.sha256(canonical.encode()).hexdigest()
        return self.cache_dir / f"{digest}.json"

    def _get_json(self, path: str, params: dict):
        cache_path = self._cache_path(path, params)
        if cache_path and cache_path.exists():
            return json.loads(cache_path.read_text())
        if not self.api_key:
            raise AuthError(f"no API credential; set {API_KEY_ENV} or pass api_key")
        try:
            response = self._http.get(path, params=params, headers={"X-API-KEY": self.api_key})
            self.network_calls += 1
        except httpx.TransportError as exc:
            raise NetworkError(f"GET {path} failed: {exc}") from None
        if response.status_code in (401, 403):
            raise AuthError(f"GET {path} rejected with status {response.status_code}")
        if response.status_code != 200:
            raise NetworkError(f"GET {path} returned status {response.status_code}")
        try:
            payload = response.json()
        except (json.JSONDecodeError, ValueError) as exc:
            raise DecodeError(f"GET {path}: response is not JSON: {exc}") from None
        if cache_path:
            _atomic_write(cache_path, json.dumps(payload, sort_keys=True, separators=(",", ":")))
        return payload

    @staticmethod
    def _filter_params(elements: Iterable[str] | None, ids: Iterable[str] | None) -> dict:
        params = {}
        if elements:
            params["elements"] = ",".join(sorted(set(elements)))
        if ids:
            params["ids"] = ",".join(sorted(set(ids)))
        if not params:
            raise ValueError("filter must name at least one element or id")
        return params

    @staticmethod
    def _structure_from_entry(entry: dict, entry_id: str) -> Structure:
        cif_text = entry.get("cif")
        if not isinstance(cif_text, str):
            raise DecodeError(f"entry {entry_id!r} has no CIF payload")
        try:
            return parse_cif(cif_text).with_id(entry_id)
        except MatnavError as exc:
            raise DecodeError(f"entry {entry_id!r}: unparseable CIF: {exc}") from None

    def get_structures(
        self,
        elements: Iterable[str] | None = None,
        ids: Iterable[str] | None = None,
    ) -> list[tuple[str, Structure]]:
        params = self._filter_params(elements, ids)
        payload = self._get_json("/materials/structures", params)
        if not isinstance(payload, list):
            raise DecodeError("structures endpoint must return a JSON array")
        out = []
        for entry in payload:
            if not isinstance(entry, dict) or "id" not in entry:
                raise DecodeError("structure entry missing 'id'")
            entry_id = str(entry["id"])
            out.append((entry_id, self._structure_from_entry(entry, entry_id)))
        return out

    def get_elasticity(
        self, ids: Iterable[str] | None = None, elements: Iterable[str] | None = None
    ) -> list[tuple[str, ElasticTensor, Structure]]:
        """Entries lacking elasticity are skipped with a logged reason."""
        params = self._filter_params(elements, ids)
        payload = self._get_json("/materials/elasticity", params)
        if not isinstance(payload, list):
            raise DecodeError("elasticity endpoint must return a JSON array")
        out = []
        for entry in payload:
            if not isinstance(entry, dict) or "id" not in entry:
                raise DecodeError("elasticity entry missing 'id'")
            entry_id = str(entry["id"])
            raw = entry.get("elastic_tensor")
            if raw is None:
                log.info("skipping %s: no elasticity data", entry_id)
                continue
            tensor_arr = np.asarray(raw, dtype=object)
            if tensor_arr.shape != (6, 6):
                raise DecodeError(
                    f"entry {entry_id!r}: elastic tensor has shape {tensor_arr.shape}, want (6, 6)"
                )
            try:
                c = np.asarray(raw, dtype=float)
            except (TypeError, ValueError) as exc:
                raise DecodeError(f"entry {entry_id!r}: non-numeric tensor: {exc}") from None
            c = (c + c.T) / 2.0  # symmetrize on ingest
            try:
                tensor = ElasticTensor(c)
            except ValueError as exc:
                raise DecodeError(f"entry {entry_id!r}: invalid tensor: {exc}") from None
            out.append((entry_id, tensor, self._structure_from_entry(entry, entry_id)))
        return out


def db_get_structures(client: DatabaseClient, **filter_kwargs) -> list[tuple[str, Structure]]:
    return client.get_structures(**filter_kwargs)


def db_get_elasticity(client: DatabaseClient, **filter_kwargs):
    return client.get_elasticity(**filter_kwargs)


# --------------------------------------------------------------- Debye table


def derive_debye_table(
    client: DatabaseClient,
    ids: Iterable[str] | None = None,
    elements: Iterable[str] | None = None,
) -> PropertyTable:
    """Debye temperatures for every entry that has elasticity data."""
    rows = []
    for entry_id, tensor, structure in client.get_elasticity(ids=ids, elements=elements):
        theta = debye_from_tensor(structure, tensor)
        formula = format_formula(structure.composition())
        rows.append((entry_id, formula, theta, "K"))
    rows.sort(key=lambda r: r[0])
    return PropertyTable(columns=TABLE_COLUMNS, rows=tuple(rows), unit="K")


# -------------------------------------------------------------- repair loop


@dataclass(frozen=True)
class RoutineDescriptor:
    """A declarative retrieval routine: registry endpoint, call parameters,
    and a pipeline of named transform steps."""

    endpoint: str
    params: dict = field(default_factory=dict)
    transforms: tuple[tuple, ...] = ()


class RoutineSource:
    """Interface: propose a descriptor, seeing all prior diagnostics."""

    def produce(self, spec: PropertySpec, diagnostics: Sequence[str]) -> RoutineDescriptor:
        raise NotImplementedError


def _apply_transform(table: PropertyTable, step: tuple) -> PropertyTable:
    op, *args = step
    if op == "drop_missing":
        if "value" not in table.columns:
            return table
        idx = table.columns.index("value")
        kept = tuple(
            row
            for row in table.rows
            if isinstance(row[idx], (int, float)) and math.isfinite(row[idx])
        )
        return PropertyTable(table.columns, kept, table.unit)
    if op == "sort_rows":
        return PropertyTable(table.columns, tuple(sorted(table.rows)), table.unit)
    raise ValueError(f"unknown transform step {op!r}")


class RoutineRunner:
    """Interprets descriptors against a registry of named producers.

    Descriptors cannot contain code, so the only filesystem the routine can
    touch is the scratch directory handed to registered producers. A
    wall-clock deadline is enforced per attempt.
    """

    def __init__(
        self,
        registry: dict[str, Callable[[dict], PropertyTable]],
        timeout_s: float = DEFAULT_TIMEOUT_S,
    ) -> None:
        self.registry = dict(registry)
        self.timeout_s = timeout_s

    def run(self, descriptor: RoutineDescriptor) -> PropertyTable:
        producer = self.registry.get(descriptor.endpoint)
        if producer is None:
            raise ValueError(
                f"descriptor names unknown endpoint {descriptor.endpoint!r}; "
                f"known: {sorted(self.registry)}"
            )
        with ThreadPoolExecutor(max_workers=1) as pool:
            future = pool.submit(producer, dict(descriptor.params))
            try:
                table = future.result(timeout=self.timeout_s)
            except _FutureTimeout:
                future.cancel()
                raise Timeout(
                    f"routine {descriptor.endpoint!r} exceeded {self.timeout_s} s"
                ) from None
        if not isinstance(table, PropertyTable):
            raise ValueError(f"endpoint {descriptor.endpoint!r} did not return a PropertyTable")
        for step in descriptor.transforms:
            table = _apply_transform(table, step)
        return table


def _spec_cache_path(cache_dir: Path, spec: PropertySpec) -> Path:
    key = json.dumps(
        {
            "name": spec.name,
            "unit": spec.unit,
            "range": list(spec.physical_range),
            "columns": list(spec.required_columns),
        },
        sort_keys=True,
    )
    return cache_dir / f"table-{hashlib.sha256(key.encode()).hexdigest()}.json"


def fetch_with_repair(
    spec: PropertySpec,
    source: RoutineSource,
    runner: RoutineRunner,
    budget: int = DEFAULT_BUDGET,
    cache_dir: str | Path | None = None,
    telemetry: dict | None = None,
) -> PropertyTable:
    """Attempt, validate, feed diagnostics back, repeat up to `budget` times.

    A cached success for the same spec short-circuits with zero attempts.
    Raises BudgetExhausted carrying every accumulated diagnostic.
    """
    if budget < 1:
        raise ValueError(f"retry budget must be at least 1, got {budget}")
    cache_path = None
    if cache_dir is not None:
        cache_path = _spec_cache_path(Path(cache_dir), spec)
        if cache_path.exists():
            if telemetry is not None:
                telemetry.update(attempts=0, cache_hit=True)
            return PropertyTable.from_json(cache_path.read_text())

    diagnostics: list[str] = []
    for attempt in range(1, budget + 1):
        started = time.monotonic()
        try:
            descriptor = source.produce(spec, tuple(diagnostics))
            table = runner.run(descriptor)
        except Timeout as exc:
            diagnostics.append(f"attempt {attempt}: timeout: {exc}")
            continue
        except Exception:
            diagnostics.append(f"attempt {attempt}: execution error:\n{traceback.format_exc()}")
            continue
        report = validate_table(table, spec)
        if report.passed:
            if telemetry is not None:
                telemetry.update(attempts=attempt, cache_hit=False)
            log.info(
                "fetch for %s succeeded on attempt %d (%.3f s)",
                spec.name, attempt, time.monotonic() - started,
            )
            if cache_path is not None:
                cache_path.parent.mkdir(parents=True, exist_ok=True)
                _atomic_write(cache_path, table.to_json())
            return table
        failed = "; ".join(f"{c.name}: {c.diagnostic}" for c in report.failures())
        diagnostics.append(f"attempt {attempt}: validation failed: {failed}")

    if telemetry is not None:
        telemetry.update(attempts=budget, cache_hit=False)
    raise BudgetExhausted(
        f"no valid {spec.name!r} table after {budget} attempts", diagnostics
    )
