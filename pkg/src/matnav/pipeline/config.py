"""Run configuration: one JSON document driving all three stages.

The config round-trips losslessly through its file format, and the run id
is the content hash of the canonical serialization, so identical configs
always land in identically named, byte-identical run directories.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..structgen import GenConfig

__all__ = [
    "EvidenceParams",
    "PredictorParams",
    "StabilityParams",
    "DataPaths",
    "ServiceParams",
    "RunConfig",
    "load_config",
    "RUN_ROOT_ENV",
]

RUN_ROOT_ENV = "MKNA_RUN_ROOT"


@dataclass(frozen=True)
class EvidenceParams:
    window: int = 500
    overlap: int = 100
    top_k: int = 100
    batch_size: int = 5
    rounding: float = 50.0
    min_records: int = 10
    embed_dim: int = 512

    def __post_init__(self):
        if not 0 <= self.overlap < self.window:
            raise ValueError(f"need 0 <= overlap < window, got {self.overlap}/{self.window}")
        if self.top_k < 1 or self.batch_size < 1 or self.embed_dim < 1:
            raise ValueError("top_k, batch_size, and embed_dim must be positive")
        if self.rounding < 0 or self.min_records < 1:
            raise ValueError("rounding must be >= 0 and min_records >= 1")


@dataclass(frozen=True)
class PredictorParams:
    ridge_lambda: float = 1.0
    test_fraction: float = 0.2
    split_seed: int = 0

    def __post_init__(self):
        if self.ridge_lambda < 0:
            raise ValueError(f"ridge_lambda must be >= 0, got {self.ridge_lambda}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")


@dataclass(frozen=True)
class StabilityParams:
    threshold: float = 0.05  # eV/atom, strict "<"
    energy_k_chi: float = 1.5
    energy_k_radius: float = 1.0

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")


@dataclass(frozen=True)
class DataPaths:
    """Input locations; relative paths resolve against the config file dir."""

    corpus_dir: str = "corpus"
    references_csv: str = "reference_phases.csv"
    db_base_url: str = "http://stub.local"
    db_stub_file: str | None = None  # JSON served in-process when set
    db_cache_dir: str | None = "db_cache"  # None disables response/table caching
    db_api_key: str | None = None  # deployments should prefer MKNA_DB_KEY
    db_elements: tuple[str, ...] = ()
    prototype_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class ServiceParams:
    host: str = "127.0.0.1"
    port: int = 8470


@dataclass(frozen=True)
class RunConfig:
    query: str = "materials with a high Debye temperature"
    evidence: EvidenceParams = field(default_factory=EvidenceParams)
    generation: GenConfig = field(default_factory=GenConfig)
    predictor: PredictorParams = field(default_factory=PredictorParams)
    stability: StabilityParams = field(default_factory=StabilityParams)
    data: DataPaths = field(default_factory=DataPaths)
    service: ServiceParams = field(default_factory=ServiceParams)

    def to_dict(self) -> dict:
        obj = asdict(self)
        obj["generation"]["supercell"] = list(self.generation.supercell)
        obj["data"]["db_elements"] = list(self.data.db_elements)
        obj["data"]["prototype_ids"] = list(self.data.prototype_ids)
        return obj

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        known = {
            "query",
            "evidence",
            "generation",
            "predictor",
            "stability",
            "data",
            "service",
        }
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")

        def build(factory, section, **fixups):
            data = dict(obj.get(section, {}))
            for key, fn in fixups.items():
                if key in data:
                    data[key] = fn(data[key])
            return factory(**data)

        return cls(
            query=obj.get("query", cls.query),
            evidence=build(EvidenceParams, "evidence"),
            generation=build(GenConfig, "generation", supercell=tuple),
            predictor=build(PredictorParams, "predictor"),
            stability=build(StabilityParams, "stability"),
            data=build(DataPaths, "data", db_elements=tuple, prototype_ids=tuple),
            service=build(ServiceParams, "service"),
        )

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    def run_id(self) -> str:
        digest = hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()
        ).hexdigest()
        return f"run-{digest[:12]}"

    def with_seed(self, seed: int) -> "RunConfig":
        from dataclasses import replace

        return replace(self, generation=replace(self.generation, seed=seed))


def load_config(path: str | Path) -> tuple[RunConfig, Path]:
    """Read a config file; returns (config, base dir for relative paths)."""
    p = Path(path)
    cfg = RunConfig.from_json(p.read_text())
    return cfg, p.parent.resolve()


def resolve_path(base: Path, value: str) -> Path:
    candidate = Path(value)
    return candidate if candidate.is_absolute() else (base / candidate)
