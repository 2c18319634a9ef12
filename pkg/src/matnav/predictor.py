"""Composition-feature regression for Debye temperature.

The prediction boundary is the small interface {fit, predict, save, load};
the reference implementation is a closed-form ridge regressor over
composition statistics. A line-delimited-JSON subprocess adapter admits an
external model without linking it. The baseline makes no accuracy claims
beyond what its own evaluation report states.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import subprocess
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import elements
from .core import Composition, atom_fractions, parse_formula, reduce_composition
from .errors import (
    DegenerateFeatures,
    EmptyTestSet,
    InsufficientData,
    SchemaMismatch,
)

__all__ = [
    "FEATURE_SCHEMA",
    "FEATURE_NAMES",
    "DatasetRow",
    "Dataset",
    "RegressionModel",
    "EvalReport",
    "featurize",
    "train",
    "predict",
    "predict_batch",
    "evaluate",
    "save_model",
    "load_model",
    "choose_lambda",
    "split_dataset",
    "dataset_to_csv",
    "dataset_from_csv",
    "RidgePredictor",
    "SubprocessPredictor",
]

log = logging.getLogger(__name__)

FEATURE_SCHEMA = "composition-stats-v1"

_PROPERTIES = (
    ("mass", elements.atomic_mass),
    ("radius", elements.covalent_radius),
    ("electronegativity", elements.electronegativity),
    ("group", lambda el: float(elements.group_number(el))),
    ("period", lambda el: float(elements.period(el))),
)
_STATS = ("mean", "min", "max", "std")

FEATURE_NAMES: tuple[str, ...] = tuple(
    f"{prop}_{stat}" for prop, _ in _PROPERTIES for stat in _STATS
) + ("n_elements",)

SOURCE_TAGS = ("literature", "derived", "estimated")
DEFAULT_LAMBDA = 1.0


def featurize(c: Composition) -> np.ndarray:
    """Fraction-weighted mean/min/max/std of five element properties plus
    the element count. Invariant under composition reduction."""
    fracs = atom_fractions(c)
    values = np.empty(len(FEATURE_NAMES))
    i = 0
    for _, getter in _PROPERTIES:
        per_el = np.array([getter(el) for el in c.elements])
        weights = np.array([fracs[el] for el in c.elements])
        mean = float(per_el @ weights)
        var = float(((per_el - mean) ** 2) @ weights)
        values[i : i + 4] = (mean, per_el.min(), per_el.max(), math.sqrt(max(var, 0.0)))
        i += 4
    values[i] = float(len(c))
    return values


@dataclass(frozen=True)
class DatasetRow:
    material_id: str
    formula: str
    features: np.ndarray
    label: float  # Theta_D, K
    source: str  # literature | derived | estimated

    def __post_init__(self):
        if not math.isfinite(self.label) or self.label <= 0:
            raise ValueError(f"label must be finite and positive, got {self.label}")
        if self.source not in SOURCE_TAGS:
            raise ValueError(f"source must be one of {SOURCE_TAGS}, got {self.source!r}")


@dataclass(frozen=True)
class Dataset:
    rows: tuple[DatasetRow, ...]

    def __post_init__(self):
        ids = [r.material_id for r in self.rows]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate material ids: {dupes}")

    def __len__(self):
        return len(self.rows)

    def features(self) -> np.ndarray:
        return np.array([r.features for r in self.rows])

    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.rows])

    def source_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for row in self.rows:
            counts[row.source] = counts.get(row.source, 0) + 1
        return counts


@dataclass(frozen=True)
class RegressionModel:
    """Standardized ridge fit; self-contained for prediction."""

    weights: np.ndarray  # over active (non-degenerate) features
    intercept: float
    lam: float
    schema: str
    feature_names: tuple[str, ...]
    active: tuple[int, ...]  # indices of retained feature columns
    mean: np.ndarray
    std: np.ndarray
    metadata: dict = field(compare=False, default_factory=dict)


@dataclass(frozen=True)
class EvalReport:
    rmse: float
    r2: float
    n_test: int


def train(dataset: Dataset, lam: float = DEFAULT_LAMBDA) -> RegressionModel:
    """Closed-form ridge on standardized features.

    The normal equations are divided by the row count, so duplicating every
    row leaves the solution unchanged. Zero-variance feature columns are
    dropped with a warning; if none survive, that is an error.
    """
    if lam < 0:
        raise ValueError(f"ridge strength must be non-negative, got {lam}")
    X = dataset.features()
    y = dataset.labels()
    n, dim = X.shape
    if n < dim + 1:
        raise InsufficientData(f"need at least {dim + 1} rows for {dim} features, got {n}")

    mean = X.mean(axis=0)
    std = X.std(axis=0)
    # relative tolerance: a constant column can carry ulp-level noise, and
    # standardizing by ~1e-15 would blow the gram matrix up
    tol = 1e-12 * np.maximum(1.0, np.abs(mean))
    active = tuple(int(i) for i in np.flatnonzero(std > tol))
    if not active:
        raise DegenerateFeatures("every feature column has zero variance")
    dropped = [FEATURE_NAMES[i] for i in range(dim) if i not in active]
    if dropped:
        log.warning("dropping zero-variance feature columns: %s", ", ".join(dropped))

    idx = list(active)
    Z = (X[:, idx] - mean[idx]) / std[idx]
    y_mean = float(y.mean())
    yc = y - y_mean
    k = len(idx)
    if lam == 0.0:
        weights, *_ = np.linalg.lstsq(Z, yc, rcond=None)
    else:
        gram = Z.T @ Z / n + lam * np.eye(k)
        rhs = Z.T @ yc / n
        weights = np.linalg.solve(gram, rhs)

    return RegressionModel(
        weights=weights,
        intercept=y_mean,
        lam=lam,
        schema=FEATURE_SCHEMA,
        feature_names=FEATURE_NAMES,
        active=active,
        mean=mean[idx],
        std=std[idx],
        metadata={"n_rows": n, "source_counts": dataset.source_counts()},
    )


def _check_schema(model: RegressionModel) -> None:
    if model.schema != FEATURE_SCHEMA:
        raise SchemaMismatch(
            f"model built for feature schema {model.schema!r}; this build speaks {FEATURE_SCHEMA!r}"
        )
    if model.feature_names != FEATURE_NAMES:
        raise SchemaMismatch("model feature names disagree with this build's schema")


def predict(model: RegressionModel, features: np.ndarray) -> float:
    _check_schema(model)
    f = np.asarray(features, dtype=float)
    if f.shape != (len(model.feature_names),):
        raise SchemaMismatch(
            f"feature vector has shape {f.shape}, schema wants ({len(model.feature_names)},)"
        )
    z = (f[list(model.active)] - model.mean) / model.std
    return float(z @ model.weights + model.intercept)


def predict_batch(model: RegressionModel, features: np.ndarray) -> np.ndarray:
    _check_schema(model)
    F = np.asarray(features, dtype=float)
    Z = (F[:, list(model.active)] - model.mean) / model.std
    return Z @ model.weights + model.intercept


def evaluate(model: RegressionModel, test: Dataset) -> EvalReport:
    """RMSE and R² (about the test-label mean) on a held-out set."""
    if len(test) == 0:
        raise EmptyTestSet("evaluation needs at least one test row")
    y = test.labels()
    yhat = predict_batch(model, test.features())
    sse = float(np.sum((y - yhat) ** 2))
    sst = float(np.sum((y - y.mean()) ** 2))
    rmse = math.sqrt(sse / len(test))
    if sst == 0.0:
        r2 = 1.0 if sse == 0.0 else float("-inf")
    else:
        r2 = 1.0 - sse / sst
    return EvalReport(rmse=rmse, r2=r2, n_test=len(test))


# ------------------------------------------------------------ persistence

MODEL_FORMAT_VERSION = 1


def save_model(model: RegressionModel, path: str | Path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "schema": model.schema,
        "feature_names": list(model.feature_names),
        "active": list(model.active),
        "weights": [float(w) for w in model.weights],
        "intercept": model.intercept,
        "lambda": model.lam,
        "standardization": {
            "mean": [float(v) for v in model.mean],
            "std": [float(v) for v in model.std],
        },
        "metadata": model.metadata,
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))


def load_model(path: str | Path) -> RegressionModel:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"model file is not valid JSON: {exc}") from None
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise SchemaMismatch(
            f"model file format_version {payload.get('format_version')!r}; "
            f"this build reads {MODEL_FORMAT_VERSION}"
        )
    model = RegressionModel(
        weights=np.array(payload["weights"]),
        intercept=float(payload["intercept"]),
        lam=float(payload["lambda"]),
        schema=payload["schema"],
        feature_names=tuple(payload["feature_names"]),
        active=tuple(payload["active"]),
        mean=np.array(payload["standardization"]["mean"]),
        std=np.array(payload["standardization"]["std"]),
        metadata=payload.get("metadata", {}),
    )
    _check_schema(model)
    return model


# ------------------------------------------------------------- utilities


def split_dataset(dataset: Dataset, test_fraction: float = 0.2, seed: int = 0):
    """Seeded shuffle split; returns (train, test)."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, 0xD5))))
    order = rng.permutation(len(dataset))
    n_test = max(1, int(round(len(dataset) * test_fraction)))
    test_idx = set(int(i) for i in order[:n_test])
    train_rows = tuple(r for i, r in enumerate(dataset.rows) if i not in test_idx)
    test_rows = tuple(r for i, r in enumerate(dataset.rows) if i in test_idx)
    return Dataset(train_rows), Dataset(test_rows)


def choose_lambda(
    dataset: Dataset,
    grid: Sequence[float] = (0.01, 0.1, 1.0, 10.0, 100.0),
    folds: int = 5,
    seed: int = 0,
) -> float:
    """Pick the grid value with the lowest mean cross-validated RMSE."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, 0xCF))))
    order = rng.permutation(len(dataset))
    fold_ids = np.array([int(i % folds) for i in range(len(dataset))])[np.argsort(order)]
    best_lam, best_rmse = None, math.inf
    for lam in grid:
        errors = []
        for fold in range(folds):
            train_rows = tuple(r for r, f in zip(dataset.rows, fold_ids) if f != fold)
            test_rows = tuple(r for r, f in zip(dataset.rows, fold_ids) if f == fold)
            if not test_rows or len(train_rows) < len(FEATURE_NAMES) + 1:
                continue
            report = evaluate(train(Dataset(train_rows), lam), Dataset(test_rows))
            errors.append(report.rmse)
        if errors and float(np.mean(errors)) < best_rmse:
            best_lam, best_rmse = lam, float(np.mean(errors))
    if best_lam is None:
        raise InsufficientData("dataset too small for cross-validation at these fold counts")
    return best_lam


DATASET_HEADER = ("material_id", "formula", "theta_d_K", "source")


def dataset_to_csv(dataset: Dataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(DATASET_HEADER)
    for row in dataset.rows:
        writer.writerow([row.material_id, row.formula, repr(float(row.label)), row.source])
    return buf.getvalue()


def dataset_from_csv(text: str) -> Dataset:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != DATASET_HEADER:
        raise ValueError(f"dataset CSV must start with header {','.join(DATASET_HEADER)}")
    rows = []
    for record in reader:
        if not record:
            continue
        material_id, formula, theta, source = record
        composition = reduce_composition(parse_formula(formula))
        rows.append(
            DatasetRow(
                material_id=material_id,
                formula=formula,
                features=featurize(composition),
                label=float(theta),
                source=source,
            )
        )
    return Dataset(tuple(rows))


# ------------------------------------------------------------- interfaces


class RidgePredictor:
    """Reference implementation of the predictor interface."""

    def __init__(self, lam: float = DEFAULT_LAMBDA):
        self.lam = lam
        self.model: RegressionModel | None = None

    def fit(self, dataset: Dataset) -> None:
        self.model = train(dataset, self.lam)

    def predict(self, c: Composition) -> float:
        if self.model is None:
            raise InsufficientData("predictor has not been fitted")
        return predict(self.model, featurize(c))

    def save(self, path: str | Path) -> None:
        if self.model is None:
            raise InsufficientData("predictor has not been fitted")
        save_model(self.model, path)

    def load(self, path: str | Path) -> None:
        self.model = load_model(path)


class SubprocessPredictor:
    """Adapter for an external model over line-delimited JSON on stdio.

    Protocol: one request object per line, {"op": "predict",
    "formula": str, "features": [float, ...]}; the process answers one
    line {"theta_d": float} (or {"error": str}).
    """

    def __init__(self, argv: Sequence[str]):
        self._proc = subprocess.Popen(
            list(argv),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def predict(self, c: Composition) -> float:
        from .core import format_formula

        request = {
            "op": "predict",
            "formula": format_formula(c),
            "features": [float(v) for v in featurize(c)],
        }
        assert self._proc.stdin and self._proc.stdout
        self._proc.stdin.write(json.dumps(request) + "\n")
        self._proc.stdin.flush()
        line = self._proc.stdout.readline()
        if not line:
            raise SchemaMismatch("external predictor closed its stdout")
        answer = json.loads(line)
        if "error" in answer:
            raise SchemaMismatch(f"external predictor error: {answer['error']}")
        return float(answer["theta_d"])

    def close(self) -> None:
        if self._proc.stdin:
            self._proc.stdin.close()
        self._proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
