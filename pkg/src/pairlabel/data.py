"""Multi-label dataset model, ingestion, splitting and characteristics."""

from __future__ import annotations

import json
import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ArgumentError,
    DomainValueError,
    GenerationError,
    ParseError,
    SchemaError,
    StatsError,
)


@dataclass(frozen=True)
class MultiLabelDataset:
    """N feature vectors paired with N binary label vectors.

    ``features`` is an (N, d) float matrix, ``labels`` an (N, L) 0/1 matrix.
    Instances are immutable after construction.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    label_names: tuple[str, ...]

    def __post_init__(self):
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=float))
        labs = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int8))
        if feats.ndim != 2 or labs.ndim != 2:
            raise ArgumentError("features and labels must be 2-d matrices")
        if feats.shape[0] != labs.shape[0]:
            raise ArgumentError("features and labels disagree on instance count")
        if feats.shape[0] < 1:
            raise ArgumentError("dataset needs at least one instance")
        if labs.shape[1] < 2:
            raise ArgumentError("dataset needs at least two labels")
        if feats.shape[1] < 1:
            raise ArgumentError("dataset needs at least one feature")
        if not np.isin(labs, (0, 1)).all():
            raise ArgumentError("labels must contain only 0/1 entries")
        if len(self.feature_names) != feats.shape[1]:
            raise ArgumentError("feature_names length mismatch")
        if len(self.label_names) != labs.shape[1]:
            raise ArgumentError("label_names length mismatch")
        feats.setflags(write=False)
        labs.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "label_names", tuple(self.label_names))

    @property
    def n_instances(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_labels(self) -> int:
        return self.labels.shape[1]

    def subset(self, indices) -> "MultiLabelDataset":
        idx = np.asarray(indices, dtype=int)
        return MultiLabelDataset(
            self.features[idx], self.labels[idx], self.feature_names, self.label_names
        )


@dataclass(frozen=True)
class SplitResult:
    """A disjoint train/validation partition of a dataset."""

    train: MultiLabelDataset
    validation: MultiLabelDataset
    t: float
    train_indices: np.ndarray = field(repr=False)
    validation_indices: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class DatasetStats:
    """Label cardinality, label density and average imbalance ratio."""

    label_cardinality: float
    label_density: float
    avg_imbalance_ratio: float


_ATTR_RE = re.compile(r"@attribute\s+('(?:[^']*)'|\S+)\s+(.+)", re.IGNORECASE)


def _attr_name(raw: str) -> str:
    raw = raw.strip()
    if raw.startswith("'") and raw.endswith("'"):
        return raw[1:-1]
    return raw


def parse_arff(text: str, label_names: list[str]) -> MultiLabelDataset:
    """Parse a dense ARFF document into a dataset.

    Attributes named in ``label_names`` become the label matrix (in that
    order); remaining numeric attributes become features and nominal
    non-label attributes are one-hot expanded. Sparse ARFF and missing
    values ('?') are rejected.
    """
    attrs: list[tuple[str, object]] = []  # (name, "numeric" | tuple of categories)
    data_rows: list[tuple[int, list[str]]] = []
    in_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if not in_data:
            low = line.lower()
            if low.startswith("@relation"):
                continue
            if low.startswith("@attribute"):
                m = _ATTR_RE.match(line)
                if m is None:
                    raise ParseError("malformed @attribute declaration", line=lineno)
                name = _attr_name(m.group(1))
                typ = m.group(2).strip()
                if typ.startswith("{"):
                    if not typ.endswith("}"):
                        raise ParseError("unterminated nominal domain", line=lineno)
                    cats = tuple(c.strip().strip("'") for c in typ[1:-1].split(","))
                    attrs.append((name, cats))
                elif typ.lower() in ("numeric", "real", "integer"):
                    attrs.append((name, "numeric"))
                else:
                    raise ParseError(f"unsupported attribute type '{typ}'", line=lineno)
            elif low.startswith("@data"):
                in_data = True
            else:
                raise ParseError(f"unexpected header line '{line}'", line=lineno)
        else:
            if line.startswith("{"):
                raise ParseError("sparse ARFF rows are not supported", line=lineno)
            values = [v.strip() for v in line.split(",")]
            if len(values) != len(attrs):
                raise ParseError(
                    f"expected {len(attrs)} values, got {len(values)}", line=lineno
                )
            data_rows.append((lineno, values))

    if not in_data:
        raise ParseError("missing @data section")
    if not data_rows:
        raise ParseError("empty @data section")

    attr_names = [a[0] for a in attrs]
    label_set = set(label_names)
    for lbl in label_names:
        if lbl not in attr_names:
            raise SchemaError(f"label attribute '{lbl}' not found in header")
        typ = attrs[attr_names.index(lbl)][1]
        if typ != "numeric" and not set(typ) <= {"0", "1"}:
            raise SchemaError(f"label attribute '{lbl}' has non-binary domain {typ}")

    feature_names: list[str] = []
    for name, typ in attrs:
        if name in label_set:
            continue
        if typ == "numeric":
            feature_names.append(name)
        else:
            feature_names.extend(f"{name}={cat}" for cat in typ)

    n = len(data_rows)
    features = np.zeros((n, len(feature_names)), dtype=float)
    labels = np.zeros((n, len(label_names)), dtype=np.int8)
    label_pos = {lbl: j for j, lbl in enumerate(label_names)}

    for i, (lineno, values) in enumerate(data_rows):
        col = 0
        for (name, typ), value in zip(attrs, values):
            if value == "?":
                raise ParseError("missing values ('?') are not supported", line=lineno)
            if name in label_set:
                if value not in ("0", "1"):
                    raise DomainValueError(
                        f"line {lineno}: label '{name}' value '{value}' outside {{0,1}}"
                    )
                labels[i, label_pos[name]] = int(value)
            elif typ == "numeric":
                try:
                    features[i, col] = float(value)
                except ValueError:
                    raise ParseError(
                        f"non-numeric value '{value}' in attribute '{name}'",
                        line=lineno,
                    ) from None
                col += 1
            else:
                cat = value.strip("'")
                if cat not in typ:
                    raise ParseError(
                        f"value '{value}' not in domain of '{name}'", line=lineno
                    )
                for c in typ:
                    features[i, col] = 1.0 if c == cat else 0.0
                    col += 1

    return MultiLabelDataset(features, labels, tuple(feature_names), tuple(label_names))


def to_arff(ds: MultiLabelDataset, relation: str = "dataset") -> str:
    """Serialize a dataset to dense ARFF; inverse of :func:`parse_arff`."""
    lines = [f"@relation {relation}", ""]
    for name in ds.feature_names:
        lines.append(f"@attribute '{name}' numeric")
    for name in ds.label_names:
        lines.append(f"@attribute '{name}' {{0,1}}")
    lines.append("")
    lines.append("@data")
    for i in range(ds.n_instances):
        feats = ",".join(format(v, ".17g") for v in ds.features[i])
        labs = ",".join(str(int(v)) for v in ds.labels[i])
        lines.append(f"{feats},{labs}")
    return "\n".join(lines) + "\n"


def parse_label_xml(text: str) -> list[str]:
    """Read label names (in document order) from a flat label-manifest XML."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ParseError(f"malformed XML: {exc}") from exc
    names = [child.attrib["name"] for child in root if "name" in child.attrib]
    if len(names) < 2:
        raise SchemaError(f"label manifest declares {len(names)} labels, need >= 2")
    return names


def dataset_to_json(ds: MultiLabelDataset) -> str:
    """JSON serialization for caching (row-major matrices plus names)."""
    return json.dumps(
        {
            "features": ds.features.tolist(),
            "labels": ds.labels.astype(int).tolist(),
            "feature_names": list(ds.feature_names),
            "label_names": list(ds.label_names),
        }
    )


def dataset_from_json(text: str) -> MultiLabelDataset:
    obj = json.loads(text)
    return MultiLabelDataset(
        np.asarray(obj["features"], dtype=float),
        np.asarray(obj["labels"]),
        tuple(obj["feature_names"]),
        tuple(obj["label_names"]),
    )


def split_train_validation(ds: MultiLabelDataset, t: float, seed: int) -> SplitResult:
    """Uniform random split into |train| = round(t*N) and the remainder."""
    if not 0.0 < t < 1.0:
        raise ArgumentError(f"t must lie in (0,1), got {t}")
    n = ds.n_instances
    if n < 2:
        raise ArgumentError("need at least 2 instances to split")
    n_train = int(math.floor(t * n + 0.5))
    if n_train == 0 or n_train == n:
        raise ArgumentError(f"t={t} leaves an empty part for N={n}")
    perm = np.random.default_rng(seed).permutation(n)
    train_idx = np.sort(perm[:n_train])
    val_idx = np.sort(perm[n_train:])
    return SplitResult(
        train=ds.subset(train_idx),
        validation=ds.subset(val_idx),
        t=t,
        train_indices=train_idx,
        validation_indices=val_idx,
    )


def kfold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """k disjoint index folds covering 0..n-1 with sizes differing by <= 1."""
    if k < 2 or k > n:
        raise ArgumentError(f"need 2 <= k <= N, got k={k}, N={n}")
    perm = np.random.default_rng(seed).permutation(n)
    base, extra = divmod(n, k)
    folds = []
    start = 0
    for j in range(k):
        size = base + (1 if j < extra else 0)
        folds.append(np.sort(perm[start : start + size]))
        start += size
    return folds


# Mixture geometry for the synthetic generator: a handful of tight
# clusters keeps distances locally resolvable, which is the regime the
# neighborhood-based correction is designed for.
_MIXTURE_COMPONENTS = 4
_MIXTURE_SCALE = 0.2


def generate_synthetic(
    n: int, n_labels: int, n_features: int, noise: float, seed: int
) -> MultiLabelDataset:
    """Seeded generator: labels are noisy random-hyperplane indicators.

    Features come from a Gaussian mixture (a few tight clusters), so that
    classifier competence varies across feature-space regions. Each label
    is 1 iff a fixed random affine hyperplane over the features is
    positive, then flipped with probability ``noise``. Retries with
    seed-derived draws until every label occurs at least once.
    """
    if n < 10:
        raise ArgumentError("n must be >= 10")
    if n_labels < 2:
        raise ArgumentError("need at least 2 labels")
    if n_features < n_labels:
        raise ArgumentError("need n_features >= n_labels")
    if not 0.0 <= noise < 0.5:
        raise ArgumentError("noise must lie in [0, 0.5)")

    for attempt in range(64):
        rng = np.random.default_rng([seed, attempt])
        centers = rng.standard_normal((_MIXTURE_COMPONENTS, n_features))
        assign = rng.choice(_MIXTURE_COMPONENTS, n)
        feats = centers[assign] + _MIXTURE_SCALE * rng.standard_normal((n, n_features))
        planes = rng.standard_normal((n_labels, n_features))
        planes /= np.linalg.norm(planes, axis=1, keepdims=True)
        offsets = rng.uniform(-0.5, 0.5, size=n_labels)
        labels = (feats @ planes.T + offsets > 0).astype(np.int8)
        if noise > 0:
            flips = rng.random((n, n_labels)) < noise
            labels = np.where(flips, 1 - labels, labels).astype(np.int8)
        if labels.sum(axis=0).min() >= 1:
            return MultiLabelDataset(
                feats,
                labels,
                tuple(f"feat_{j + 1}" for j in range(n_features)),
                tuple(f"label_{j + 1}" for j in range(n_labels)),
            )
    raise GenerationError("could not generate a dataset where every label occurs")


def compute_stats(ds: MultiLabelDataset) -> DatasetStats:
    """Label cardinality, density and mean imbalance ratio of a dataset."""
    freqs = ds.labels.sum(axis=0).astype(float)
    for j, f in enumerate(freqs):
        if f == 0:
            raise StatsError(f"label '{ds.label_names[j]}' never occurs")
    lc = float(ds.labels.sum() / ds.n_instances)
    ld = lc / ds.n_labels
    avir = float(np.mean(freqs.max() / freqs))
    return DatasetStats(label_cardinality=lc, label_density=ld, avg_imbalance_ratio=avir)


def fit_scaler(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature mean/std for z-scoring; zero stds are replaced by 1."""
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    std = np.where(std < 1e-12, 1.0, std)
    return mean, std


def apply_scaler(features: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    return (np.asarray(features, dtype=float) - mean) / std
