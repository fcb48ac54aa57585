"""Base clusterings, pools of base clusterings, and labelled datasets.

A base clustering is stored as a :class:`Partition` (one integer label per
sample).  A :class:`Pool` is the ensemble of ``m`` partitions over the same
``n`` samples.  Pools can be read from / written to a plain CSV layout
(``n`` rows by ``m`` integer columns, no header) or generated from raw
features by repeated k-means runs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed
from sklearn.cluster import KMeans

__all__ = [
    "Partition",
    "Pool",
    "Dataset",
    "compact",
    "load_dataset",
    "load_pool",
    "save_pool",
    "generate_pool",
    "default_k_range",
    "derive_seed",
    "zscore",
]


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 32-bit child seed for stream ``keys`` under ``seed``."""
    ss = np.random.SeedSequence([int(seed), *map(int, keys)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


@dataclass(frozen=True)
class Partition:
    """One clustering of ``n`` samples.

    ``labels`` must be non-negative integers.  ``num_clusters`` defaults to
    ``max(labels) + 1``; use :func:`compact` to guarantee that every id in
    ``range(num_clusters)`` is actually used.
    """

    labels: np.ndarray
    num_clusters: int = -1

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.size < 1:
            raise ValueError("partition labels must be a non-empty 1-D vector")
        if labels.dtype.kind not in "iub":
            if labels.dtype.kind == "f" and np.all(np.isfinite(labels)) and np.all(labels == np.round(labels)):
                labels = labels.astype(np.int64)
            else:
                raise ValueError("partition labels must be integers")
        labels = labels.astype(np.int64, copy=True)
        if labels.min() < 0:
            raise ValueError("partition labels must be non-negative")
        k = int(labels.max()) + 1 if self.num_clusters < 0 else int(self.num_clusters)
        if labels.max() >= k:
            raise ValueError(f"label {labels.max()} out of range for {k} clusters")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "num_clusters", k)

    @property
    def n(self) -> int:
        return self.labels.size

    def __len__(self) -> int:
        return self.labels.size

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.num_clusters == other.num_clusters and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash((self.num_clusters, self.labels.tobytes()))


def compact(p: Union[Partition, Sequence[int], np.ndarray]) -> Partition:
    """Relabel to ``0..k-1`` in order of first occurrence.

    >>> compact([2, 0, 2, 1]).labels.tolist()
    [0, 1, 0, 2]
    """
    raw = p.labels if isinstance(p, Partition) else np.asarray(p)
    if raw.ndim != 1 or raw.size < 1:
        raise ValueError("partition labels must be a non-empty 1-D vector")
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    # rank of each unique value by first-occurrence position
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    return Partition(rank[inverse.ravel()], first.size)


@dataclass(frozen=True)
class Pool:
    """Ensemble of base clusterings over the same samples."""

    partitions: tuple

    def __post_init__(self):
        parts = tuple(p if isinstance(p, Partition) else Partition(np.asarray(p)) for p in self.partitions)
        if not parts:
            raise ValueError("a pool needs at least one partition")
        n = parts[0].n
        if any(p.n != n for p in parts):
            raise ValueError("all partitions in a pool must have the same length")
        object.__setattr__(self, "partitions", parts)

    @property
    def m(self) -> int:
        return len(self.partitions)

    @property
    def n(self) -> int:
        return self.partitions[0].n

    def __len__(self) -> int:
        return len(self.partitions)

    def __iter__(self):
        return iter(self.partitions)

    def __getitem__(self, t):
        return self.partitions[t]

    def label_matrix(self) -> np.ndarray:
        """``n x m`` integer matrix, column ``t`` holding partition ``t``."""
        return np.column_stack([p.labels for p in self.partitions])

    @classmethod
    def from_label_matrix(cls, labels: np.ndarray) -> "Pool":
        labels = np.asarray(labels)
        if labels.ndim == 1:
            labels = labels[:, None]
        return cls(tuple(compact(labels[:, t]) for t in range(labels.shape[1])))


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    truth: Optional[Partition] = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        x = np.array(self.features, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError("features must be an n x d matrix")
        if x.shape[0] < 2 or x.shape[1] < 1:
            raise ValueError(f"need n >= 2 samples and d >= 1 features, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("features contain non-finite values")
        x.setflags(write=False)
        object.__setattr__(self, "features", x)
        if self.truth is not None:
            truth = compact(self.truth)
            if truth.n != x.shape[0]:
                raise ValueError("truth length does not match number of samples")
            object.__setattr__(self, "truth", truth)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, index) -> "Dataset":
        truth = None if self.truth is None else compact(self.truth.labels[index])
        return Dataset(self.features[index], truth, self.name)


def zscore(data: Dataset) -> Dataset:
    """Column-wise standardisation; constant columns are only centred."""
    x = data.features
    sd = x.std(axis=0)
    sd[sd == 0] = 1.0
    return Dataset((x - x.mean(axis=0)) / sd, data.truth, data.name)


def _read_rows(path: Path, delimiter: Optional[str]) -> list:
    text = path.read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file")
    if delimiter is None:
        delimiter = "," if "," in lines[0] else " "
    if delimiter == " ":
        return [ln.split() for ln in lines]
    return [[c.strip() for c in row] for row in csv.reader(lines, delimiter=delimiter)]


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_dataset(
    path,
    label_column: Union[int, str, None] = None,
    header: Optional[bool] = None,
    delimiter: Optional[str] = None,
) -> Dataset:
    """Read a feature table, one sample per row.

    Parameters
    ----------
    path : path-like
        CSV file.  Whitespace-separated files (e.g. the UCI ``.txt``
        layout) are accepted when ``delimiter`` is left as ``None`` and the
        first line has no comma.
    label_column : int or str, optional
        Column holding ground-truth labels.  Negative indices count from
        the end; a string selects by header name.  Labels may be arbitrary
        strings and are compacted to ``0..k-1``.
    header : bool, optional
        Whether the first row is a header.  ``None`` guesses: a header is
        assumed when ``label_column`` is a name or when no cell of the
        first row parses as a number.
    """
    path = Path(path)
    rows = _read_rows(path, delimiter)
    if header is None:
        header = isinstance(label_column, str) or (
            len(rows) > 1 and not any(_is_number(c) for c in rows[0])
        )
    names = rows[0] if header else None
    body = rows[1:] if header else rows
    if not body:
        raise ValueError(f"{path}: no data rows")
    width = len(body[0])
    for i, row in enumerate(body):
        if len(row) != width:
            raise ValueError(f"{path}: row {i + 1} has {len(row)} cells, expected {width}")

    col = None
    if label_column is not None:
        if isinstance(label_column, str):
            if names is None or label_column not in names:
                raise ValueError(f"{path}: no column named {label_column!r}")
            col = names.index(label_column)
        else:
            col = int(label_column)
            if not -width <= col < width:
                raise ValueError(f"{path}: label column {label_column} out of range")
            col %= width

    feature_cols = [j for j in range(width) if j != col]
    if not feature_cols:
        raise ValueError(f"{path}: no feature columns")
    x = np.empty((len(body), len(feature_cols)))
    for i, row in enumerate(body):
        for jj, j in enumerate(feature_cols):
            try:
                x[i, jj] = float(row[j])
            except ValueError:
                raise ValueError(f"{path}: non-numeric feature cell {row[j]!r} at row {i + 1}, column {j}") from None

    truth = None
    if col is not None:
        raw = [row[col] for row in body]
        # numeric labels keep numeric identity ("1" and "1.0" are the same class)
        if all(_is_number(c) for c in raw):
            raw = [float(c) for c in raw]
        _, inverse = np.unique(np.array(raw, dtype=object if isinstance(raw[0], str) else float), return_inverse=True)
        truth = compact(inverse.ravel())
    return Dataset(x, truth, path.stem)


def load_pool(path) -> Pool:
    """Read an ``n x m`` integer CSV (no header); column ``t`` is partition ``t``."""
    path = Path(path)
    rows = _read_rows(path, ",")
    width = len(rows[0])
    out = np.empty((len(rows), width), dtype=np.int64)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"{path}: ragged row {i + 1} ({len(row)} cells, expected {width})")
        for j, cell in enumerate(row):
            try:
                out[i, j] = int(cell)
            except ValueError:
                raise ValueError(f"{path}: non-integer cell {cell!r} at row {i + 1}, column {j}") from None
    return Pool.from_label_matrix(out)


def save_pool(pool: Pool, path) -> None:
    labels = pool.label_matrix()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(labels.tolist())


def default_k_range(n: int, k_true: Optional[int] = None) -> tuple:
    root = math.ceil(math.sqrt(n))
    if k_true is None:
        return (2, max(2, root))
    k_hi = min(root, 10 * k_true)
    return (k_true, max(k_true, k_hi))


def _kmeans_member(x: np.ndarray, k: int, seed: int, max_iter: int, tol: float) -> np.ndarray:
    km = KMeans(n_clusters=k, init="k-means++", n_init=1, max_iter=max_iter, tol=tol, random_state=seed)
    return km.fit_predict(x)


def generate_pool(
    data: Dataset,
    m: int,
    k_range: Optional[Sequence[int]] = None,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-6,
    n_jobs: Optional[int] = None,
) -> Pool:
    """Build ``m`` base clusterings by single-restart k-means runs.

    Member ``t`` draws its cluster count uniformly from ``k_range``
    (inclusive) and its k-means++ seed from an RNG stream derived from
    ``(seed, t)``, so the pool does not depend on ``n_jobs``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if k_range is None:
        k_range = default_k_range(data.n, None if data.truth is None else data.truth.num_clusters)
    k_lo, k_hi = int(k_range[0]), int(k_range[1])
    if not 2 <= k_lo <= k_hi:
        raise ValueError(f"invalid k_range {k_range}: need 2 <= k_lo <= k_hi")
    if k_hi > data.n:
        raise ValueError(f"k_hi={k_hi} exceeds sample count {data.n}")

    jobs = []
    for t in range(m):
        rng = np.random.default_rng(derive_seed(seed, t))
        k = int(rng.integers(k_lo, k_hi + 1))
        jobs.append((k, int(rng.integers(2**31 - 1))))
    if n_jobs in (None, 1):
        labels = [_kmeans_member(data.features, k, s, max_iter, tol) for k, s in jobs]
    else:
        labels = Parallel(n_jobs=n_jobs)(
            delayed(_kmeans_member)(data.features, k, s, max_iter, tol) for k, s in jobs
        )
    return Pool(tuple(compact(lab) for lab in labels))
