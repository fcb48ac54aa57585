"""Co-association matrices and degree-normalised partition kernels.

All matrices are dense ``float64`` ``n x n`` arrays.  Weight vectors are
plain 1-D arrays on the probability simplex.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .partitions import Partition, Pool

__all__ = [
    "similarity_of",
    "normalize",
    "partition_kernel",
    "ca_matrix",
    "weighted_kernel",
    "uniform_weights",
    "check_simplex",
    "mirror_upper",
    "save_matrix_csv",
    "load_matrix_csv",
    "save_matrix_bin",
    "load_matrix_bin",
]

ClusterWeight = Union[Callable[[int], float], Sequence[float], np.ndarray, None]


def mirror_upper(a: np.ndarray) -> np.ndarray:
    """Copy the upper triangle onto the lower one (exact symmetry)."""
    a = np.array(a, dtype=np.float64)
    il = np.tril_indices(a.shape[0], -1)
    a[il] = a.T[il]
    return a


def similarity_of(p: Partition, cluster_weight: ClusterWeight = None) -> np.ndarray:
    """Co-membership indicator matrix of one partition.

    ``cluster_weight`` optionally scales the block of each cluster (a
    callable ``cluster_id -> multiplier`` or an array indexed by cluster id);
    it is the plug-in point for locally weighted co-association schemes.
    The default gives the plain 0/1 matrix.
    """
    labels = p.labels
    a = (labels[:, None] == labels[None, :]).astype(np.float64)
    if cluster_weight is not None:
        if callable(cluster_weight):
            mult = np.array([float(cluster_weight(c)) for c in range(p.num_clusters)])
        else:
            mult = np.asarray(cluster_weight, dtype=np.float64)
            if mult.shape != (p.num_clusters,):
                raise ValueError(f"cluster_weight needs {p.num_clusters} entries, got {mult.shape}")
        a *= mult[labels][:, None]
    return a


def normalize(a: np.ndarray) -> np.ndarray:
    """Degree normalisation ``D^{-1/2} A D^{-1/2}`` with ``D = diag(A 1)``."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    deg = a.sum(axis=1)
    if np.any(deg <= 0):
        raise ValueError("cannot degree-normalise: a row sum is not strictly positive")
    r = 1.0 / np.sqrt(deg)
    # outer(r, r) is exactly symmetric, so the product keeps A's symmetry
    return a * np.outer(r, r)


def partition_kernel(p: Partition, cluster_weight: ClusterWeight = None) -> np.ndarray:
    return normalize(similarity_of(p, cluster_weight))


def ca_matrix(pool: Pool, normalized: bool = True, cluster_weight: ClusterWeight = None) -> np.ndarray:
    """Average (normalised) similarity over the pool, summed in index order."""
    out = np.zeros((pool.n, pool.n))
    for p in pool:
        s = similarity_of(p, cluster_weight)
        out += normalize(s) if normalized else s
    out /= pool.m
    return out


def uniform_weights(m: int) -> np.ndarray:
    return np.full(m, 1.0 / m)


def check_simplex(w, atol: float = 1e-12) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size < 1:
        raise ValueError("weights must be a non-empty vector")
    if np.any(w < 0) or abs(w.sum() - 1.0) > atol:
        raise ValueError(f"weights are not on the simplex (min={w.min():.3g}, sum-1={w.sum() - 1:.3g})")
    return w


def weighted_kernel(kernels: Sequence[np.ndarray], w, squared: bool = False) -> np.ndarray:
    """``sum_t w_t K_t`` (or ``sum_t w_t^2 K_t`` when ``squared``)."""
    w = np.asarray(w, dtype=np.float64)
    if len(kernels) != w.size:
        raise ValueError(f"{len(kernels)} kernels but {w.size} weights")
    shape = np.shape(kernels[0])
    coef = w**2 if squared else w
    out = np.zeros(shape)
    for c, k in zip(coef, kernels):
        if np.shape(k) != shape:
            raise ValueError("kernels have mismatched orders")
        out += c * k
    return out


def save_matrix_csv(path, a: np.ndarray) -> None:
    np.savetxt(path, np.asarray(a), delimiter=",", fmt="%.17g")


def load_matrix_csv(path) -> np.ndarray:
    a = np.loadtxt(path, delimiter=",", ndmin=2)
    return a


def save_matrix_bin(path, a: np.ndarray) -> None:
    """Raw dump: little-endian ``u64 n`` then ``n*n`` row-major ``f64``."""
    a = np.ascontiguousarray(a, dtype="<f8")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("only square matrices can be dumped")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", a.shape[0]))
        fh.write(a.tobytes(order="C"))


def load_matrix_bin(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise ValueError(f"{path}: truncated header")
    (n,) = struct.unpack_from("<Q", raw)
    if len(raw) != 8 + 8 * n * n:
        raise ValueError(f"{path}: expected {8 + 8 * n * n} bytes, found {len(raw)}")
    return np.frombuffer(raw, dtype="<f8", offset=8).reshape(n, n).astype(np.float64)
