"""Computable pieces of the ensemble-clustering generalisation theory.

* closed-form generalisation-error and excess-risk bounds,
* the exact bias/diversity decomposition of ``||K^w - K*||_F^2``,
* an empirical excess-risk scaling experiment against ground-truth labels.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import spearmanr

from .coassoc import ca_matrix, check_simplex, weighted_kernel
from .minmax import top_k_eigvecs
from .partitions import Dataset, Partition, default_k_range, derive_seed, generate_pool

__all__ = [
    "BoundParams",
    "generalization_bound",
    "excess_risk_bound",
    "DecompositionReport",
    "bias_diversity",
    "ScalingCurve",
    "SCHEDULES",
    "ensemble_size",
    "excess_risk_loss",
    "excess_risk_experiment",
    "fit_scaling",
]

SQRT8 = 2.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class BoundParams:
    """Inputs of the bounds.

    ``c`` bounds the inverse k-th eigengap of the expected kernel, ``c0``
    bounds the squared sup-norm of the empirical eigenfunctions.
    """

    n: float
    m: float
    delta: float
    c: float = 1.0
    c0: float = 1.0
    k: float = 1

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.c <= 0 or self.c0 < 0 or self.k < 0:
            raise ValueError("c must be positive, c0 and k non-negative")


def _ensemble_term(p: BoundParams) -> float:
    log_term = math.log(6.0 * p.n / p.delta)
    return 2.0 / (3.0 * p.m) * log_term + math.sqrt(8.0 / p.m * log_term)


def _sample_term(p: BoundParams) -> float:
    return SQRT8 * math.log(6.0 / p.delta) / math.sqrt(p.n)


def generalization_bound(p: BoundParams) -> float:
    """Upper bound on empirical minus population error (prob. ``1 - delta``)."""
    return (SQRT8 * p.c + 1.0) * _ensemble_term(p) + _sample_term(p)


def excess_risk_bound(p: BoundParams) -> float:
    """Upper bound on the excess risk of the empirical embedding."""
    spectral = p.k * (SQRT8 * p.c0 / math.sqrt(p.n) + math.sqrt(8.0 * math.log(3.0 / p.delta) / p.n))
    return spectral + SQRT8 * p.c * _ensemble_term(p) + _sample_term(p)


@dataclass
class DecompositionReport:
    bias: float
    diversity: float
    lhs: float
    identity_residual: float
    m: int

    @property
    def rhs(self) -> float:
        return (self.bias - self.diversity) / self.m


def bias_diversity(kernels: Sequence[np.ndarray], w, kstar: np.ndarray) -> DecompositionReport:
    """Split ``||K^w - K*||_F^2`` into bias and diversity sums.

    With ``K^w = sum_t w_t K_t`` (linear weights) and ``v_t = m w_t``::

        bias      = sum_t ||v_t K_t - K*||_F^2
        diversity = sum_t ||v_t K_t - K^w||_F^2
        ||K^w - K*||_F^2 = (bias - diversity) / m      (exactly)
    """
    w = check_simplex(w, atol=1e-9)
    m = len(kernels)
    kstar = np.asarray(kstar, dtype=np.float64)
    if w.size != m:
        raise ValueError(f"{m} kernels but {w.size} weights")
    if any(np.shape(k) != kstar.shape for k in kernels):
        raise ValueError("kernel orders do not match K*")
    kw = weighted_kernel(kernels, w)
    bias = diversity = 0.0
    for wt, kt in zip(w, kernels):
        scaled = m * wt * np.asarray(kt)
        bias += float(np.sum((scaled - kstar) ** 2))
        diversity += float(np.sum((scaled - kw) ** 2))
    lhs = float(np.sum((kw - kstar) ** 2))
    return DecompositionReport(bias, diversity, lhs, abs(lhs - (bias - diversity) / m), m)


SCHEDULES = ("loglog", "log", "sqrt")


def ensemble_size(n: int, schedule: str) -> int:
    """Pool size for ``n`` samples: ceil of log log n, log n or sqrt n (min 2)."""
    if schedule == "loglog":
        m = math.ceil(math.log(math.log(n)))
    elif schedule == "log":
        m = math.ceil(math.log(n))
    elif schedule == "sqrt":
        m = math.ceil(math.sqrt(n))
    else:
        raise ValueError(f"unknown schedule {schedule!r}; expected one of {SCHEDULES}")
    return max(2, m)


def _indicator_basis(p: Partition) -> np.ndarray:
    """Columns ``1_c / sqrt(|c|)``; their Gram ``B B^T`` is the normalised similarity."""
    b = np.zeros((p.n, p.num_clusters))
    b[np.arange(p.n), p.labels] = 1.0
    return b / np.sqrt(b.sum(axis=0))


def excess_risk_loss(kbar: np.ndarray, truth: Partition, k: Optional[int] = None, per_sample: bool = True) -> float:
    """``(1/n) [sum of top-k eigenvalues of K* - tr(Z^T K* Z)]``.

    ``K*`` is the normalised co-membership kernel of ``truth`` and ``Z`` the
    top-``k`` eigenvectors of ``kbar``.  ``per_sample=False`` drops the
    ``1/n`` factor, leaving the raw subspace misfit in ``[0, k]``.
    """
    k = truth.num_clusters if k is None else k
    n = truth.n
    z, _ = top_k_eigvecs(kbar, k)
    b = _indicator_basis(truth)
    # K* = B B^T, so its nonzero spectrum is that of B^T B and tr(Z^T K* Z) = ||B^T Z||^2
    best = np.sort(np.linalg.eigvalsh(b.T @ b))[::-1][:k].sum()
    achieved = float(np.sum((b.T @ z) ** 2))
    return float((best - achieved) / n) if per_sample else float(best - achieved)


def fit_scaling(ns, ms, losses) -> tuple:
    """Least-squares ``loss ~ a1/sqrt(n) + a2 sqrt(log n / m) + gap``."""
    ns, ms, y = (np.asarray(v, dtype=np.float64) for v in (ns, ms, losses))
    x = np.column_stack([1.0 / np.sqrt(ns), np.sqrt(np.log(ns) / ms), np.ones_like(ns)])
    coef = np.linalg.solve(x.T @ x, x.T @ y)
    return tuple(float(c) for c in coef)


@dataclass
class ScalingCurve:
    points: List[tuple]
    schedule: str
    fit: Optional[tuple] = None
    config: dict = field(default_factory=dict)

    @property
    def ns(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def ms(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    @property
    def losses(self) -> np.ndarray:
        return np.array([p[2] for p in self.points])

    def spearman(self, upper_half: bool = False) -> float:
        ns, losses = self.ns, self.losses
        if upper_half:
            keep = ns >= np.median(ns)
            ns, losses = ns[keep], losses[keep]
        if ns.size < 2 or np.all(losses == losses[0]):
            return float("nan")
        return float(spearmanr(ns, losses)[0])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "m", "loss"])
        for n, m, loss in self.points:
            writer.writerow([n, m, repr(loss)])
        return buf.getvalue()

    def fit_record(self) -> dict:
        a1, a2, gap = self.fit if self.fit is not None else (None, None, None)
        rho = self.spearman() if len(self.points) > 1 else float("nan")
        return {
            "schema": 1,
            "schedule": self.schedule,
            "model": "a1/sqrt(n) + a2*sqrt(log(n)/m) + gap",
            "a1": a1,
            "a2": a2,
            "gap": gap,
            # constant losses leave the rank correlation undefined
            "spearman": None if math.isnan(rho) else rho,
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.fit_record(), indent=2)


def _grid_point(data: Dataset, n: int, schedule: str, seed: int, index: int, k_range, max_iter: int, per_sample: bool):
    rng = np.random.default_rng(derive_seed(seed, index, 0))
    idx = np.sort(rng.choice(data.n, size=n, replace=False))
    sub = data.subset(idx)
    m = ensemble_size(n, schedule)
    kr = k_range if k_range is not None else default_k_range(n, sub.truth.num_clusters)
    pool = generate_pool(sub, m, kr, seed=derive_seed(seed, index, 1), max_iter=max_iter)
    loss = excess_risk_loss(ca_matrix(pool), sub.truth, per_sample=per_sample)
    return (int(n), int(m), loss)


def excess_risk_experiment(
    data: Dataset,
    n_grid: Sequence[int],
    schedule: str = "sqrt",
    k_range: Optional[Sequence[int]] = None,
    seed: int = 0,
    max_iter: int = 300,
    n_jobs: Optional[int] = None,
    per_sample: bool = True,
) -> ScalingCurve:
    """Loss of the CA-matrix embedding against the label kernel, across ``n``.

    For every ``n`` in the grid: subsample ``n`` points, build a pool of
    ``ensemble_size(n, schedule)`` k-means partitions, and score the top-k
    eigenvectors of the normalised CA matrix against the normalised
    ground-truth kernel.  ``k_range=None`` uses :func:`default_k_range` on
    each subsample.
    """
    if data.truth is None:
        raise ValueError("the scaling experiment needs ground-truth labels")
    n_grid = [int(v) for v in n_grid]
    if not n_grid or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be non-empty and strictly ascending")
    if n_grid[-1] > data.n or n_grid[0] < 2:
        raise ValueError(f"n_grid must lie in [2, {data.n}]")
    ensemble_size(n_grid[0], schedule)
    args = [(data, n, schedule, seed, i, k_range, max_iter, per_sample) for i, n in enumerate(n_grid)]
    if n_jobs in (None, 1):
        points = [_grid_point(*a) for a in args]
    else:
        points = Parallel(n_jobs=n_jobs)(delayed(_grid_point)(*a) for a in args)
    curve = ScalingCurve(
        points=points,
        schedule=schedule,
        config={
            "seed": seed,
            "k_range": None if k_range is None else list(k_range),
            "n_grid": n_grid,
            "per_sample": per_sample,
        },
    )
    if len(points) >= 3:
        curve.fit = fit_scaling(curve.ns, curve.ms, curve.losses)
    return curve
