"""End-to-end weighted consensus clustering."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from sklearn.cluster import KMeans

from .coassoc import ca_matrix, partition_kernel, uniform_weights
from .confidence import DEFAULT_ALPHA, high_confidence, second_order
from .metrics import MetricsReport, evaluate
from .minmax import OptimizerConfig, OptimizerState, combined_kernel, optimize, top_k_eigvecs
from .partitions import Partition, Pool, compact

__all__ = ["KMeansConfig", "ConsensusResult", "kmeans", "run_pipeline", "ABLATIONS"]

ABLATIONS = ("full", "bias_only", "diversity_only")


@dataclass
class KMeansConfig:
    restarts: int = 10
    max_iter: int = 300
    tol: float = 1e-6


def kmeans(points: np.ndarray, k: int, restarts: int = 10, seed: int = 0, max_iter: int = 300, tol: float = 1e-6) -> Partition:
    """Lloyd k-means with k-means++ seeding; best inertia over ``restarts``."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if k > points.shape[0]:
        raise ValueError(f"k={k} exceeds number of points {points.shape[0]}")
    km = KMeans(n_clusters=k, init="k-means++", n_init=restarts, max_iter=max_iter, tol=tol, random_state=seed)
    return compact(km.fit_predict(points))


@dataclass
class ConsensusResult:
    labels: Partition
    weights: np.ndarray
    optimizer: OptimizerState
    alpha: float
    seed: int
    k: int
    ablation: str = "full"
    metrics: Optional[MetricsReport] = None
    config: dict = field(default_factory=dict)

    @property
    def weight_entropy(self) -> float:
        w = self.weights[self.weights > 0]
        return float(-(w * np.log(w)).sum())

    def to_dict(self) -> dict:
        return {
            "labels": self.labels.labels.tolist(),
            "weights": self.weights.tolist(),
            "weight_entropy": self.weight_entropy,
            "objective": self.optimizer.objective,
            "objective_trajectory": self.optimizer.trajectory_json(),
            "iterations": self.optimizer.iterations,
            "converged": self.optimizer.converged,
            "stop_reason": self.optimizer.stop_reason,
            "degenerate_gap": self.optimizer.degenerate_gap,
            "metrics": None if self.metrics is None else self.metrics.to_dict(),
            "config": {"alpha": self.alpha, "seed": self.seed, "k": self.k, "ablation": self.ablation, **self.config},
        }


def run_pipeline(
    pool: Pool,
    k: int,
    alpha: float = DEFAULT_ALPHA,
    opt_cfg: Optional[OptimizerConfig] = None,
    kmeans_cfg: Optional[KMeansConfig] = None,
    seed: int = 0,
    ablation: str = "full",
    truth: Optional[Partition] = None,
    nmi_variant: str = "geometric",
    cluster_weight=None,
    confidence_source: str = "ca",
    matrices: Optional[dict] = None,
) -> ConsensusResult:
    """Pool -> kernels -> high-confidence surrogate -> weights -> labels.

    ``ablation`` selects the objective: ``"full"`` learns weights against
    ``2 Kt + K^w``; ``"bias_only"`` keeps uniform weights and clusters
    ``2 Kt + Kbar``; ``"diversity_only"`` learns weights with ``Kt``
    dropped.

    ``confidence_source`` chooses the matrix that is thresholded at
    ``alpha``: ``"ca"`` (default) uses the plain co-association matrix,
    whose entries are co-membership frequencies in [0, 1];
    ``"normalized"`` uses the average of the degree-normalised kernels.
    If ``matrices`` is a dict it receives the intermediate matrices
    (``ca``, ``kbar``, ``h``, ``ktilde``, ``kw``) and the embedding ``z``.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if ablation not in ABLATIONS:
        raise ValueError(f"unknown ablation {ablation!r}; expected one of {ABLATIONS}")
    if confidence_source not in ("ca", "normalized"):
        raise ValueError(f"unknown confidence_source {confidence_source!r}")
    opt_cfg = opt_cfg or OptimizerConfig()
    kmeans_cfg = kmeans_cfg or KMeansConfig()

    kernels = [partition_kernel(p, cluster_weight) for p in pool]
    kbar = np.zeros((pool.n, pool.n))
    for kt in kernels:
        kbar += kt
    kbar /= pool.m
    ca = ca_matrix(pool, normalized=False, cluster_weight=cluster_weight)
    h = high_confidence(ca if confidence_source == "ca" else kbar, alpha)
    ktilde = second_order(h)

    if ablation == "bias_only":
        w = uniform_weights(pool.m)
        mat = 2.0 * ktilde + kbar
        z, vals = top_k_eigvecs(mat, k)
        state = OptimizerState(w=w, objective=float(vals.sum()), converged=True, stop_reason="fixed_weights")
        state.trajectory.append({"iter": 0, "objective": state.objective, "step": 0.0, "sup_norm_w_change": 0.0})
        kw = kbar
    else:
        target = ktilde if ablation == "full" else None
        state, z = optimize(kernels, target, k, opt_cfg)
        kw = combined_kernel(kernels, None, state.w)

    if matrices is not None:
        matrices.update(ca=ca, kbar=kbar, h=h, ktilde=ktilde, kw=kw, z=z)

    labels = kmeans(z, k, kmeans_cfg.restarts, seed, kmeans_cfg.max_iter, kmeans_cfg.tol)
    metrics = None if truth is None else evaluate(labels, truth, nmi_variant)
    return ConsensusResult(
        labels=labels,
        weights=state.w,
        optimizer=state,
        alpha=alpha,
        seed=seed,
        k=k,
        ablation=ablation,
        metrics=metrics,
        config={"optimizer": asdict(opt_cfg), "kmeans": asdict(kmeans_cfg), "nmi_variant": nmi_variant, "confidence_source": confidence_source, "m": pool.m, "n": pool.n},
    )
