"""External clustering agreement measures.

Everything is computed from the contingency table of two labelings.
Conventions for degenerate inputs (single clusters, empty pair sets) are
fixed here so callers never see NaN.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, List, Union

import numpy as np

from .partitions import Partition, compact

__all__ = [
    "MetricsReport",
    "contingency",
    "nmi",
    "ari",
    "purity",
    "pairwise_f",
    "threshold_pr_curve",
    "evaluate",
    "format_table",
    "NMI_VARIANTS",
]

NMI_VARIANTS = ("geometric", "arithmetic", "max")

Labels = Union[Partition, np.ndarray, List[int]]


def _labels(p: Labels) -> np.ndarray:
    return compact(p).labels


def contingency(pred: Labels, truth: Labels) -> np.ndarray:
    """``C[i, j]`` = samples in predicted cluster ``i`` and true class ``j``.

    Both labelings are compacted first, so rows/columns follow first
    occurrence order.
    """
    a, b = _labels(pred), _labels(truth)
    if a.size != b.size:
        raise ValueError(f"labelings differ in length ({a.size} vs {b.size})")
    c = np.zeros((a.max() + 1, b.max() + 1), dtype=np.int64)
    np.add.at(c, (a, b), 1)
    return c


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(pred: Labels, truth: Labels, variant: str = "geometric") -> float:
    """Normalised mutual information (natural log).

    ``variant`` picks the normaliser: geometric mean, arithmetic mean or
    max of the two entropies.  Returns 0 if either side has one cluster.
    """
    if variant not in NMI_VARIANTS:
        raise ValueError(f"unknown NMI variant {variant!r}")
    c = contingency(pred, truth)
    n = int(c.sum())
    rows, cols = c.sum(axis=1), c.sum(axis=0)
    h_pred, h_true = _entropy(rows, n), _entropy(cols, n)
    if c.shape[0] == 1 or c.shape[1] == 1:
        return 0.0
    nz = c > 0
    pij = c[nz] / n
    outer = np.outer(rows, cols)[nz] / (n * n)
    mi = float((pij * np.log(pij / outer)).sum())
    if variant == "geometric":
        denom = np.sqrt(h_pred * h_true)
    elif variant == "arithmetic":
        denom = 0.5 * (h_pred + h_true)
    else:
        denom = max(h_pred, h_true)
    return float(min(1.0, max(0.0, mi / denom)))


def _pairs(x):
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1) / 2.0


def ari(pred: Labels, truth: Labels) -> float:
    """Adjusted Rand index; 0 when the maximum equals the expectation."""
    c = contingency(pred, truth)
    n = int(c.sum())
    index = _pairs(c).sum()
    a = _pairs(c.sum(axis=1)).sum()
    b = _pairs(c.sum(axis=0)).sum()
    total = n * (n - 1) / 2.0
    expected = a * b / total if total > 0 else 0.0
    maximum = 0.5 * (a + b)
    if maximum == expected:
        return 0.0
    return float((index - expected) / (maximum - expected))


def purity(pred: Labels, truth: Labels) -> float:
    c = contingency(pred, truth)
    return float(c.max(axis=1).sum() / c.sum())


def pairwise_f(pred: Labels, truth: Labels):
    """Pair-counting F-measure: ``(f, precision, recall)``."""
    c = contingency(pred, truth)
    tp = _pairs(c).sum()
    pred_pairs = _pairs(c.sum(axis=1)).sum()
    true_pairs = _pairs(c.sum(axis=0)).sum()
    precision = tp / pred_pairs if pred_pairs > 0 else 0.0
    recall = tp / true_pairs if true_pairs > 0 else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return float(f), float(precision), float(recall)


def threshold_pr_curve(kbar: np.ndarray, truth: Labels, alphas: Iterable[float]):
    """Quality of thresholded CA entries as co-membership predictions.

    For each ``alpha`` the off-diagonal pairs with ``kbar >= alpha`` are the
    predicted positives.  Returns ``(alpha, proportion, precision, recall)``
    tuples; empty predictions score precision 0.
    """
    y = _labels(truth)
    kbar = np.asarray(kbar)
    if kbar.shape != (y.size, y.size):
        raise ValueError("kbar order does not match truth length")
    iu = np.triu_indices(y.size, 1)
    vals = kbar[iu]
    same = y[iu[0]] == y[iu[1]]
    total, positives = vals.size, int(same.sum())
    out = []
    for alpha in alphas:
        hit = vals >= alpha
        npred = int(hit.sum())
        tp = int((hit & same).sum())
        out.append(
            (
                float(alpha),
                npred / total if total else 0.0,
                tp / npred if npred else 0.0,
                tp / positives if positives else 0.0,
            )
        )
    return out


@dataclass
class MetricsReport:
    nmi: float
    ari: float
    purity: float
    f_score: float
    contingency: np.ndarray

    def to_dict(self) -> dict:
        d = asdict(self)
        d["contingency"] = self.contingency.tolist()
        return d


def evaluate(pred: Labels, truth: Labels, nmi_variant: str = "geometric") -> MetricsReport:
    return MetricsReport(
        nmi=nmi(pred, truth, nmi_variant),
        ari=ari(pred, truth),
        purity=purity(pred, truth),
        f_score=pairwise_f(pred, truth)[0],
        contingency=contingency(pred, truth),
    )


def format_table(report: MetricsReport) -> str:
    """Fixed-order percentage table (one decimal)."""
    rows = [("NMI", report.nmi), ("ARI", report.ari), ("Purity", report.purity), ("F", report.f_score)]
    header = " ".join(f"{name:>7}" for name, _ in rows)
    values = " ".join(f"{100 * v:7.1f}" for _, v in rows)
    return header + "\n" + values
