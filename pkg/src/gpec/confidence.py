"""High-confidence filtering of a CA matrix and its second-order similarity."""

from __future__ import annotations

import numpy as np

from .coassoc import mirror_upper

__all__ = ["high_confidence", "second_order", "DEFAULT_ALPHA"]

DEFAULT_ALPHA = 0.1


def high_confidence(kbar: np.ndarray, alpha: float = DEFAULT_ALPHA) -> np.ndarray:
    """Keep entries ``>= alpha``, zero the rest."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    kbar = np.asarray(kbar, dtype=np.float64)
    return np.where(kbar >= alpha, kbar, 0.0)


def second_order(h: np.ndarray) -> np.ndarray:
    """Cosine similarity between the columns of ``h``.

    Computes ``N^T N`` with ``N = H D^{-1}``, ``D_jj`` the L2 norm of
    column ``j``.  A column with zero norm contributes an all-zero row and
    column instead of a division by zero.
    """
    h = np.asarray(h, dtype=np.float64)
    norms = np.sqrt((h * h).sum(axis=0))
    live = norms > 0
    scale = np.zeros_like(norms)
    scale[live] = 1.0 / norms[live]
    nmat = h * scale[None, :]
    kt = mirror_upper(nmat.T @ nmat)
    # rounding can push parallel columns a few ulps past 1
    np.minimum(kt, 1.0, out=kt)
    np.fill_diagonal(kt, live.astype(np.float64))
    return kt
