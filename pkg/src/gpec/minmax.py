"""Min-max weight learning over partition kernels.

Solves

    min_w  J(w),   J(w) = max_{Z^T Z = I}  tr((2 Kt + sum_t w_t^2 K_t) Z Z^T)

over the probability simplex by reduced gradient descent.  The inner
maximum is the sum of the ``k`` largest eigenvalues of the combined
kernel, attained by its top-``k`` eigenvectors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.linalg import eigh

from .coassoc import check_simplex, uniform_weights, weighted_kernel

__all__ = [
    "OptimizerConfig",
    "OptimizerState",
    "top_k_eigvecs",
    "combined_kernel",
    "objective",
    "grad_j",
    "descent_direction",
    "optimize",
]

log = logging.getLogger(__name__)

_SIGN_EPS = 1e-12


def _fix_signs(z: np.ndarray) -> np.ndarray:
    for j in range(z.shape[1]):
        nz = np.flatnonzero(np.abs(z[:, j]) > _SIGN_EPS)
        if nz.size and z[nz[0], j] < 0:
            z[:, j] = -z[:, j]
    return z


def _top_eigh(a: np.ndarray, k: int, extra: int = 0):
    """Top ``k + extra`` eigenpairs, descending."""
    n = a.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    count = min(n, k + extra)
    vals, vecs = eigh(a, subset_by_index=[n - count, n - 1])
    return vals[::-1], vecs[:, ::-1]


def top_k_eigvecs(k_mat: np.ndarray, k: int):
    """Orthonormal eigenvectors of the ``k`` largest eigenvalues.

    Returns ``(Z, eigenvalues)`` with eigenvalues in descending order.  Each
    column of ``Z`` is signed so that its first entry with magnitude above
    ``1e-12`` is positive.
    """
    k_mat = np.asarray(k_mat, dtype=np.float64)
    vals, vecs = _top_eigh(k_mat, k)
    return _fix_signs(np.ascontiguousarray(vecs)), vals


def combined_kernel(kernels: Sequence[np.ndarray], ktilde: Optional[np.ndarray], w) -> np.ndarray:
    m = weighted_kernel(kernels, w, squared=True)
    if ktilde is not None:
        if np.shape(ktilde) != m.shape:
            raise ValueError(f"ktilde has shape {np.shape(ktilde)}, kernels are {m.shape}")
        m += 2.0 * np.asarray(ktilde)
    return m


def _evaluate(kernels, ktilde, w, k):
    mat = combined_kernel(kernels, ktilde, w)
    vals, vecs = _top_eigh(mat, k, extra=1)
    gap = vals[k - 1] - vals[k] if vals.size > k else np.inf
    z = _fix_signs(np.ascontiguousarray(vecs[:, :k]))
    return float(vals[:k].sum()), z, gap, float(abs(vals[0]))


def objective(kernels: Sequence[np.ndarray], ktilde: Optional[np.ndarray], w, k: int):
    """``J(w)`` and the maximising embedding ``Z*``.

    ``ktilde=None`` drops the high-confidence term.
    """
    j, z, _, _ = _evaluate(kernels, ktilde, np.asarray(w, dtype=np.float64), k)
    return j, z


def grad_j(kernels: Sequence[np.ndarray], z_star: np.ndarray, w) -> np.ndarray:
    """Partial derivatives ``dJ/dw_t = 2 w_t tr(Z*^T K_t Z*)``."""
    w = np.asarray(w, dtype=np.float64)
    if len(kernels) != w.size:
        raise ValueError(f"{len(kernels)} kernels but {w.size} weights")
    traces = np.array([np.einsum("ij,ij->", k @ z_star, z_star) for k in kernels])
    return 2.0 * w * traces


def descent_direction(grad, w) -> np.ndarray:
    """Reduced-gradient direction that keeps ``sum(w)`` fixed.

    The reference coordinate ``u`` is the largest weight (lowest index on
    ties).  Coordinates at zero whose reduced gradient is positive are held
    at zero; ``d_u`` balances the rest so that ``sum(d) == 0``.
    """
    grad = np.asarray(grad, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if grad.shape != w.shape:
        raise ValueError("gradient and weights differ in length")
    if not np.any(w > 0):
        raise ValueError("all weights are zero")
    u = int(np.argmax(w))
    d = -(grad - grad[u])
    d[(w <= 0) & (d < 0)] = 0.0
    d[u] = 0.0
    d[u] = -d.sum()
    return d


@dataclass
class OptimizerConfig:
    """Stopping rules and step policy.

    ``line_search`` is ``"armijo"`` (backtracking from ``step``, halving)
    or ``"fixed"`` (always ``step``, clipped to stay feasible).
    ``max_iter=0`` evaluates the starting weights without moving them.
    """

    max_iter: int = 100
    tol_w: float = 1e-5
    tol_j: float = 1e-6
    line_search: str = "armijo"
    step: float = 1.0
    armijo_c: float = 1e-4
    min_step: float = 1e-12

    def __post_init__(self):
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")
        if self.tol_w <= 0 or self.tol_j <= 0 or self.step <= 0 or self.min_step <= 0:
            raise ValueError("tolerances and step sizes must be positive")
        if self.line_search not in ("armijo", "fixed"):
            raise ValueError(f"unknown line_search {self.line_search!r}")


@dataclass
class OptimizerState:
    w: np.ndarray
    objective: float
    trajectory: List[dict] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    degenerate_gap: bool = False
    stop_reason: str = ""

    def trajectory_json(self) -> list:
        return [dict(row) for row in self.trajectory]


def _gap_is_degenerate(gap: float, scale: float) -> bool:
    return bool(gap <= 1e-10 * max(1.0, scale))


def _feasible_step(w: np.ndarray, d: np.ndarray) -> float:
    neg = d < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(w[neg] / -d[neg]))


def _take_step(w, d, beta, beta_cap):
    w_new = w + beta * d
    if beta >= beta_cap:
        # the blocking coordinates land exactly on the boundary
        w_new[(d < 0) & (w / np.where(d < 0, -d, 1.0) <= beta)] = 0.0
    w_new = np.maximum(w_new, 0.0)
    return w_new / w_new.sum()


def optimize(
    kernels: Sequence[np.ndarray],
    ktilde: Optional[np.ndarray],
    k: int,
    cfg: Optional[OptimizerConfig] = None,
    w0=None,
    callback: Optional[Callable[[int, np.ndarray, float], None]] = None,
):
    """Reduced gradient descent on ``J(w)`` from ``w0`` (uniform by default).

    Returns ``(state, Z)`` where ``Z`` is the top-``k`` embedding of the
    combined kernel at the final weights.  ``callback(iteration, w, J)`` is
    called on the starting point and on every accepted iterate.
    """
    cfg = cfg or OptimizerConfig()
    m = len(kernels)
    if m < 1:
        raise ValueError("need at least one kernel")
    n = np.shape(kernels[0])[0]
    if any(np.shape(kt) != (n, n) for kt in kernels):
        raise ValueError("kernels have mismatched orders")
    w = uniform_weights(m) if w0 is None else check_simplex(np.array(w0, dtype=np.float64))

    j, z, gap, scale = _evaluate(kernels, ktilde, w, k)
    state = OptimizerState(w=w.copy(), objective=j)
    state.degenerate_gap = _gap_is_degenerate(gap, scale)
    state.trajectory.append({"iter": 0, "objective": j, "step": 0.0, "sup_norm_w_change": 0.0})
    if callback is not None:
        callback(0, w.copy(), j)

    for it in range(1, cfg.max_iter + 1):
        state.iterations = it
        d = descent_direction(grad_j(kernels, z, w), w)
        if not np.any(np.abs(d) > 0):
            state.converged, state.stop_reason = True, "stationary"
            break
        beta_cap = _feasible_step(w, d)
        beta = min(cfg.step, beta_cap)
        dn2 = float(d @ d)
        while True:
            w_new = _take_step(w, d, beta, beta_cap)
            j_new, z_new, gap_new, scale_new = _evaluate(kernels, ktilde, w_new, k)
            if cfg.line_search == "fixed" or j_new <= j - cfg.armijo_c * beta * dn2:
                break
            beta *= 0.5
            if beta < cfg.min_step:
                j_new = None
                break
        if j_new is None:
            state.converged, state.stop_reason = True, "no_descent"
            break

        dw = float(np.max(np.abs(w_new - w)))
        rel = abs(j - j_new) / max(1.0, abs(j))
        w, j, z = w_new, j_new, z_new
        state.degenerate_gap |= _gap_is_degenerate(gap_new, scale_new)
        state.trajectory.append({"iter": it, "objective": j, "step": beta, "sup_norm_w_change": dw})
        log.debug("iter %d J=%.12g step=%.3g dw=%.3g", it, j, beta, dw)
        if callback is not None:
            callback(it, w.copy(), j)
        if dw <= cfg.tol_w:
            state.converged, state.stop_reason = True, "tol_w"
            break
        if rel <= cfg.tol_j:
            state.converged, state.stop_reason = True, "tol_j"
            break
    else:
        state.stop_reason = "max_iter" if cfg.max_iter else "fixed_weights"

    if state.degenerate_gap:
        log.warning("k-th eigengap was degenerate during optimisation; gradient may be inexact")
    state.w, state.objective = w, j
    return state, z
