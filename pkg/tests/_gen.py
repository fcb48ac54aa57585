"""Random instance generators shared by the test modules."""

import numpy as np

from gpec.coassoc import partition_kernel
from gpec.minmax import combined_kernel, objective
from gpec.partitions import Dataset, Partition, compact


def random_psd(rng, n, rank=None, scale=1.0):
    g = rng.normal(size=(n, rank or n))
    a = g @ g.T
    a = 0.5 * (a + a.T)
    return scale * a / np.linalg.norm(a, 2)


def random_simplex(rng, m):
    return rng.dirichlet(np.ones(m))


def random_partition(rng, n, k):
    return compact(rng.integers(0, k, size=n))


def random_partition_kernels(rng, n, m, k_max=4):
    return [partition_kernel(random_partition(rng, n, int(rng.integers(1, k_max + 1)))) for _ in range(m)]


def gaussian_blobs(n=300, separation=8.0, seed=0, k=3, dim=2):
    """``k`` equal-size unit-variance blobs whose centres are ``separation`` apart.

    For ``k <= dim + 1`` the centres are vertices of a regular simplex, so
    every pair of centres is exactly ``separation`` apart.
    """
    rng = np.random.default_rng(seed)
    if k > dim + 1:
        raise ValueError("need k <= dim + 1 for equidistant centres")
    # regular simplex: orthonormal basis of the centred standard basis of R^k
    e = np.eye(k) - 1.0 / k
    u, _, _ = np.linalg.svd(e)
    verts = e @ u[:, : k - 1]
    verts *= separation / np.linalg.norm(verts[0] - verts[1])
    centres = np.zeros((k, dim))
    centres[:, : k - 1] = verts
    y = np.repeat(np.arange(k), n // k)
    y = np.concatenate([y, np.arange(n - y.size)])
    x = centres[y] + rng.normal(size=(n, dim))
    return Dataset(x, Partition(y))


def gapped_instance(rng, n, m, k, min_gap=0.1):
    """Random PSD kernels whose combined matrix has a k-th eigengap >= ``min_gap``.

    The gap is opened by adding a multiple of the top-k projector to K~,
    which shifts the top of the spectrum and keeps K~ PSD.
    """
    kernels = [random_psd(rng, n) for _ in range(m)]
    ktilde = random_psd(rng, n, rank=max(1, n // 2), scale=0.5)
    w = random_simplex(rng, m)
    vals, vecs = np.linalg.eigh(combined_kernel(kernels, ktilde, w))
    gap = vals[-k] - vals[-k - 1]
    if gap < 2 * min_gap:
        z = vecs[:, -k:]
        ktilde = ktilde + (2 * min_gap - gap) / 2 * z @ z.T
    return kernels, ktilde, w


def fd_gradient(kernels, ktilde, w, k, h=1e-6):
    g = np.empty_like(w)
    for t in range(w.size):
        e = np.zeros_like(w)
        e[t] = h
        g[t] = (objective(kernels, ktilde, w + e, k)[0] - objective(kernels, ktilde, w - e, k)[0]) / (2 * h)
    return g
