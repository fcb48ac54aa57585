import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpec.coassoc import (
    ca_matrix,
    check_simplex,
    load_matrix_bin,
    load_matrix_csv,
    normalize,
    partition_kernel,
    save_matrix_bin,
    save_matrix_csv,
    similarity_of,
    uniform_weights,
    weighted_kernel,
)
from gpec.partitions import Pool, compact

from _gen import random_partition, random_simplex

labels = st.lists(st.integers(0, 5), min_size=1, max_size=30)


def test_similarity_examples():
    assert similarity_of(compact([0, 0, 1])).tolist() == [[1, 1, 0], [1, 1, 0], [0, 0, 1]]
    assert np.array_equal(similarity_of(compact([0, 1, 2])), np.eye(3))
    assert np.array_equal(similarity_of(compact([0, 0, 0])), np.ones((3, 3)))


def test_similarity_cluster_weight_hook():
    p = compact([0, 0, 1])
    a = similarity_of(p, [2.0, 0.5])
    assert a.tolist() == [[2, 2, 0], [2, 2, 0], [0, 0, 0.5]]
    assert np.array_equal(a, similarity_of(p, lambda c: [2.0, 0.5][c]))
    with pytest.raises(ValueError):
        similarity_of(p, [1.0])


def test_normalize_examples():
    a = np.array([[1, 1, 0], [1, 1, 0], [0, 0, 1]], dtype=float)
    expected = np.array([[0.5, 0.5, 0], [0.5, 0.5, 0], [0, 0, 1]])
    assert np.allclose(normalize(a), expected, atol=1e-15)
    # independent dense oracle D^{-1/2} A D^{-1/2}
    d = np.diag(1 / np.sqrt(a.sum(axis=1)))
    assert np.allclose(normalize(a), d @ a @ d, atol=1e-15)
    assert np.array_equal(normalize(np.eye(4)), np.eye(4))
    assert np.allclose(normalize(np.ones((5, 5))), np.full((5, 5), 0.2), atol=1e-15)


def test_normalize_rejects_zero_degree():
    with pytest.raises(ValueError):
        normalize(np.array([[1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        normalize(np.ones((2, 3)))


@settings(max_examples=60)
@given(labels)
def test_partition_spectra(raw):
    p = compact(raw)
    a = similarity_of(p)
    assert np.array_equal(a, a.T)
    sizes = np.bincount(p.labels)
    ev = np.sort(np.linalg.eigvalsh(a))
    expected = np.sort(np.concatenate([sizes, np.zeros(p.n - p.num_clusters)]))
    assert np.allclose(ev, expected, atol=1e-9)

    k = partition_kernel(p)
    assert np.array_equal(k, k.T)
    assert np.allclose(np.diag(k), 1.0 / sizes[p.labels])
    evk = np.linalg.eigvalsh(k)
    assert evk.min() >= -1e-12 and evk.max() <= 1 + 1e-12
    assert np.sum(np.abs(evk - 1) < 1e-9) == p.num_clusters


def test_ca_matrix_examples():
    pool = Pool((compact([0, 0, 1]), compact([0, 1, 1])))
    raw = ca_matrix(pool, normalized=False)
    assert np.allclose(raw, [[1, 0.5, 0], [0.5, 1, 0.5], [0, 0.5, 1]])
    # pair-enumeration oracle
    for i, j in itertools.product(range(3), repeat=2):
        assert raw[i, j] == np.mean([p.labels[i] == p.labels[j] for p in pool])

    p = compact([0, 1, 1, 2, 2, 2])
    assert np.allclose(ca_matrix(Pool((p,) * 4)), partition_kernel(p), atol=1e-15)
    singletons = compact(np.arange(5))
    assert np.allclose(ca_matrix(Pool((singletons,) * 3)), np.eye(5))


def test_ca_matrix_permutation_invariant():
    rng = np.random.default_rng(0)
    parts = [random_partition(rng, 25, int(rng.integers(2, 6))) for _ in range(7)]
    base = ca_matrix(Pool(tuple(parts)))
    for _ in range(5):
        perm = rng.permutation(7)
        other = ca_matrix(Pool(tuple(parts[t] for t in perm)))
        assert np.allclose(base, other, atol=1e-15)
        assert np.array_equal(other, other.T)


def test_weighted_kernel_examples():
    rng = np.random.default_rng(1)
    parts = [random_partition(rng, 12, 3) for _ in range(4)]
    kernels = [partition_kernel(p) for p in parts]
    assert np.allclose(weighted_kernel(kernels, uniform_weights(4)), ca_matrix(Pool(tuple(parts))), atol=1e-15)
    assert np.array_equal(weighted_kernel(kernels, [1, 0, 0, 0], squared=True), kernels[0])

    k1, k2 = np.eye(2), np.full((2, 2), 0.5)
    assert np.allclose(weighted_kernel([k1, k2], [0.5, 0.5], squared=True), [[0.375, 0.125], [0.125, 0.375]])


def test_weighted_kernel_errors():
    with pytest.raises(ValueError):
        weighted_kernel([np.eye(2)], [0.5, 0.5])
    with pytest.raises(ValueError):
        weighted_kernel([np.eye(2), np.eye(3)], [0.5, 0.5])


@settings(max_examples=40)
@given(st.integers(0, 2**16), st.integers(1, 6), st.integers(2, 20))
def test_weighted_kernel_linear_and_psd(seed, m, n):
    rng = np.random.default_rng(seed)
    kernels = [partition_kernel(random_partition(rng, n, int(rng.integers(1, 5)))) for _ in range(m)]
    w1, w2 = random_simplex(rng, m), random_simplex(rng, m)
    lam = rng.uniform()
    lhs = weighted_kernel(kernels, lam * w1 + (1 - lam) * w2)
    rhs = lam * weighted_kernel(kernels, w1) + (1 - lam) * weighted_kernel(kernels, w2)
    assert np.allclose(lhs, rhs, atol=1e-13)
    for squared in (False, True):
        assert np.linalg.eigvalsh(weighted_kernel(kernels, w1, squared)).min() >= -1e-12


def test_check_simplex():
    assert np.array_equal(check_simplex([0.25, 0.75]), [0.25, 0.75])
    for bad in ([0.5, 0.6], [-0.1, 1.1], []):
        with pytest.raises(ValueError):
            check_simplex(bad)


def test_matrix_dumps_round_trip(tmp_path):
    a = np.random.default_rng(2).normal(size=(6, 6))
    save_matrix_bin(tmp_path / "a.bin", a)
    raw = (tmp_path / "a.bin").read_bytes()
    assert len(raw) == 8 + 8 * 36
    assert int.from_bytes(raw[:8], "little") == 6
    assert np.array_equal(load_matrix_bin(tmp_path / "a.bin"), a)
    save_matrix_csv(tmp_path / "a.csv", a)
    assert np.array_equal(load_matrix_csv(tmp_path / "a.csv"), a)
    (tmp_path / "bad.bin").write_bytes(raw[:-1])
    with pytest.raises(ValueError):
        load_matrix_bin(tmp_path / "bad.bin")
