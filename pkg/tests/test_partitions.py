import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpec.metrics import nmi
from gpec.partitions import (
    Dataset,
    Partition,
    Pool,
    compact,
    default_k_range,
    derive_seed,
    generate_pool,
    load_dataset,
    load_pool,
    save_pool,
    zscore,
)

from _gen import gaussian_blobs

label_lists = st.lists(st.integers(0, 20), min_size=1, max_size=40)


# --- compact ---------------------------------------------------------------


@pytest.mark.parametrize(
    "raw, expected",
    [([5, 5, 9], [0, 0, 1]), ([0, 1, 2], [0, 1, 2]), ([2, 0, 2, 1], [0, 1, 0, 2])],
)
def test_compact_examples(raw, expected):
    p = compact(raw)
    assert p.labels.tolist() == expected
    assert p.num_clusters == max(expected) + 1


@given(label_lists)
def test_compact_idempotent_and_dense(raw):
    p = compact(raw)
    assert compact(p) == p
    assert set(p.labels.tolist()) == set(range(p.num_clusters))
    # same co-membership structure as the input
    raw = np.asarray(raw)
    assert np.array_equal(raw[:, None] == raw[None, :], p.labels[:, None] == p.labels[None, :])


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition(np.array([], dtype=int))
    with pytest.raises(ValueError):
        Partition(np.array([0, -1]))
    with pytest.raises(ValueError):
        Partition(np.array([0, 3]), num_clusters=2)
    p = Partition(np.array([0.0, 1.0]))
    assert p.labels.dtype == np.int64
    with pytest.raises(ValueError):
        p.labels[0] = 1


# --- pools -----------------------------------------------------------------


def test_load_pool_examples(tmp_path):
    f = tmp_path / "pool.csv"
    f.write_text("0,0\n0,1\n1,1\n")
    pool = load_pool(f)
    assert (pool.m, pool.n) == (2, 3)
    assert pool[0].labels.tolist() == [0, 0, 1]
    assert pool[1].labels.tolist() == [0, 1, 1]

    f.write_text("0\n0\n0\n")
    pool = load_pool(f)
    assert pool.m == 1 and pool[0].num_clusters == 1


@pytest.mark.parametrize("text", ["0,1\n0,1,2\n", "0,1\n0,x\n", "0,1\n0,1.5\n"])
def test_load_pool_rejects(tmp_path, text):
    f = tmp_path / "bad.csv"
    f.write_text(text)
    with pytest.raises(ValueError):
        load_pool(f)


def test_pool_requires_equal_lengths():
    with pytest.raises(ValueError):
        Pool((compact([0, 1]), compact([0, 1, 1])))
    with pytest.raises(ValueError):
        Pool(())


@settings(max_examples=30)
@given(st.integers(1, 6), st.integers(1, 15), st.integers(0, 2**16))
def test_pool_round_trip(tmp_path_factory, m, n, seed):
    rng = np.random.default_rng(seed)
    pool = Pool.from_label_matrix(rng.integers(0, 7, size=(n, m)))
    f = tmp_path_factory.mktemp("rt") / "pool.csv"
    save_pool(pool, f)
    back = load_pool(f)
    assert back.m == m and back.n == n
    for a, b in zip(pool, back):
        assert a == compact(b)


# --- datasets --------------------------------------------------------------


def test_load_dataset_with_labels(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("1,2,a\n3,4,a\n5,6,b\n")
    d = load_dataset(f, label_column=-1)
    assert (d.n, d.d) == (3, 2)
    assert d.truth.labels.tolist() == [0, 0, 1]
    assert d.features.tolist() == [[1, 2], [3, 4], [5, 6]]


def test_load_dataset_without_labels_rejects_text(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("1,2,a\n3,4,a\n5,6,b\n")
    with pytest.raises(ValueError, match="non-numeric"):
        load_dataset(f)


def test_load_dataset_header_and_name(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("x,y,cls\n1,2,3\n3,4,3\n5,6,7\n")
    d = load_dataset(f, label_column="cls")
    assert d.truth.labels.tolist() == [0, 0, 1]
    assert d.d == 2


def test_load_dataset_whitespace(tmp_path):
    f = tmp_path / "seeds.txt"
    f.write_text("15.26\t14.84\t1\n14.88  14.57\t1\n13.84\t13.94\t2\n")
    d = load_dataset(f, label_column=-1)
    assert d.features.shape == (3, 2)
    assert d.truth.labels.tolist() == [0, 0, 1]


def test_load_dataset_errors(tmp_path):
    f = tmp_path / "e.csv"
    f.write_text("")
    with pytest.raises(ValueError):
        load_dataset(f)
    f.write_text("1,2\n3\n")
    with pytest.raises(ValueError):
        load_dataset(f)
    with pytest.raises(FileNotFoundError):
        load_dataset(tmp_path / "missing.csv")


def test_dataset_invariants():
    with pytest.raises(ValueError):
        Dataset(np.zeros((1, 2)))
    with pytest.raises(ValueError):
        Dataset(np.array([[0.0], [np.nan]]))
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 2)), compact([0, 1]))


def test_zscore():
    d = Dataset(np.array([[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]]))
    z = zscore(d).features
    assert np.allclose(z.mean(axis=0), 0)
    assert np.allclose(z[:, 0].std(), 1)
    assert np.all(z[:, 1] == 0)


# --- generation ------------------------------------------------------------


def test_derive_seed_is_stable_and_separates_streams():
    assert derive_seed(7, 1) == derive_seed(7, 1)
    assert len({derive_seed(7, t) for t in range(100)}) == 100
    assert derive_seed(7, 1, 0) != derive_seed(7, 1, 1)


def test_default_k_range():
    assert default_k_range(300, 3) == (3, 18)
    assert default_k_range(10000, 3) == (3, 30)
    assert default_k_range(4, 5) == (5, 5)
    assert default_k_range(50) == (2, 8)


def test_generate_pool_deterministic():
    data = gaussian_blobs(n=120, seed=1)
    a = generate_pool(data, 10, seed=5)
    b = generate_pool(data, 10, seed=5)
    c = generate_pool(data, 10, seed=5, n_jobs=2)
    assert np.array_equal(a.label_matrix(), b.label_matrix())
    assert np.array_equal(a.label_matrix(), c.label_matrix())
    assert not np.array_equal(a.label_matrix(), generate_pool(data, 10, seed=6).label_matrix())


def test_generate_pool_forced_k():
    data = gaussian_blobs(n=300, separation=8.0, seed=2)
    pool = generate_pool(data, 8, (3, 3), seed=0)
    assert all(p.num_clusters == 3 for p in pool)


def test_generate_pool_quality_on_separated_blobs():
    data = gaussian_blobs(n=300, separation=10.0, seed=3)
    pool = generate_pool(data, 20, (3, 3), seed=0)
    assert np.mean([nmi(p, data.truth) for p in pool]) >= 0.95


def test_generate_pool_k_range_draws_within_bounds():
    data = gaussian_blobs(n=200, seed=4)
    pool = generate_pool(data, 30, (2, 6), seed=9)
    ks = [p.num_clusters for p in pool]
    assert min(ks) >= 2 and max(ks) <= 6
    assert len(set(ks)) > 1


def test_generate_pool_errors():
    data = gaussian_blobs(n=30, seed=0)
    with pytest.raises(ValueError):
        generate_pool(data, 3, (2, 31))
    with pytest.raises(ValueError):
        generate_pool(data, 3, (1, 3))
    with pytest.raises(ValueError):
        generate_pool(data, 0, (2, 3))
