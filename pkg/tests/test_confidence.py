import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpec.coassoc import ca_matrix
from gpec.confidence import high_confidence, second_order
from gpec.metrics import threshold_pr_curve
from gpec.partitions import generate_pool

from _gen import gaussian_blobs

KBAR = np.array([[1, 0.5, 0], [0.5, 1, 0.5], [0, 0.5, 1]])


def test_high_confidence_examples():
    assert np.array_equal(high_confidence(KBAR, 0.4), KBAR)
    assert np.array_equal(high_confidence(KBAR, 0.6), np.eye(3))
    assert np.array_equal(high_confidence(KBAR, 0.0), KBAR)


@pytest.mark.parametrize("alpha", [-0.01, 1.01])
def test_high_confidence_rejects_alpha(alpha):
    with pytest.raises(ValueError):
        high_confidence(KBAR, alpha)


def test_second_order_example():
    kt = second_order(KBAR)
    # direct arithmetic on the column norms
    assert np.allclose(np.diag(kt), 1)
    assert kt[0, 1] == pytest.approx(1.0 / np.sqrt(1.25 * 1.5), abs=1e-15)
    assert kt[0, 2] == pytest.approx(0.25 / 1.25, abs=1e-15)
    assert np.array_equal(kt, kt.T)


def test_second_order_identity_and_zero_column():
    assert np.array_equal(second_order(np.eye(4)), np.eye(4))
    h = np.array([[1, 0.5, 0], [0.5, 1, 0], [0, 0, 0]])
    kt = second_order(h)
    assert np.all(kt[2] == 0) and np.all(kt[:, 2] == 0)
    assert kt[0, 0] == kt[1, 1] == 1


def _sym_nonneg(seed, n, density):
    rng = np.random.default_rng(seed)
    a = rng.uniform(size=(n, n)) * (rng.uniform(size=(n, n)) < density)
    return np.triu(a) + np.triu(a, 1).T


@settings(max_examples=60)
@given(st.integers(0, 2**16), st.integers(1, 100), st.floats(0.0, 1.0))
def test_second_order_psd_and_bounded(seed, n, density):
    h = _sym_nonneg(seed, n, density)
    kt = second_order(h)
    assert np.array_equal(kt, kt.T)
    assert np.linalg.eigvalsh(kt).min() >= -1e-10
    assert kt.max() <= 1.0 and kt.min() >= 0.0
    live = np.linalg.norm(h, axis=0) > 0
    assert np.all(np.diag(kt)[live] == 1) and np.all(np.diag(kt)[~live] == 0)


@settings(max_examples=40)
@given(st.integers(0, 2**16), st.floats(0, 1), st.floats(0, 1))
def test_sparsity_monotone_in_alpha(seed, a1, a2):
    a1, a2 = sorted((a1, a2))
    k = _sym_nonneg(seed, 20, 0.7)
    assert np.count_nonzero(high_confidence(k, a1)) >= np.count_nonzero(high_confidence(k, a2))


@pytest.mark.parametrize("seed", range(3))
def test_high_confidence_entries_are_more_reliable(seed):
    # single pools can dip slightly between neighbouring thresholds; the
    # ends of the range are far enough apart to separate cleanly
    data = gaussian_blobs(n=240, separation=4.0, seed=seed)
    ca = ca_matrix(generate_pool(data, 20, seed=seed), normalized=False)
    curve = threshold_pr_curve(ca, data.truth, [0.1, 0.9])
    (_, prop_lo, prec_lo, rec_lo), (_, prop_hi, prec_hi, rec_hi) = curve
    assert prec_hi > prec_lo
    assert rec_hi < rec_lo and prop_hi < prop_lo
