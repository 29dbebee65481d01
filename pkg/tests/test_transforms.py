import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from orthofeatures.errors import ConfigurationError, DimensionError
from orthofeatures.seeding import child_rng
from orthofeatures.transforms import (apply_hd_chain, chi_diagonal_draw, fwht, hadamard_matrix,
                                      haar_orthogonal_draw, hd_chain_matrix, next_power_of_two, sample_chi_diagonal,
                                      sample_haar_orthogonal, sample_sign_diagonal,
                                      sign_diagonal_draw)


def naive_hadamard(d):
    """Normalized Sylvester Hadamard matrix from H[i, j] = (-1)^popcount(i & j)."""
    i = np.arange(d)
    bits = np.vectorize(lambda v: bin(v).count("1"))(i[:, None] & i[None, :])
    return (-1.0) ** bits / math.sqrt(d)


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


class TestFwht:
    def test_first_basis_vector(self):
        np.testing.assert_allclose(fwht([1.0, 0, 0, 0]), [0.5, 0.5, 0.5, 0.5], atol=1e-15)

    def test_d2(self):
        np.testing.assert_allclose(fwht([1.0, 1.0]), [math.sqrt(2), 0.0], atol=1e-15)

    @pytest.mark.parametrize("d", [2 ** k for k in range(0, 10)])
    def test_matches_naive(self, d):
        rng = np.random.default_rng(d)
        x = rng.standard_normal((20, d))
        np.testing.assert_allclose(fwht(x), x @ naive_hadamard(d).T, atol=1e-12, rtol=0)

    def test_hadamard_matrix_matches_naive(self):
        np.testing.assert_allclose(hadamard_matrix(64), naive_hadamard(64), atol=1e-15)

    @pytest.mark.parametrize("d", [3, 6, 100])
    def test_rejects_non_power_of_two(self, d):
        with pytest.raises(DimensionError):
            fwht(np.ones(d))

    def test_inplace(self):
        x = np.arange(8, dtype=np.float64)
        expected = fwht(x)
        out = fwht(x, inplace=True)
        assert out is x
        np.testing.assert_array_equal(x, expected)

    def test_does_not_modify_input(self):
        x = np.arange(8, dtype=np.float64)
        fwht(x)
        np.testing.assert_array_equal(x, np.arange(8))

    @given(arrays(np.float64, 64, elements=finite))
    def test_involution(self, v):
        np.testing.assert_allclose(fwht(fwht(v)), v, atol=1e-9 * (1 + np.abs(v).max()))

    @given(arrays(np.float64, 32, elements=finite), arrays(np.float64, 32, elements=finite),
           finite, finite)
    def test_linear(self, x, y, a, b):
        lhs = fwht(a * x + b * y)
        rhs = a * fwht(x) + b * fwht(y)
        scale = 1 + np.abs(a * x).max() + np.abs(b * y).max()
        np.testing.assert_allclose(lhs, rhs, atol=1e-12 * scale)

    @given(arrays(np.float64, 128, elements=finite))
    def test_norm_preserving(self, v):
        assert abs(np.linalg.norm(fwht(v)) - np.linalg.norm(v)) <= 1e-12 * (1 + np.linalg.norm(v))


class TestHaar:
    def test_orthogonal(self):
        for seed in range(20):
            q = sample_haar_orthogonal(32, seed)
            np.testing.assert_allclose(q.T @ q, np.eye(32), atol=1e-10)

    def test_deterministic(self):
        np.testing.assert_array_equal(sample_haar_orthogonal(8, 5), sample_haar_orthogonal(8, 5))
        assert not np.array_equal(sample_haar_orthogonal(8, 5), sample_haar_orthogonal(8, 6))

    def test_immutable(self):
        with pytest.raises(ValueError):
            sample_haar_orthogonal(4, 0)[0, 0] = 1.0

    def test_d1_sign_frequency(self):
        values = np.array([sample_haar_orthogonal(1, s)[0, 0] for s in range(10_000)])
        assert set(np.unique(values)) == {-1.0, 1.0}
        assert abs(np.mean(values > 0) - 0.5) <= 0.02

    def test_d16_first_entry_moments(self):
        q00 = np.array([sample_haar_orthogonal(16, s)[0, 0] for s in range(100_000)])
        n = len(q00)
        assert abs(q00.mean()) <= 3 * q00.std() / math.sqrt(n)
        sq = q00 ** 2
        assert abs(sq.mean() - 1 / 16) <= 3 * sq.std() / math.sqrt(n)

    def test_sign_correction_matters(self):
        # Plain LAPACK QR pins the sign of Q[0, 0] (its mean is about -0.42 at d=4).
        rng = child_rng(3)
        q = haar_orthogonal_draw(rng, 4, 20_000)
        assert np.all(np.abs(q[:, 0, :].mean(axis=0)) < 0.03)

    def test_rejects_bad_dim(self):
        with pytest.raises(DimensionError):
            sample_haar_orthogonal(0, 1)


class TestChi:
    def test_mean_square_is_dof(self):
        draws = chi_diagonal_draw(child_rng(11), 64, 1563).ravel()[:100_000]
        assert abs(np.mean(draws ** 2) / 64 - 1) <= 0.01

    def test_d1_half_normal_mean(self):
        draws = chi_diagonal_draw(child_rng(12), 1, 100_000).ravel()
        assert abs(draws.mean() / math.sqrt(2 / math.pi) - 1) <= 0.01

    def test_variance_matches_gamma_formula(self):
        mean = math.sqrt(2) * math.exp(math.lgamma(32.5) - math.lgamma(32))
        var = 64 - mean ** 2
        draws = chi_diagonal_draw(child_rng(13), 64, 1563).ravel()[:100_000]
        assert abs(np.var(draws) / var - 1) <= 0.02

    def test_positive_and_deterministic(self):
        s = sample_chi_diagonal(16, 4)
        assert s.shape == (16,) and np.all(s > 0)
        np.testing.assert_array_equal(s, sample_chi_diagonal(16, 4))


class TestSigns:
    def test_values(self):
        s = sample_sign_diagonal(64, 0)
        assert set(np.unique(s)) <= {-1.0, 1.0}

    def test_mean_zero(self):
        s = sign_diagonal_draw(child_rng(1), 16, 100_000)
        assert abs(s.mean()) <= 0.01

    def test_seeds_differ(self):
        assert not np.array_equal(sample_sign_diagonal(64, 1), sample_sign_diagonal(64, 2))
        np.testing.assert_array_equal(sample_sign_diagonal(64, 1), sample_sign_diagonal(64, 1))


class TestHdChain:
    @pytest.mark.parametrize("k", [1, 2, 3])
    @pytest.mark.parametrize("d", [2, 16, 256])
    def test_matches_dense_product(self, k, d):
        rng = child_rng(d, k)
        diags = sign_diagonal_draw(rng, d, k)
        x = rng.standard_normal(d)
        h = naive_hadamard(d)
        dense = np.eye(d)
        for s in diags:
            dense = h @ np.diag(s) @ dense
        np.testing.assert_allclose(apply_hd_chain(x, diags, 2.5), 2.5 * dense @ x, atol=1e-10)
        np.testing.assert_allclose(hd_chain_matrix(diags, 2.5), 2.5 * dense, atol=1e-10)

    @given(arrays(np.float64, 64, elements=finite), st.integers(1, 3), st.integers(0, 2 ** 32))
    @settings(max_examples=50)
    def test_norm_preserving(self, x, k, seed):
        diags = sign_diagonal_draw(child_rng(seed), 64, k)
        y = apply_hd_chain(x, diags, 1.0)
        assert abs(np.linalg.norm(y) - np.linalg.norm(x)) <= 1e-12 * (1 + np.linalg.norm(x))

    def test_identity_signs_is_fwht(self):
        x = np.random.default_rng(0).standard_normal(32)
        np.testing.assert_allclose(apply_hd_chain(x, [np.ones(32)]), fwht(x), atol=1e-15)

    @pytest.mark.parametrize("n", [0, 4])
    def test_block_count(self, n):
        with pytest.raises(ConfigurationError):
            apply_hd_chain(np.ones(4), [np.ones(4)] * n)

    def test_batched_diagonals(self):
        rng = child_rng(9)
        diags = sign_diagonal_draw(rng, 8, (5, 3))
        x = rng.standard_normal((5, 8))
        batched = apply_hd_chain(x, [diags[:, j] for j in range(3)], 2.0)
        for i in range(5):
            np.testing.assert_allclose(batched[i], apply_hd_chain(x[i], diags[i], 2.0), atol=1e-14)


def test_next_power_of_two():
    assert [next_power_of_two(n) for n in (1, 2, 3, 100, 128, 129)] == [1, 2, 4, 128, 128, 256]
