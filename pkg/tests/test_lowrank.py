"""Tests for the truncated-SVD and nonnegative-factorization baselines.

The scale-minimized relative error is checked against an independent
golden-section search over the scalar, and the truncation error of the
metastable demo walk is pinned to values recorded from a long power run.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nneig.lowrank import NMFResult, SVDTriple, best_scaled_error, nmf, truncated_svd
from nneig.markovgrid import demo_clustered_walk
from nneig.solvers import power_reference


def golden_scale_error(X, Xstar, lo=-100.0, hi=100.0, iters=200):
    """Oracle: minimize ||a X - Xstar|| over the scalar by golden section.

    The objective is a convex parabola in ``a``, so the bracketed search
    converges to the same minimum the closed form produces.
    """
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    f = lambda a: np.linalg.norm(a * X - Xstar)
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    for _ in range(iters):
        if f(c) < f(d):
            b, d = d, c
            c = b - invphi * (b - a)
        else:
            a, c = c, d
            d = a + invphi * (b - a)
    return f((a + b) / 2.0) / np.linalg.norm(Xstar)


def clustered_stationary():
    op = demo_clustered_walk()
    ref = power_reference(op, tol=1e-12)
    return ref.X / np.linalg.norm(ref.X)


entries = st.floats(min_value=-5, max_value=5, allow_nan=False,
                    allow_infinity=False)


class TestTruncatedSVD:
    def test_clustered_walk_rank2_error(self):
        # frozen from a tol=1e-12 power run of the metastable demo walk
        X = clustered_stationary()
        X2 = truncated_svd(X, 2).reconstruct()
        assert np.linalg.norm(X - X2) == pytest.approx(0.53368, abs=5e-4)

    def test_clustered_walk_rank2_negatives(self):
        X2 = truncated_svd(clustered_stationary(), 2).reconstruct()
        assert int(np.sum(X2 < 0)) == 2

    def test_orthonormal_factors_and_ordering(self):
        rng = np.random.default_rng(5)
        M = rng.standard_normal((7, 5))
        tri = truncated_svd(M, 3)
        np.testing.assert_allclose(tri.U.T @ tri.U, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(tri.Vt @ tri.Vt.T, np.eye(3), atol=1e-12)
        assert np.all(np.diff(tri.s) <= 0) and np.all(tri.s >= 0)

    def test_exact_on_low_rank_input(self):
        rng = np.random.default_rng(6)
        M = rng.standard_normal((8, 2)) @ rng.standard_normal((2, 6))
        np.testing.assert_allclose(truncated_svd(M, 2).reconstruct(), M,
                                   atol=1e-12)

    def test_full_rank_is_identity(self):
        rng = np.random.default_rng(7)
        M = rng.standard_normal((4, 4))
        np.testing.assert_allclose(truncated_svd(M, 4).reconstruct(), M,
                                   atol=1e-12)

    @given(arrays(float, (5, 4), elements=entries),
           st.integers(min_value=1, max_value=4))
    @settings(max_examples=100, deadline=None)
    def test_beats_random_rank_r_matrix(self, M, r):
        # Eckart-Young: no rank-r matrix comes closer in Frobenius norm
        tri = truncated_svd(M, r)
        err = np.linalg.norm(M - tri.reconstruct())
        rng = np.random.default_rng(0)
        for _ in range(5):
            Y = rng.standard_normal((5, r)) @ rng.standard_normal((r, 4))
            assert err <= np.linalg.norm(M - Y) + 1e-9

    def test_rank_bounds_rejected(self):
        M = np.eye(3)
        with pytest.raises(ValueError):
            truncated_svd(M, 0)
        with pytest.raises(ValueError):
            truncated_svd(M, 4)


class TestNMF:
    def test_error_monotone_on_demo(self):
        res = nmf(clustered_stationary(), 2, seed=3)
        assert np.all(np.diff(res.rel_errors) <= 1e-14)

    def test_factors_nonnegative_exactly(self):
        res = nmf(clustered_stationary(), 2, seed=3)
        assert np.all(res.W >= 0) and np.all(res.H >= 0)

    def test_never_beats_svd_at_equal_rank(self):
        X = clustered_stationary()
        svd_err = np.linalg.norm(X - truncated_svd(X, 2).reconstruct())
        res = nmf(X, 2, seed=3)
        assert np.linalg.norm(X - res.W @ res.H) >= svd_err - 1e-12

    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_monotone_for_any_seed(self, seed):
        rng = np.random.default_rng(11)
        M = rng.random((6, 5))
        res = nmf(M, 3, n_iters=60, seed=seed)
        assert np.all(np.diff(res.rel_errors) <= 1e-13)
        assert np.all(res.W >= 0) and np.all(res.H >= 0)

    def test_recovers_exact_nonnegative_low_rank(self):
        rng = np.random.default_rng(12)
        M = rng.random((8, 3)) @ rng.random((3, 6))
        res = nmf(M, 3, n_iters=2000, seed=1)
        assert res.rel_errors[-1] < 1e-6

    def test_zero_matrix(self):
        res = nmf(np.zeros((4, 3)), 2)
        assert np.all(res.W == 0) and np.all(res.H == 0)
        assert np.all(res.rel_errors == 0)

    def test_negative_input_rejected(self):
        M = np.eye(3)
        M[0, 1] = -0.5
        with pytest.raises(ValueError, match="nonnegative"):
            nmf(M, 2)

    def test_rank_bounds_rejected(self):
        with pytest.raises(ValueError):
            nmf(np.ones((3, 3)), 0)


class TestBestScaledError:
    @given(arrays(float, (4, 3), elements=entries),
           arrays(float, (4, 3), elements=entries))
    @settings(max_examples=150, deadline=None)
    def test_matches_golden_section_oracle(self, X, Xstar):
        if np.linalg.norm(X) < 1e-6 or np.linalg.norm(Xstar) < 1e-6:
            return
        got = best_scaled_error(X, Xstar)
        want = golden_scale_error(X, Xstar)
        assert got == pytest.approx(want, abs=1e-6)
        assert got <= want + 1e-12

    @given(arrays(float, (3, 3), elements=entries),
           st.floats(min_value=0.01, max_value=50).flatmap(
               lambda v: st.sampled_from([v, -v])))
    @settings(max_examples=100, deadline=None)
    def test_scale_invariant_in_first_argument(self, X, c):
        if np.linalg.norm(X) < 1e-6:
            return
        Xstar = np.ones((3, 3))
        assert best_scaled_error(c * X, Xstar) == pytest.approx(
            best_scaled_error(X, Xstar), rel=1e-9, abs=1e-12)

    def test_zero_error_for_scaled_copy(self):
        rng = np.random.default_rng(2)
        Xstar = rng.standard_normal((5, 5))
        assert best_scaled_error(-3.7 * Xstar, Xstar) < 1e-12

    def test_orthogonal_directions_give_full_error(self):
        X = np.array([[1.0, 0.0], [0.0, 0.0]])
        Xstar = np.array([[0.0, 0.0], [0.0, 2.0]])
        assert best_scaled_error(X, Xstar) == pytest.approx(1.0)

    def test_rejects_degenerate_inputs(self):
        with pytest.raises(ValueError, match="nonzero"):
            best_scaled_error(np.zeros((2, 2)), np.eye(2))
        with pytest.raises(ValueError, match="nonzero"):
            best_scaled_error(np.eye(2), np.zeros((2, 2)))
        with pytest.raises(ValueError, match="shape"):
            best_scaled_error(np.eye(2), np.eye(3))
