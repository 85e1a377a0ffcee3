import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from ptosc.matrices import (frob, gauss_hermite, herm_eig, herm_exp, interior,
                            mat_exp, rel_residual)


def gaussian_matrix(seed, n, norm):
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return raw * (norm / frob(raw))


class TestMatExp:
    def test_zero_matrix_gives_identity(self):
        np.testing.assert_allclose(mat_exp(np.zeros((5, 5))), np.eye(5), atol=1e-15)

    def test_diagonal_case(self):
        out = mat_exp(np.diag([math.log(2.0), 0.0]))
        np.testing.assert_allclose(out, np.diag([2.0, 1.0]), rtol=1e-14)

    def test_hermitian_matches_eigenpath(self):
        a = gaussian_matrix(7, 16, 4.0)
        s = a + a.conj().T
        assert rel_residual(mat_exp(s), herm_exp(s)) < 1e-11

    def test_hermitian_result_positive_definite(self):
        a = gaussian_matrix(3, 12, 5.0)
        s = a + a.conj().T
        out = mat_exp(s)
        assert rel_residual(out, out.conj().T) < 1e-13
        assert np.linalg.eigvalsh(0.5 * (out + out.conj().T)).min() > 0

    def test_agrees_with_scipy(self):
        a = gaussian_matrix(11, 24, 8.0)
        np.testing.assert_allclose(mat_exp(a), scipy.linalg.expm(a),
                                   rtol=0, atol=1e-11 * frob(scipy.linalg.expm(a)))

    def test_large_norm_semigroup(self):
        # exercises the squaring path well beyond the Pade threshold
        a = gaussian_matrix(5, 8, 48.0)
        a = 1j * (a + a.conj().T)  # skew spectrum keeps exp bounded
        np.testing.assert_allclose(mat_exp(a) @ mat_exp(-a), np.eye(8), atol=1e-10)

    def test_norm_overflow_rejected(self):
        with pytest.raises(ValueError, match="too large to exponentiate"):
            mat_exp(np.eye(4) * 1e7)

    def test_nonfinite_rejected(self):
        bad = np.zeros((3, 3))
        bad[0, 0] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            mat_exp(bad)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**31), n=st.integers(2, 24),
           norm=st.floats(0.01, 5.0))
    def test_inverse_identity_property(self, seed, n, norm):
        a = gaussian_matrix(seed, n, norm)
        assert rel_residual(mat_exp(a) @ mat_exp(-a), np.eye(n)) < 1e-10

    def test_inverse_identity_at_contract_scale(self):
        a = gaussian_matrix(29, 64, 5.0)
        assert rel_residual(mat_exp(a) @ mat_exp(-a), np.eye(64)) < 1e-10


class TestHermEig:
    def test_diagonal_values_ascend(self):
        values, _ = herm_eig(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(values, [1.0, 3.0])

    def test_symmetry_forced_pair(self):
        values, _ = herm_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(values, [-1.0, 1.0], atol=1e-15)

    def test_reconstruction(self):
        a = gaussian_matrix(17, 16, 3.0)
        s = a + a.conj().T
        values, vectors = herm_eig(s)
        assert rel_residual((vectors * values) @ vectors.conj().T, s) < 1e-12
        assert rel_residual(vectors @ vectors.conj().T, np.eye(16)) < 1e-13

    def test_residual_contract(self):
        a = gaussian_matrix(23, 32, 7.0)
        s = a + a.conj().T
        values, vectors = herm_eig(s)
        assert frob(s @ vectors - vectors * values) < 1e-11 * frob(s)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError, match="not Hermitian"):
            herm_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestGaussHermite:
    def test_single_node_rule(self):
        rule = gauss_hermite(1)
        np.testing.assert_allclose(rule.nodes, [0.0])
        np.testing.assert_allclose(rule.weights, [math.sqrt(math.pi)])

    def test_two_node_rule_roots(self):
        # nodes must be the roots of 4x^2 - 2, found independently
        roots = np.sort(np.roots([4.0, 0.0, -2.0]))
        rule = gauss_hermite(2)
        np.testing.assert_allclose(rule.nodes, roots, atol=1e-14)

    def test_second_moment(self):
        rule = gauss_hermite(2)
        assert abs(rule.integrate(rule.nodes**2) - math.sqrt(math.pi) / 2) < 1e-14

    @pytest.mark.parametrize("k", [5, 16, 64, 128])
    def test_even_moments_exact(self, k):
        rule = gauss_hermite(k)
        moment = math.sqrt(math.pi)
        for j in range(k):
            value = rule.integrate(rule.nodes ** (2 * j))
            assert abs(value - moment) < 1e-10 * moment
            moment *= (2 * j + 1) / 2.0

    def test_weight_sum_and_symmetry(self):
        rule = gauss_hermite(40)
        assert abs(rule.weights.sum() - math.sqrt(math.pi)) < 1e-12
        np.testing.assert_allclose(rule.nodes, -rule.nodes[::-1], atol=1e-14)
        assert (rule.weights > 0).all()

    def test_zero_order_rejected(self):
        with pytest.raises(ValueError):
            gauss_hermite(0)


class TestHelpers:
    def test_interior_block(self):
        m = np.arange(16.0).reshape(4, 4)
        np.testing.assert_array_equal(interior(m, 1), m[:3, :3])
        with pytest.raises(ValueError):
            interior(m, 4)

    def test_rel_residual_zero_for_equal(self):
        assert rel_residual(np.zeros((2, 2)), np.zeros((2, 2))) == 0.0
        m = np.ones((2, 2))
        assert rel_residual(m, m) == 0.0
