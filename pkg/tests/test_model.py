import math

import numpy as np
import pytest
import scipy.linalg

import ptosc
from ptosc.matrices import interior, rel_residual
from ptosc.model import spectrum_crosscheck


class TestParams:
    def test_default_phase_is_half_branch(self, params):
        assert params.theta == pytest.approx(params.lam + math.pi / 2)
        assert params.branch == ptosc.HALF_INTEGER_PI

    def test_integer_branch(self):
        p = ptosc.ModelParams(z_star=0.3 + 0.2j, theta=math.atan2(0.2, 0.3))
        assert p.branch == ptosc.INTEGER_PI

    def test_off_branch_phase_rejected(self):
        p = ptosc.ModelParams(z_star=0.3 + 0.2j, theta=0.1)
        with pytest.raises(ptosc.BranchError, match="admissible families"):
            p.branch

    def test_zero_shift_phase_convention(self):
        p = ptosc.ModelParams(z_star=0.0)
        assert p.lam == 0.0
        assert p.theta == pytest.approx(math.pi / 2)

    @pytest.mark.parametrize("kwargs", [
        dict(z_star=0.1, cutoff=7),
        dict(z_star=0.1, cutoff=300),
        dict(z_star=0.1, margin=1),
        dict(z_star=0.1, cutoff=16, margin=8),
        dict(z_star=float("nan")),
    ])
    def test_invalid_params_rejected(self, kwargs):
        with pytest.raises(ValueError):
            ptosc.ModelParams(**kwargs)


class TestLadderOps:
    def test_defining_matrix_elements(self):
        a, a_dag, x, p = ptosc.ladder_ops(3)
        assert a[0, 1] == 1.0
        assert a[1, 2] == pytest.approx(math.sqrt(2))
        assert np.count_nonzero(a) == 2
        np.testing.assert_array_equal(a_dag, a.conj().T)

    def test_truncation_corner_commutator(self):
        a, a_dag, _, _ = ptosc.ladder_ops(3)
        comm = a @ a_dag - a_dag @ a
        np.testing.assert_allclose(comm, np.diag([1.0, 1.0, -2.0]), atol=1e-15)

    def test_position_element(self):
        _, _, x, _ = ptosc.ladder_ops(3)
        assert x[0, 1] == pytest.approx(1 / math.sqrt(2))

    def test_too_small_dimension(self):
        with pytest.raises(ValueError):
            ptosc.ladder_ops(1)


class TestOperators:
    def test_harmonic_limit(self):
        p = ptosc.ModelParams(z_star=0.0, theta=0.0, cutoff=16, margin=4)
        ops = ptosc.build_operators(p)
        np.testing.assert_array_equal(ops.b, ops.a)
        np.testing.assert_allclose(ops.h, np.diag(np.arange(16) + 0.5), atol=0)

    def test_diagonal_exact_for_any_shift(self, ops):
        np.testing.assert_array_equal(np.diagonal(ops.h).real,
                                      np.arange(64) + 0.5)
        assert np.diagonal(ops.h).imag.max() == 0.0

    def test_ladder_vs_quadrature_form(self, ops):
        assert ops.h_xp_interior_residual < 1e-12
        assert rel_residual(interior(ops.h, 2), interior(ops.h_xp, 2)) < 1e-12

    def test_shifted_commutator(self, ops, params):
        comm = ops.b @ ops.b_sharp - ops.b_sharp @ ops.b
        eye = np.eye(64, dtype=complex)
        assert rel_residual(interior(comm, params.margin),
                            interior(eye, params.margin)) < 1e-12

    def test_pseudo_quadratures_definitions(self, ops):
        np.testing.assert_array_equal(
            ops.big_x, (ops.b + ops.b_sharp) / math.sqrt(2))
        np.testing.assert_array_equal(
            ops.big_p, -1j * (ops.b - ops.b_sharp) / math.sqrt(2))

    def test_xp_commutator(self, ops, params):
        comm = ops.big_x @ ops.big_p - ops.big_p @ ops.big_x
        eye = 1j * np.eye(64, dtype=complex)
        assert rel_residual(interior(comm, params.margin),
                            interior(eye, params.margin)) < 1e-11

    def test_hamiltonian_from_pseudo_quadratures(self, ops, params):
        quad = 0.5 * (ops.big_x @ ops.big_x + ops.big_p @ ops.big_p)
        assert rel_residual(interior(ops.h, params.margin),
                            interior(quad, params.margin)) < 1e-11

    def test_rotation_identities_exact(self, ops, params):
        eye = np.eye(64, dtype=complex)
        ct, st = math.cos(params.theta), math.sin(params.theta)
        x = ct * ops.big_x + st * ops.big_p + params.z_star * eye
        p = -st * ops.big_x + ct * ops.big_p + 1j * params.z_star * eye
        assert rel_residual(ops.x, x) < 1e-13
        assert rel_residual(ops.p, p) < 1e-13


class TestSpectrum:
    @pytest.mark.parametrize("seed", range(4))
    def test_reality_for_random_shifts(self, seed):
        rng = np.random.default_rng(seed)
        z = (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) / math.sqrt(2)
        lam = math.atan2(z.imag, z.real) if z != 0 else 0.0
        theta = lam + rng.integers(-2, 3) * math.pi / 2
        p = ptosc.ModelParams(z_star=z, theta=theta)
        ops = ptosc.build_operators(p)
        np.testing.assert_array_equal(np.diagonal(ops.h).real, np.arange(64) + 0.5)
        assert spectrum_crosscheck(ops, p.margin) < 1e-8


class TestEigenbasis:
    def test_vacuum_column(self, system):
        np.testing.assert_array_equal(system.basis[:, 0],
                                      np.eye(64, dtype=complex)[:, 0])

    def test_first_excited_column(self, params, system):
        expected = np.zeros(64, dtype=complex)
        expected[0] = -params.z_star * math.sqrt(2)
        expected[1] = 1.0
        expected *= np.exp(-1j * params.theta)
        np.testing.assert_allclose(system.basis[:, 1], expected, atol=1e-15)

    def test_upper_triangular_with_unit_modulus_diagonal(self, system):
        assert np.allclose(np.tril(system.basis, -1), 0.0)
        np.testing.assert_allclose(np.abs(np.diagonal(system.basis)), 1.0,
                                   atol=1e-14)

    def test_columns_match_repeated_laddering(self, ops, system):
        vec = np.zeros(64, dtype=complex)
        vec[0] = 1.0
        for n in range(1, 32):
            vec = ops.b_sharp @ vec / math.sqrt(n)
            assert np.abs(vec - system.basis[:, n]).max() < 1e-12

    def test_eigenpairs(self, ops, system, params):
        m = params.margin
        assert rel_residual(interior(ops.h @ system.basis, m),
                            interior(system.basis * system.energies, m)) < 1e-10
        assert rel_residual(interior(ops.h_dag @ system.duals, m),
                            interior(system.duals * system.energies, m)) < 1e-10


class TestDuals:
    def test_harmonic_limit_duals_are_phases(self):
        p = ptosc.ModelParams(z_star=0.0, cutoff=16, margin=4)
        system = ptosc.build_system(p)
        expected = np.diag(np.exp(-1j * np.arange(16) * p.theta))
        np.testing.assert_allclose(system.duals, expected, atol=1e-15)

    def test_biorthonormality(self, system):
        gram = system.duals.conj().T @ system.basis
        assert rel_residual(gram, np.eye(64, dtype=complex)) < 1e-12

    def test_matches_triangular_solve(self, system):
        solved = scipy.linalg.solve_triangular(
            system.basis.conj().T, np.eye(64, dtype=complex), lower=True)
        for n in range(64):
            dev = np.linalg.norm(system.duals[:, n] - solved[:, n])
            assert dev < 1e-10 * np.linalg.norm(solved[:, n])

    def test_lower_triangular(self, system):
        assert np.allclose(np.triu(system.duals, 1), 0.0)

    def test_rejects_foreign_matrix(self):
        with pytest.raises(ValueError):
            ptosc.dual_basis(np.triu(np.ones((8, 8), dtype=complex)))


class TestOverlapFormula:
    def test_vacuum_overlap(self, params):
        assert ptosc.overlap_formula(0, 0, params) == pytest.approx(1.0)

    def test_first_off_diagonal(self, params):
        expected = -math.sqrt(2) * np.exp(-1j * params.theta) * params.z_star
        assert ptosc.overlap_formula(0, 1, params) == pytest.approx(expected)

    def test_self_overlap_first_excited(self, params):
        # norm of the first excited eigencolumn is 1 + 2|z|^2
        expected = 1.0 + 2.0 * params.z_abs2
        assert ptosc.overlap_formula(1, 1, params) == pytest.approx(expected)

    @pytest.mark.parametrize("z", [0.3 + 0.2j, -0.45 + 0.85j])
    def test_matches_gram_matrix(self, z):
        p = ptosc.ModelParams(z_star=z)
        gram = (lambda b: b.conj().T @ b)(ptosc.b_basis(p))
        for m in range(12):
            for n in range(12):
                value = ptosc.overlap_formula(m, n, p)
                assert abs(value - gram[m, n]) <= 1e-10 * max(1.0, abs(gram[m, n]))

    def test_high_levels_stay_finite(self, params):
        value = ptosc.overlap_formula(250, 251, ptosc.ModelParams(
            z_star=0.3 + 0.2j, cutoff=256, margin=8))
        assert np.isfinite(value.real) and np.isfinite(value.imag)

    def test_zero_shift_collapses_to_kronecker(self):
        p = ptosc.ModelParams(z_star=0.0, cutoff=16, margin=4)
        for m in range(6):
            for n in range(6):
                assert ptosc.overlap_formula(m, n, p) == (1.0 if m == n else 0.0)

    def test_out_of_range_rejected(self, params):
        with pytest.raises(ValueError):
            ptosc.overlap_formula(0, 64, params)
