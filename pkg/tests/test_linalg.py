"""Tests for the dense linear-algebra kernels."""

import numpy as np
import pytest

import oracles
from wavetriple import linalg
from wavetriple.errors import NotPositiveDefiniteError, SingularMatrixError


def random_spd(rng, n):
    a = rng.standard_normal((n, n))
    return a @ a.T + n * np.eye(n)


class TestCholesky:
    def test_hand_factor(self):
        low = linalg.cholesky(np.array([[4.0, 2.0], [2.0, 2.0]]))
        assert np.allclose(low, [[2.0, 0.0], [1.0, 1.0]], atol=1e-15)

    def test_indefinite_rejected(self):
        with pytest.raises(NotPositiveDefiniteError):
            linalg.cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_reconstruction_and_triangularity(self):
        rng = np.random.default_rng(11)
        for n in (1, 2, 5, 20, 40):
            mat = random_spd(rng, n)
            low = linalg.cholesky(mat)
            assert np.allclose(np.triu(low, 1), 0.0)
            scale = np.abs(mat).max()
            assert np.abs(low @ low.T - mat).max() <= 1e-12 * scale

    def test_semidefinite_pivot_breakdown(self):
        # Rank-1 PSD matrix: second pivot collapses to rounding level.
        v = np.array([1.0, 2.0, 3.0])
        with pytest.raises(NotPositiveDefiniteError, match="pivot"):
            linalg.cholesky(np.outer(v, v))

    def test_empty_matrix(self):
        assert linalg.cholesky(np.zeros((0, 0))).shape == (0, 0)

    def test_input_not_mutated(self):
        mat = np.array([[4.0, 2.0], [2.0, 2.0]])
        ref = mat.copy()
        linalg.cholesky(mat)
        assert np.array_equal(mat, ref)


class TestLuSolve:
    def test_diagonal_system(self):
        x = linalg.lu_solve(np.diag([2.0, 4.0]), np.array([2.0, 4.0]))
        assert np.allclose(x, [1.0, 1.0], atol=1e-15)

    @pytest.mark.filterwarnings("ignore::scipy.linalg.LinAlgWarning")
    def test_zero_matrix_singular(self):
        with pytest.raises(SingularMatrixError):
            linalg.lu_solve(np.zeros((3, 3)), np.ones(3))

    def test_random_residuals(self):
        rng = np.random.default_rng(5)
        for n in (2, 7, 31):
            mat = rng.standard_normal((n, n)) + n * np.eye(n)
            rhs = rng.standard_normal(n)
            x = linalg.lu_solve(mat, rhs)
            bound = 1e-10 * np.abs(mat).max() * max(np.abs(x).max(), 1.0)
            assert np.abs(mat @ x - rhs).max() <= bound

    def test_factorization_reuse_and_complex_rhs(self):
        rng = np.random.default_rng(6)
        mat = rng.standard_normal((8, 8)) + 8 * np.eye(8)
        fact = linalg.LuFactorization(mat)
        rhs = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        x = fact.solve(rhs)
        assert np.abs(mat @ x - rhs).max() < 1e-10
        # Matrix-valued right-hand side.
        block = rng.standard_normal((8, 3))
        assert np.abs(mat @ fact.solve(block) - block).max() < 1e-10

    @pytest.mark.filterwarnings("ignore::scipy.linalg.LinAlgWarning")
    def test_nearly_singular_detected(self):
        mat = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-16]])
        with pytest.raises(SingularMatrixError):
            linalg.LuFactorization(mat)


class TestEig:
    def test_rotation_pair(self):
        got = linalg.eig_nonsymmetric(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        assert np.allclose(got.values, [-1j, 1j], atol=1e-14)

    def test_cube_roots_of_unity_companion(self):
        got = linalg.eig_nonsymmetric(np.array([[0.0, 1.0], [-1.0, -1.0]]))
        want = np.array([(-1 - 1j * np.sqrt(3)) / 2, (-1 + 1j * np.sqrt(3)) / 2])
        assert np.allclose(got.values, want, atol=1e-14)

    def test_diagonal_sorting(self):
        got = linalg.eig_nonsymmetric(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(got.values, [1.0, 2.0, 3.0], atol=1e-14)

    def test_trace_and_determinant_invariants(self):
        rng = np.random.default_rng(12)
        for n in (2, 3, 8, 33, 64):
            mat = rng.standard_normal((n, n))
            got = linalg.eig_nonsymmetric(mat)
            scale = np.abs(mat).max()
            assert abs(got.values.sum().real - np.trace(mat)) <= 1e-9 * scale * n
            assert abs(got.values.sum().imag) <= 1e-9 * scale * n
            det = oracles.elimination_determinant(mat.tolist())
            prod = np.prod(got.values)
            assert abs(prod - det) <= 1e-6 * max(abs(det), 1e-300)

    def test_conjugate_pairing(self):
        rng = np.random.default_rng(13)
        mat = rng.standard_normal((12, 12))
        values = linalg.eig_nonsymmetric(mat).values
        conj = np.sort_complex(values.conj())
        assert np.allclose(np.sort_complex(values), conj, atol=1e-9)

    def test_residuals_recomputed_small(self):
        rng = np.random.default_rng(14)
        mat = rng.standard_normal((20, 20))
        got = linalg.eig_nonsymmetric(mat)
        norms = np.linalg.norm(got.vectors, axis=0)
        assert np.allclose(norms, 1.0, atol=1e-12)
        assert got.residuals.max() <= 1e-10 * np.abs(mat).max() * 20


class TestPencil:
    def test_hand_pencil(self):
        gram = np.array([[2.0, 0.0], [0.0, 1.0]])
        dyn = np.array([[0.0, 1.0], [-1.0, 0.0]])
        got = linalg.generalized_eig(gram, dyn)
        want = np.array([-1j, 1j]) / np.sqrt(2.0)
        assert np.allclose(got.values, want, atol=1e-14)

    def test_reduction_is_congruent(self):
        rng = np.random.default_rng(21)
        gram = random_spd(rng, 6)
        op = rng.standard_normal((6, 6))
        b, low = linalg.generalized_to_standard(gram, op)
        assert np.abs(low @ low.T - gram).max() <= 1e-12 * np.abs(gram).max()
        assert np.abs(low @ b @ low.T - op).max() <= 1e-10 * np.abs(op).max()

    @pytest.mark.parametrize("n", [2, 3])
    def test_matches_characteristic_polynomial_oracle(self, n):
        rng = np.random.default_rng(30 + n)
        for _ in range(25):
            gram = random_spd(rng, n)
            op = rng.standard_normal((n, n))
            got = linalg.generalized_eig(gram, op).values
            want = oracles.pencil_eigenvalues(gram.tolist(), op.tolist())
            scale = 1.0 + max(abs(z) for z in want)
            assert oracles.match_roots(got, want) <= 1e-8 * scale

    def test_vectors_unit_gram_norm_and_residuals(self):
        rng = np.random.default_rng(22)
        gram = random_spd(rng, 10)
        op = rng.standard_normal((10, 10))
        got = linalg.generalized_eig(gram, op)
        for k in range(len(got)):
            z = got.vectors[:, k]
            assert abs(np.real(np.conj(z) @ gram @ z) - 1.0) < 1e-8
            raw = np.linalg.norm(op @ z - got.values[k] * (gram @ z))
            denom = np.linalg.norm(gram @ z) * (1.0 + abs(got.values[k]))
            assert abs(got.residuals[k] - raw / denom) < 1e-12
        assert got.residuals.max() < 1e-10

    def test_indefinite_gram_rejected(self):
        with pytest.raises(NotPositiveDefiniteError):
            linalg.generalized_eig(np.array([[1.0, 0.0], [0.0, -1.0]]), np.eye(2))
