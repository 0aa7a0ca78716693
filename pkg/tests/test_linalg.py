import numpy as np
import pytest

from mvfeti.errors import (
    DimensionMismatch,
    IndefiniteMatrix,
    NegativeEigenvalueBeyondTolerance,
    NotSymmetric,
)
from mvfeti.linalg import factor_sym, inv_sqrt_sym, kernel_orthonormalize


def random_spd(n, rng, cond=1e4):
    """Dense SPD matrix with log-uniform spectrum, for oracle comparisons."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = np.exp(rng.uniform(np.log(1.0 / cond), 0.0, size=n))
    return Q @ np.diag(lam) @ Q.T


def free_laplacian(n):
    """1-D Laplacian stencil with free ends; rows sum to zero."""
    A = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    A[0, 0] = A[-1, -1] = 1.0
    return A


class TestFactorSym:
    def test_identity(self):
        F = factor_sym(np.eye(3), pivot_tol=1e-12)
        assert F.kernel_dim == 0
        e1 = np.array([1.0, 0.0, 0.0])
        np.testing.assert_array_equal(F.pseudo_solve(e1), e1)

    def test_free_laplacian_kernel_is_constant(self):
        A = free_laplacian(12)
        F = factor_sym(A)
        assert F.kernel_dim == 1
        expected = np.full(12, 1.0 / np.sqrt(12.0))
        k = F.kernel[:, 0]
        if k[0] < 0:
            k = -k
        np.testing.assert_allclose(k, expected, atol=1e-12)

    def test_spd_matches_dense_inverse(self):
        rng = np.random.default_rng(0)
        M = rng.standard_normal((50, 50))
        A = M.T @ M + np.eye(50)
        F = factor_sym(A)
        assert F.kernel_dim == 0
        Ainv = np.linalg.inv(A)          # brute-force oracle
        b = rng.standard_normal(50)
        np.testing.assert_allclose(F.pseudo_solve(b), Ainv @ b,
                                   rtol=0, atol=1e-10 * np.linalg.norm(b))

    def test_range_identity_semidefinite(self):
        # invariant: A @ pseudo_solve(y) == y for y in range(A)
        rng = np.random.default_rng(1)
        A = free_laplacian(30) * 3.0
        F = factor_sym(A)
        y = A @ rng.standard_normal(30)
        x = F.pseudo_solve(y)
        assert np.linalg.norm(A @ x - y) <= 1e-10 * np.linalg.norm(y)

    def test_kernel_quality(self):
        A = free_laplacian(25)
        F = factor_sym(A)
        for j in range(F.kernel_dim):
            assert np.linalg.norm(A @ F.kernel[:, j]) <= F.pivot_tolerance * np.abs(A).max() * 25

    def test_pseudo_solve_linearity(self):
        rng = np.random.default_rng(2)
        A = free_laplacian(20)
        F = factor_sym(A)
        x, y = rng.standard_normal(20), rng.standard_normal(20)
        a, b = 1.7, -0.4
        lhs = F.pseudo_solve(a * x + b * y)
        rhs = a * F.pseudo_solve(x) + b * F.pseudo_solve(y)
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * max(np.linalg.norm(rhs), 1.0)

    def test_spd_exact_solve_100(self):
        rng = np.random.default_rng(3)
        A = random_spd(100, rng)
        F = factor_sym(A)
        b = rng.standard_normal(100)
        x = F.pseudo_solve(b)
        assert np.linalg.norm(A @ x - b) / np.linalg.norm(b) <= 1e-10

    def test_not_symmetric(self):
        A = np.eye(4)
        A[0, 1] = 1e-3
        with pytest.raises(NotSymmetric):
            factor_sym(A)

    def test_indefinite(self):
        A = np.diag([1.0, -1.0])
        with pytest.raises(IndefiniteMatrix):
            factor_sym(A)

    def test_indefinite_hidden_pivot(self):
        # positive diagonal but a negative eigenvalue: caught at pivot level
        A = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(IndefiniteMatrix):
            factor_sym(A)

    def test_zero_matrix(self):
        F = factor_sym(np.zeros((4, 4)))
        assert F.kernel_dim == 4
        np.testing.assert_array_equal(F.pseudo_solve(np.ones(4)), np.zeros(4))


class TestPseudoSolveBlock:
    def test_identity_block(self):
        rng = np.random.default_rng(4)
        F = factor_sym(np.eye(6))
        B = rng.standard_normal((6, 3))
        np.testing.assert_array_equal(F.pseudo_solve_block(B), B)

    def test_width_one_matches_vector_bitwise(self):
        rng = np.random.default_rng(5)
        A = random_spd(15, rng)
        F = factor_sym(A)
        b = rng.standard_normal(15)
        np.testing.assert_array_equal(F.pseudo_solve_block(b[:, None])[:, 0],
                                      F.pseudo_solve(b))

    def test_batched_equals_per_column_bitwise(self):
        rng = np.random.default_rng(6)
        A = free_laplacian(20)
        F = factor_sym(A)
        B = A @ rng.standard_normal((20, 5))
        X = F.pseudo_solve_block(B)
        for j in range(5):
            np.testing.assert_array_equal(X[:, j], F.pseudo_solve(B[:, j]))

    def test_semidefinite_residual(self):
        rng = np.random.default_rng(7)
        A = free_laplacian(20)
        F = factor_sym(A)
        assert F.kernel_dim == 1
        B = A @ rng.standard_normal((20, 3))    # columns in range(A)
        X = F.pseudo_solve_block(B)
        for j in range(3):
            assert np.linalg.norm(A @ X[:, j] - B[:, j]) <= 1e-10 * np.linalg.norm(B[:, j])

    def test_dimension_mismatch(self):
        F = factor_sym(np.eye(3))
        with pytest.raises(DimensionMismatch):
            F.pseudo_solve_block(np.zeros((4, 2)))


class TestKernelOrthonormalize:
    def test_duplicate_columns(self):
        e1 = np.array([1.0, 0.0, 0.0])
        R = np.column_stack([e1, e1])
        out = kernel_orthonormalize(R, 1e-12)
        assert out.shape == (3, 1)
        np.testing.assert_allclose(np.abs(out[:, 0]), e1, atol=1e-14)

    def test_zero_matrix(self):
        out = kernel_orthonormalize(np.zeros((5, 3)), 1e-12)
        assert out.shape == (5, 0)

    def test_rank_two_projection_identity(self):
        rng = np.random.default_rng(8)
        R = rng.standard_normal((4, 2)) @ rng.standard_normal((2, 3))
        out = kernel_orthonormalize(R, 1e-10)
        assert out.shape == (4, 2)
        np.testing.assert_allclose(out @ (out.T @ R), R, atol=1e-10)


class TestInvSqrtSym:
    def test_scaled_identity(self):
        N, rank = inv_sqrt_sym(4.0 * np.eye(3), 1e-12)
        assert rank == 3
        np.testing.assert_allclose(N, 0.5 * np.eye(3), atol=1e-14)

    def test_rank_filtering(self):
        N, rank = inv_sqrt_sym(np.diag([1.0, 1e-18]), 1e-12)
        assert rank == 1
        np.testing.assert_allclose(N, np.array([[1.0], [0.0]]), atol=1e-14)

    def test_congruence_identity(self):
        rng = np.random.default_rng(9)
        M = random_spd(5, rng, cond=1e3)
        N, rank = inv_sqrt_sym(M, 1e-12)
        assert rank == 5
        np.testing.assert_allclose(N.T @ M @ N, np.eye(5), atol=1e-10)

    def test_negative_eigenvalue_raises(self):
        M = np.diag([1.0, -1e-3])
        with pytest.raises(NegativeEigenvalueBeyondTolerance):
            inv_sqrt_sym(M, 1e-8)

    def test_zero_matrix_rank_zero(self):
        N, rank = inv_sqrt_sym(np.zeros((3, 3)), 1e-8)
        assert rank == 0
        assert N.shape == (3, 0)
