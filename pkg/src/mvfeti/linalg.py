"""Dense symmetric linear algebra at pattern scale.

Factorization of symmetric positive semidefinite matrices with kernel
detection, pseudo-inverse solves (single and multi right-hand side),
column-space orthonormalization and inverse square roots of small
symmetric matrices.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import (
    DimensionMismatch,
    IndefiniteMatrix,
    NegativeEigenvalueBeyondTolerance,
    NotSymmetric,
)

DEFAULT_PIVOT_TOL = 1e-10


class SymFactorization:
    """Pivoted Cholesky factorization of a symmetric PSD matrix.

    Stores the rank-revealing factor P^T A P = L L^T together with an
    orthonormal basis of the numerical kernel.  ``pseudo_solve`` returns the
    minimum-norm least-squares solution: right-hand sides are projected onto
    the range of A, solutions onto its orthogonal complement of the kernel.

    Immutable after construction; safe to share between concurrent solves.
    """

    def __init__(self, order, rank, piv, lower_factor, kernel, pivot_tolerance):
        self.order = order
        self.rank = rank
        self._piv = piv
        self._L = lower_factor          # (order, rank), [L11; L21]
        self.kernel = kernel            # (order, kernel_dim), orthonormal
        self.pivot_tolerance = pivot_tolerance

    @property
    def kernel_dim(self):
        return self.kernel.shape[1]

    def _solve_vec(self, y):
        """Minimum-norm least-squares solve for a single 1-D right-hand side.

        Every multi-column entry point funnels through this routine so that
        batched solves are bit-identical to column-by-column solves; the
        contiguous copy keeps BLAS reductions independent of the caller's
        memory layout.
        """
        r = self.rank
        y = np.ascontiguousarray(y)
        if self.kernel_dim:
            y = y - self.kernel @ (self.kernel.T @ y)
        w = y[self._piv]
        x1 = np.zeros(self.order)
        if r:
            L11 = self._L[:r, :]
            z = sla.solve_triangular(L11, w[:r], lower=True, check_finite=False)
            x1[:r] = sla.solve_triangular(L11, z, lower=True, trans=1,
                                          check_finite=False)
        x = np.empty(self.order)
        x[self._piv] = x1
        if self.kernel_dim:
            x = x - self.kernel @ (self.kernel.T @ x)
        return x

    def pseudo_solve(self, y):
        """Apply the pseudo-inverse to one right-hand side vector."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.order,):
            raise DimensionMismatch(
                f"right-hand side has shape {y.shape}, expected ({self.order},)")
        return self._solve_vec(y)

    def pseudo_solve_block(self, B):
        """Apply the pseudo-inverse to every column of a block.

        Column j of the result equals ``pseudo_solve(B[:, j])`` bit for bit;
        batching is an interface-level grouping, never a numerical shortcut.
        """
        B = np.asarray(B, dtype=float)
        if B.ndim != 2 or B.shape[0] != self.order:
            raise DimensionMismatch(
                f"block has shape {B.shape}, expected ({self.order}, k)")
        out = np.empty_like(B)
        for j in range(B.shape[1]):
            out[:, j] = self._solve_vec(B[:, j])
        return out


def factor_sym(A, pivot_tol=DEFAULT_PIVOT_TOL):
    """Factor a symmetric positive semidefinite matrix with diagonal pivoting.

    Parameters
    ----------
    A : (n, n) array_like
        Symmetric PSD matrix.  Symmetry is enforced to 1e-12 relative.
    pivot_tol : float
        Relative pivot threshold; pivots below ``pivot_tol * max(diag)`` end
        the factorization and define the kernel dimension.

    Returns
    -------
    SymFactorization

    Raises
    ------
    NotSymmetric
        If ``max |A - A^T| > 1e-12 * max |A|``.
    IndefiniteMatrix
        If a strictly negative pivot beyond tolerance is met.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if n == 0:
        return SymFactorization(0, 0, np.empty(0, dtype=np.intp),
                                np.empty((0, 0)), np.empty((0, 0)), pivot_tol)
    scale = np.abs(A).max()
    if np.abs(A - A.T).max() > 1e-12 * max(scale, 1e-300):
        raise NotSymmetric("matrix is not symmetric within 1e-12 relative")
    A = 0.5 * (A + A.T)

    diag = np.diag(A)
    max_diag = diag.max() if n else 0.0
    if max_diag < 0.0 or diag.min() < -pivot_tol * max(max_diag, 0.0):
        raise IndefiniteMatrix("negative diagonal entry beyond pivot tolerance")
    if max_diag <= 0.0:
        # numerically the zero matrix: everything is kernel
        kernel = np.eye(n)
        return SymFactorization(n, 0, np.arange(n), np.empty((n, 0)),
                                kernel, pivot_tol)

    pstrf, = lapack.get_lapack_funcs(("pstrf",), (A,))
    c, piv, rank, info = pstrf(A, lower=1, tol=pivot_tol * max_diag)
    if info < 0:
        raise IndefiniteMatrix(f"pivoted Cholesky failed (info={info})")
    piv = np.asarray(piv, dtype=np.intp) - 1
    L = np.tril(c)[:, :rank].copy()

    # remaining Schur-complement diagonal: negative beyond tolerance means
    # the matrix was not positive semidefinite
    if rank < n:
        d_trail = diag[piv[rank:]] - np.sum(L[rank:, :] ** 2, axis=1)
        if d_trail.size and d_trail.min() < -pivot_tol * max_diag:
            raise IndefiniteMatrix("negative pivot beyond tolerance")

    kernel = _kernel_basis(A, L, piv, rank, pivot_tol, max_diag)
    return SymFactorization(n, rank, piv, L, kernel, pivot_tol)


def _kernel_basis(A, L, piv, rank, pivot_tol, max_diag):
    """Kernel candidate from the truncated factor, refined by inverse iteration."""
    n = A.shape[0]
    kd = n - rank
    if kd == 0:
        return np.empty((n, 0))
    X_perm = np.vstack([
        -sla.solve_triangular(L[:rank, :], L[rank:, :].T, lower=True, trans=1,
                              check_finite=False) if rank else np.empty((0, kd)),
        np.eye(kd),
    ])
    X = np.empty((n, kd))
    X[piv] = X_perm
    X = kernel_orthonormalize(X, 1e-12)

    # one shifted factorization, two inverse-iteration sweeps
    shift = 10.0 * pivot_tol * max_diag
    for _ in range(2):
        try:
            ch = sla.cho_factor(A + shift * np.eye(n), lower=True,
                                check_finite=False)
        except sla.LinAlgError:
            shift *= 100.0
            continue
        for _ in range(2):
            X = sla.cho_solve(ch, X, check_finite=False)
            X = kernel_orthonormalize(X, 1e-12)
        break
    return X


def kernel_orthonormalize(R, tol):
    """Orthonormal basis of the numerically significant column space of R.

    Columns whose singular value falls below ``tol * sigma_max`` are dropped;
    a zero-width result is legal.
    """
    R = np.asarray(R, dtype=float)
    if R.ndim != 2:
        raise DimensionMismatch("expected a matrix")
    if R.shape[1] == 0:
        return R.copy()
    U, s, _ = np.linalg.svd(R, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        return np.empty((R.shape[0], 0))
    keep = s >= tol * s[0]
    return U[:, keep]


def inv_sqrt_sym(M, rank_tol=1e-8):
    """Inverse square root of a small symmetric PSD matrix with rank filtering.

    Returns ``(N, rank)`` with ``N.T @ M @ N = I`` of size ``rank``.
    Eigenvalues below ``rank_tol * lambda_max`` are discarded; this is where
    redundant search directions get filtered out of a block.

    Raises
    ------
    NegativeEigenvalueBeyondTolerance
        If ``lambda_min < -rank_tol * lambda_max``, i.e. M lost positive
        semidefiniteness.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] == 0:
        return np.empty((0, 0)), 0
    M = 0.5 * (M + M.T)
    w, V = np.linalg.eigh(M)
    lam_max = w[-1]
    if lam_max <= 0.0:
        if w[0] < -rank_tol * abs(lam_max):
            raise NegativeEigenvalueBeyondTolerance(
                f"most negative eigenvalue {w[0]:.3e}")
        return np.empty((M.shape[0], 0)), 0
    if w[0] < -rank_tol * lam_max:
        raise NegativeEigenvalueBeyondTolerance(
            f"eigenvalue {w[0]:.3e} below -rank_tol * {lam_max:.3e}")
    keep = np.nonzero(w >= rank_tol * lam_max)[0]
    V = V[:, keep].copy()
    # deterministic sign: largest-magnitude entry of each vector positive
    for j in range(V.shape[1]):
        i = np.argmax(np.abs(V[:, j]))
        if V[i, j] < 0.0:
            V[:, j] = -V[:, j]
    N = V / np.sqrt(w[keep])
    return N, len(keep)
