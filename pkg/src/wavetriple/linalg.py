"""Dense linear-algebra kernels: Cholesky, LU solves, nonsymmetric eigenproblems.

Everything here works on plain numpy arrays.  Matrices are small and dense
(a few thousand rows at most), so no sparse formats are used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import EigenSolverError, NotPositiveDefiniteError, SingularMatrixError

# Relative pivot threshold below which a matrix is treated as not positive
# definite (resp. singular).  Scaled by the max-magnitude entry of the input.
PIVOT_RTOL = 1e-14


def cholesky(mat: np.ndarray) -> np.ndarray:
    """Lower-triangular Cholesky factor L with mat = L @ L.T.

    Raises NotPositiveDefiniteError if any pivot falls at or below
    PIVOT_RTOL times the largest entry magnitude.  That threshold is the
    package-wide detector for energy forms with a nontrivial kernel.
    """
    a = np.array(mat, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    scale = float(np.abs(a).max())
    if not np.isfinite(scale):
        raise ValueError("matrix contains non-finite entries")
    tol = PIVOT_RTOL * scale
    low = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j]
        if not pivot > tol:
            raise NotPositiveDefiniteError(
                f"pivot {pivot:.3e} at row {j} is below {tol:.3e}"
            )
        d = np.sqrt(pivot)
        low[j, j] = d
        col = a[j + 1 :, j] / d
        low[j + 1 :, j] = col
        a[j + 1 :, j + 1 :] -= np.outer(col, col)
    return low


def lu_solve(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve mat @ x = rhs by partial-pivoted LU.  rhs may be 1-D or 2-D."""
    return LuFactorization(mat).solve(rhs)


class LuFactorization:
    """Cached LU factorization for repeated solves against one matrix."""

    def __init__(self, mat: np.ndarray):
        a = np.asarray(mat, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        self.shape = a.shape
        if a.shape[0] == 0:
            self._lu_piv = None
            return
        scale = float(np.abs(a).max())
        self._lu_piv = scipy.linalg.lu_factor(a, check_finite=True)
        diag = np.abs(np.diag(self._lu_piv[0]))
        if scale == 0.0 or diag.min() <= PIVOT_RTOL * scale:
            raise SingularMatrixError(
                f"LU pivot {diag.min() if scale else 0.0:.3e} signals a singular matrix"
            )

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs)
        if rhs.shape[0] != self.shape[0]:
            raise ValueError(f"rhs length {rhs.shape[0]} != matrix order {self.shape[0]}")
        if self._lu_piv is None:
            return np.zeros_like(rhs, dtype=float)
        if np.iscomplexobj(rhs):
            real = scipy.linalg.lu_solve(self._lu_piv, rhs.real)
            imag = scipy.linalg.lu_solve(self._lu_piv, rhs.imag)
            return real + 1j * imag
        return scipy.linalg.lu_solve(self._lu_piv, rhs)


@dataclass(frozen=True)
class ComplexEigenSet:
    """Eigenvalues of a real matrix, sorted by (real, imag), with vectors.

    vectors[:, i] is a unit 2-norm eigenvector for values[i].  residuals[i]
    is the 2-norm of B @ w - lambda * w for that normalized vector.
    """

    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray

    def __len__(self) -> int:
        return self.values.shape[0]


def eig_nonsymmetric(mat: np.ndarray) -> ComplexEigenSet:
    """Full spectrum of a real square matrix.

    Backed by the LAPACK nonsymmetric solver (Hessenberg reduction plus
    shifted QR).  Residuals are recomputed here from the returned pairs, so
    the quality check does not trust the solver's own claims.
    """
    a = np.asarray(mat, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        empty = np.zeros(0)
        return ComplexEigenSet(empty.astype(complex), np.zeros((0, 0), complex), empty)
    try:
        values, vectors = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigenvalue iteration failed: {exc}") from exc
    norms = np.linalg.norm(vectors, axis=0)
    vectors = vectors / norms
    residuals = np.linalg.norm(a @ vectors - vectors * values, axis=0)
    order = np.lexsort((values.imag, values.real))
    return ComplexEigenSet(values[order], vectors[:, order], residuals[order])


def generalized_to_standard(gram: np.ndarray, op: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduce the pencil (op, gram) to standard form.

    With gram = L L^T this returns (B, L) where B = L^{-1} op L^{-T}; the
    pencil eigenproblem op z = lambda gram z becomes B w = lambda w with
    z = L^{-T} w.  Congruence, so the spectrum is preserved exactly.
    """
    low = cholesky(gram)
    if low.shape[0] == 0:
        return np.zeros((0, 0)), low
    y = scipy.linalg.solve_triangular(low, np.asarray(op, dtype=float), lower=True)
    b = scipy.linalg.solve_triangular(low, y.T, lower=True).T
    return b, low


@dataclass(frozen=True)
class PencilEigenSet:
    """Eigenpairs of op z = lambda gram z, sorted by (real, imag).

    vectors[:, i] solves the pencil problem for values[i] and is normalized
    to unit gram-norm (z* gram z = 1).  residuals[i] is
    ||op z - lambda gram z|| / (||gram z|| * (1 + |lambda|)).
    """

    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray

    def __len__(self) -> int:
        return self.values.shape[0]


def generalized_eig(gram: np.ndarray, op: np.ndarray) -> PencilEigenSet:
    """Solve the generalized problem op z = lambda gram z for SPD gram."""
    b, low = generalized_to_standard(gram, op)
    std = eig_nonsymmetric(b)
    if len(std) == 0:
        return PencilEigenSet(std.values, std.vectors, std.residuals)
    vectors = scipy.linalg.solve_triangular(low, std.vectors, lower=True, trans="T")
    # w had unit 2-norm, so z = L^{-T} w already has unit gram-norm.
    gram_z = np.asarray(gram, dtype=float) @ vectors
    raw = np.linalg.norm(np.asarray(op, dtype=float) @ vectors - gram_z * std.values, axis=0)
    denom = np.linalg.norm(gram_z, axis=0) * (1.0 + np.abs(std.values))
    return PencilEigenSet(std.values, vectors, raw / denom)
