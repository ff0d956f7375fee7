"""Dense symmetric linear algebra on top of LAPACK (via numpy).

Generalized problems K v = λ M v are reduced by the Cholesky congruence
L^-1 K L^-T with M = L L^T; M is never inverted explicitly.
"""
from dataclasses import dataclass

import numpy as np
from numpy.linalg import LinAlgError

from .errors import InvalidArgument, NotPositiveDefinite, NumericFailure


@dataclass(frozen=True)
class CholeskyFactor:
    lower: np.ndarray

    def solve(self, b):
        y = _tri_solve(self.lower, b)
        return _tri_solve(self.lower.T, y)


@dataclass(frozen=True)
class GenEigExtremes:
    lambda_min: float
    lambda_max: float
    eigvec_min: np.ndarray


def _square_symmetric(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgument(f"{name} must be square, got shape {a.shape}")
    return a


def _tri_solve(t, b):
    # numpy has no triangular solver; LU on a triangular matrix is exact in
    # structure and cheap next to the eigen-solves this module feeds.
    return np.linalg.solve(t, b)


def cholesky(a):
    a = _square_symmetric(a)
    try:
        lower = np.linalg.cholesky(a)
    except LinAlgError:
        raise NotPositiveDefinite("matrix is not positive definite (non-positive Cholesky pivot)") from None
    if not np.all(np.isfinite(lower)):
        raise NotPositiveDefinite("Cholesky factor is not finite")
    return CholeskyFactor(lower)


def solve_spd(a, b):
    return cholesky(a).solve(np.asarray(b, dtype=float))


def sym_eig(a):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix."""
    a = _square_symmetric(a)
    try:
        vals, vecs = np.linalg.eigh(a)
    except LinAlgError as exc:
        raise NumericFailure(f"symmetric eigensolver did not converge: {exc}") from None
    return vals, vecs


def _reduced(K, M):
    L = cholesky(M).lower
    X = _tri_solve(L, np.asarray(K, dtype=float))
    C = _tri_solve(L, X.T).T
    return L, 0.5 * (C + C.T)


def gen_eig_extremes(K, M):
    """Extreme eigenpairs of K v = λ M v for symmetric K and SPD M."""
    K = _square_symmetric(K, "K")
    M = _square_symmetric(M, "M")
    if K.shape != M.shape:
        raise InvalidArgument(f"K {K.shape} and M {M.shape} differ in shape")
    L, C = _reduced(K, M)
    vals, vecs = sym_eig(C)
    v = _tri_solve(L.T, vecs[:, 0])
    return GenEigExtremes(float(vals[0]), float(vals[-1]), v)


def gen_eigvals(K, M):
    """All generalized eigenvalues, ascending."""
    _, C = _reduced(K, M)
    return sym_eig(C)[0]


def fractional_mass(M0, M1, s):
    """M0 (M0^-1 M1)^s, symmetric positive definite for 0 <= s <= 1.

    With M1 V = M0 V diag(μ), V^T M0 V = I, this equals M0 V diag(μ^s) V^T M0.
    """
    if not 0.0 <= s <= 1.0:
        raise InvalidArgument(f"fractional order must lie in [0, 1], got {s!r}")
    L, C = _reduced(M1, M0)
    mu, Q = sym_eig(C)
    if mu[0] <= 0.0:
        raise NotPositiveDefinite("M1 is not positive definite relative to M0")
    B = L @ Q  # = M0 V
    M = (B * mu**s) @ B.T
    return 0.5 * (M + M.T)


def energy(K, F, u):
    """Quadratic energy ½ uᵀ K u - Fᵀ u; the discrete solution minimizes it."""
    u = np.asarray(u, dtype=float)
    return float(0.5 * u @ (np.asarray(K) @ u) - np.asarray(F) @ u)
