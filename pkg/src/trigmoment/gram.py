"""Coordinate model of the Hilbert space generated by the Gram matrix T_d.

Vectors of H are stored as coordinate columns in C^r.  The inner product is
linear in the first argument and conjugate-linear in the second,
``inner(a, b) = b^* a``, and the factorization is oriented so that
``inner(x_n, x_m) == T[n, m]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotSolvableError
from .moments import DEFAULT_TOL, BlockToeplitz, psd_threshold


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    return complex(np.vdot(b, a))


@dataclass(frozen=True)
class CoordinateSpace:
    """H realized as C^r with generator coordinates in the columns of ``X``.

    Attributes
    ----------
    X : (r, (d+1)N) complex array
        Column n holds the coordinates of x_n.
    gram : ((d+1)N, (d+1)N) complex array
        The Toeplitz matrix the space was factored from.
    threshold : float
        Absolute eigenvalue cutoff used for every rank decision made in
        this space (shared with the solvability report).
    gram_tol : float
        Bound on the Gram reproduction error.
    """

    N: int
    d: int
    X: np.ndarray
    gram: np.ndarray
    threshold: float
    gram_tol: float

    @property
    def r(self) -> int:
        return self.X.shape[0]

    def x(self, n: int) -> np.ndarray:
        return self.X[:, n]

    def gram_matrix(self) -> np.ndarray:
        """Matrix of inner(x_n, x_m) computed from the coordinates."""
        return (self.X.conj().T @ self.X).T


@dataclass(frozen=True)
class Subspace:
    basis: np.ndarray

    @property
    def k(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient(self) -> int:
        return self.basis.shape[0]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


def factor_gram(t: BlockToeplitz, rank_tol: float = DEFAULT_TOL) -> CoordinateSpace:
    """Factor T_d into generator coordinates via a clamped eigendecomposition.

    With T = Q diag(λ) Q^*, the coordinates are ``X = diag(sqrt λ) Q^T``
    restricted to eigenvalues above ``rank_tol * max(1, λ_max)``; then
    ``X^* X = conj(T)``, which is exactly ``inner(x_n, x_m) = T[n, m]``.
    """
    T = t.entries
    herm = 0.5 * (T + T.conj().T)
    n = herm.shape[0]
    lam, Q = np.linalg.eigh(herm)
    thr = psd_threshold(lam, rank_tol)
    if lam.size and lam[0] < -thr:
        raise NotSolvableError(f"Toeplitz matrix is not PSD (min eigenvalue {lam[0]:.3e})")
    # descending, ties keep eigh order so T = I gives X = I
    order = np.argsort(-lam, kind="stable")
    keep = order[lam[order] > thr]
    X = np.sqrt(lam[keep])[:, None] * Q[:, keep].T
    # discarded spectrum plus rounding in eigh
    lam_max = max(1.0, float(lam[-1])) if lam.size else 1.0
    gram_tol = thr + 64 * n * np.finfo(float).eps * lam_max
    X.setflags(write=False)
    return CoordinateSpace(t.N, t.d, X, np.asarray(T), thr, gram_tol)


def subspace_span(space: CoordinateSpace, indices) -> Subspace:
    """Orthonormal basis of Lin{x_n : n in indices}.

    The dimension is the number of eigenvalues of the corresponding Gram
    sub-block above the space threshold.  Deciding it from T rather than
    from the factored coordinates keeps dimensions of shift-related blocks
    (which are bitwise equal in T) equal.
    """
    idx = np.asarray(list(indices), dtype=int)
    if idx.size == 0 or space.r == 0:
        return Subspace(np.zeros((space.r, 0), dtype=complex))
    sub = space.gram[np.ix_(idx, idx)]
    lam = np.linalg.eigvalsh(0.5 * (sub + sub.conj().T))
    k = int(np.count_nonzero(lam > space.threshold))
    U, _, _ = np.linalg.svd(space.X[:, idx], full_matrices=False)
    return Subspace(U[:, :k])


def orth_complement(space: CoordinateSpace, s: Subspace) -> Subspace:
    r = space.r
    if s.k == 0:
        return Subspace(np.eye(r, dtype=complex))
    if s.k >= r:
        return Subspace(np.zeros((r, 0), dtype=complex))
    U, _, _ = np.linalg.svd(s.basis, full_matrices=True)
    return Subspace(U[:, s.k:])


def project(s: Subspace, v: np.ndarray) -> np.ndarray:
    """Orthogonal projection of ``v`` (vector or column stack) onto ``s``."""
    return s.basis @ (s.basis.conj().T @ v)
