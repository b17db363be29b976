"""The shift isometry A x_k = x_{k+N} and its defect subspaces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InconsistentOperatorError
from .gram import CoordinateSpace, Subspace, orth_complement, project, subspace_span


@dataclass(frozen=True)
class IsometryA:
    """Matrix realization of the shift isometry.

    Attributes
    ----------
    space : CoordinateSpace
    domain, range : Subspace
        Lin{x_0..x_{dN-1}} and Lin{x_N..x_{(d+1)N-1}}.
    A_mat : (r, r) complex array
        Acts as A on ``domain`` and as zero on its orthogonal complement.
    defect_dom, defect_ran : Subspace
        H ⊖ D(A) and H ⊖ R(A), with the deterministic bases described in
        :func:`defect_basis`.
    consistency_residual : float
        max column norm of ``A_mat x_k - x_{k+N}`` over k < dN.
    """

    space: CoordinateSpace
    domain: Subspace
    range: Subspace
    A_mat: np.ndarray
    defect_dom: Subspace
    defect_ran: Subspace
    consistency_residual: float

    @property
    def delta(self) -> int:
        return self.defect_dom.k

    @property
    def N(self) -> int:
        return self.space.N

    @property
    def d(self) -> int:
        return self.space.d


@dataclass(frozen=True)
class ZetaDecomposition:
    zeta: complex
    c: np.ndarray
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    y: np.ndarray


def _polar(M: np.ndarray) -> np.ndarray:
    U, _, Vh = np.linalg.svd(M, full_matrices=False)
    return U @ Vh


def defect_basis(space: CoordinateSpace, complement: Subspace, generators: np.ndarray) -> Subspace:
    """Orthonormal basis of ``complement`` fixed by the generator vectors.

    The generators (columns) are projected onto the complement and
    Gram-Schmidt orthogonalized with column pivoting.  Phases are fixed so
    that each basis vector has a positive real inner product with the
    projected generator it was pivoted from.  The result depends only on the
    generators' inner products, not on the coordinate system of H.
    """
    k = complement.k
    if k == 0:
        return complement
    G = complement.basis.conj().T @ generators
    Q, R, _ = scipy.linalg.qr(G, pivoting=True)
    Q = Q[:, :k]
    diag = np.diag(R)[:k]
    phase = np.ones(k, dtype=complex)
    nz = np.abs(diag) > 0
    phase[nz] = diag[nz] / np.abs(diag[nz])
    Q = Q * phase[None, :]
    return Subspace(complement.basis @ Q)


def build_isometry(space: CoordinateSpace, consistency_tol: float | None = None) -> IsometryA:
    """Construct A from the generator coordinates.

    A is the least-squares solution of ``A [x_0..x_{dN-1}] = [x_N..x_{(d+1)N-1}]``
    on the domain, mapped into the range and then replaced by its nearest
    isometry (polar factor).  For exact data the least-squares map is
    already isometric, so the polar step only removes rounding drift.

    Raises ``InconsistentOperatorError`` when the residual of
    ``A x_k = x_{k+N}`` exceeds ``consistency_tol``.  The default scales
    with the square root of the rank cutoff: that is how far coordinates
    can move when eigenvalues just below the cutoff are discarded.
    """
    N, d = space.N, space.d
    if d < 1:
        raise ValueError("the operator model requires d >= 1")
    r = space.r
    dN = d * N
    domain = subspace_span(space, range(dN))
    rng_ = subspace_span(space, range(N, (d + 1) * N))
    if domain.k != rng_.k:
        raise InconsistentOperatorError(f"domain/range dimensions differ ({domain.k} vs {rng_.k})")

    Xd = space.X[:, :dN]
    Xr = space.X[:, N:]
    if r == 0:
        A_mat = np.zeros((0, 0), dtype=complex)
        residual = 0.0
    else:
        coords = domain.basis.conj().T @ Xd
        images = Xr @ np.linalg.pinv(coords)
        if domain.k:
            images = _polar(project(rng_, images))
        A_mat = images @ domain.basis.conj().T
        residual = _max_col_norm(A_mat @ Xd - Xr)
        if consistency_tol is None:
            consistency_tol = 1e-10 + 10.0 * np.sqrt(space.threshold)
        if residual > consistency_tol:
            raise InconsistentOperatorError(
                f"shift map is not a consistent isometry: residual {residual:.3e} > {consistency_tol:.3e}"
            )

    defect_dom = defect_basis(space, orth_complement(space, domain), space.X[:, dN:])
    defect_ran = defect_basis(space, orth_complement(space, rng_), space.X[:, :N])
    A_mat.setflags(write=False)
    return IsometryA(space, domain, rng_, A_mat, defect_dom, defect_ran, residual)


def _max_col_norm(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(M, axis=0)))


def power_consistency_check(a: IsometryA) -> float:
    """max over r <= d, l < N of |A^r x_l - x_{rN+l}|."""
    N, d = a.N, a.d
    X = a.space.X
    if X.size == 0:
        return 0.0
    P = X[:, :N].copy()
    worst = 0.0
    for k in range(d + 1):
        worst = max(worst, _max_col_norm(P - X[:, k * N:(k + 1) * N]))
        P = a.A_mat @ P
    return worst


def decompose_into_hzeta_ln(a: IsometryA, alpha, zeta: complex) -> ZetaDecomposition:
    """Split x = sum alpha_k x_k as v + y with v in (I - ζA)D(A), y in Lin{x_0..x_{N-1}}.

    The coefficients c of u = sum c_k x_k come from the backward recursion
    c_r = -alpha_{r+N}/ζ on the top block, then c_r = (c_{r+N} - alpha_{r+N})/ζ
    downward; v = (I - ζA)u and y = x - v.
    """
    zeta = complex(zeta)
    if zeta == 0 or np.isclose(abs(zeta), 1.0, rtol=0, atol=1e-14):
        raise ValueError(f"zeta must be nonzero and off the unit circle, got {zeta}")
    N, d = a.N, a.d
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != ((d + 1) * N,):
        raise ValueError(f"alpha must have length {(d + 1) * N}")
    dN = d * N
    c = np.zeros(dN, dtype=complex)
    for r in range(dN - 1, -1, -1):
        if r >= dN - N:
            c[r] = -alpha[r + N] / zeta
        else:
            c[r] = (c[r + N] - alpha[r + N]) / zeta
    X = a.space.X
    x = X @ alpha
    u = X[:, :dN] @ c
    v = u - zeta * (a.A_mat @ u)
    y = x - v
    return ZetaDecomposition(zeta, c, x, u, v, y)
