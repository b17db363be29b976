"""Moment data, block Toeplitz assembly and the solvability test.

The problem data is a sequence S_0, ..., S_d of complex N x N matrices.
Negative-index moments are never stored; they are S_{-n} = S_n^*.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotSolvableError, ValidationError
from .measures import TWO_PI, Atom, DiscreteSolution

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class MomentSequence:
    N: int
    d: int
    S: tuple[np.ndarray, ...]

    def moment(self, n: int) -> np.ndarray:
        """Return S_n for -d <= n <= d."""
        if abs(n) > self.d:
            raise IndexError(f"moment index {n} outside [-{self.d}, {self.d}]")
        return self.S[n] if n >= 0 else self.S[-n].conj().T

    def conjugated(self, V: np.ndarray) -> "MomentSequence":
        """Moment sequence of the measure V dM V^*."""
        return MomentSequence(self.N, self.d, tuple(V @ s @ V.conj().T for s in self.S))


@dataclass(frozen=True)
class BlockToeplitz:
    N: int
    d: int
    entries: np.ndarray

    @property
    def size(self) -> int:
        return (self.d + 1) * self.N

    def block(self, i: int, j: int) -> np.ndarray:
        N = self.N
        return self.entries[i * N:(i + 1) * N, j * N:(j + 1) * N]


@dataclass(frozen=True)
class SolvabilityReport:
    solvable: bool
    min_eigenvalue: float
    rank: int
    tolerance_used: float
    eigenvalues: np.ndarray = field(repr=False, compare=False, default=None)

    def to_dict(self) -> dict:
        return {
            "solvable": bool(self.solvable),
            "min_eigenvalue": float(self.min_eigenvalue),
            "rank": int(self.rank),
            "tolerance": float(self.tolerance_used),
        }


def validate_moments(N, d, raw) -> MomentSequence:
    """Validate raw moment matrices and pack them into a ``MomentSequence``.

    Every violated rule is collected before raising, so a single
    ``ValidationError`` reports all problems in the input.
    """
    issues = []
    if not isinstance(N, (int, np.integer)) or isinstance(N, bool) or N < 1:
        issues.append(f"N must be a positive integer, got {N!r}")
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool) or d < 0:
        issues.append(f"d must be a non-negative integer, got {d!r}")
    if issues:
        raise ValidationError(issues)

    raw = list(raw)
    if len(raw) != d + 1:
        issues.append(f"expected {d + 1} matrices (d={d}), got {len(raw)}")

    mats = []
    for n, m in enumerate(raw):
        try:
            a = np.asarray(m, dtype=complex)
        except (TypeError, ValueError) as exc:
            issues.append(f"S[{n}]: not a complex matrix ({exc})")
            continue
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            issues.append(f"S[{n}]: not a square matrix (shape {a.shape})")
            continue
        if a.shape != (N, N):
            issues.append(f"S[{n}]: expected {N}x{N}, got {a.shape[0]}x{a.shape[1]}")
            continue
        if not np.all(np.isfinite(a)):
            issues.append(f"S[{n}]: non-finite entries")
            continue
        a = a.copy()
        a.setflags(write=False)
        mats.append(a)

    if issues:
        raise ValidationError(issues)
    return MomentSequence(int(N), int(d), tuple(mats))


def build_toeplitz(m: MomentSequence) -> BlockToeplitz:
    """Assemble T_d with block (i, j) equal to S_{i-j}."""
    N, d = m.N, m.d
    T = np.empty(((d + 1) * N, (d + 1) * N), dtype=complex)
    for i in range(d + 1):
        for j in range(d + 1):
            T[i * N:(i + 1) * N, j * N:(j + 1) * N] = m.moment(i - j)
    T.setflags(write=False)
    return BlockToeplitz(N, d, T)


def psd_threshold(eigenvalues, tol: float) -> float:
    lam_max = float(np.max(eigenvalues)) if len(eigenvalues) else 0.0
    return tol * max(1.0, lam_max)


def check_solvable(t: BlockToeplitz, tol: float = DEFAULT_TOL) -> SolvabilityReport:
    """Decide whether T_d is positive semidefinite at a scale-aware tolerance.

    The cutoff is ``tol * max(1, λ_max)``; it serves both as the negativity
    allowance for the verdict and as the rank threshold.

    A T_d that is not Hermitian (possible only when S_0 itself is not)
    cannot be PSD.  Its anti-Hermitian norm is then folded into the reported
    minimum eigenvalue so that the verdict still reads off that number.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    T = t.entries
    if not np.all(np.isfinite(T)):
        raise np.linalg.LinAlgError("non-finite entries in Toeplitz matrix")
    herm = 0.5 * (T + T.conj().T)
    lam = np.linalg.eigvalsh(herm) if T.size else np.zeros(0)
    thr = psd_threshold(lam, tol)
    min_eig = float(lam[0]) if lam.size else 0.0
    skew = 0.5 * (T - T.conj().T)
    defect = float(np.linalg.norm(skew, 2)) if T.size else 0.0
    if defect > thr:
        min_eig = min(min_eig, -defect)
    rank = int(np.count_nonzero(lam > thr))
    return SolvabilityReport(
        solvable=min_eig >= -thr,
        min_eigenvalue=min_eig,
        rank=rank,
        tolerance_used=thr,
        eigenvalues=lam,
    )


def trivial_solution_d0(S0, tol: float = DEFAULT_TOL) -> DiscreteSolution:
    """Single-jump solution for d = 0: one atom of weight S_0 at t = 2π.

    Any non-decreasing M with M(0) = 0 and M(2π) = S_0 solves the d = 0
    problem; this is the canonical representative.
    """
    S0 = np.asarray(S0, dtype=complex)
    N = S0.shape[0]
    report = check_solvable(BlockToeplitz(N, 0, S0), tol)
    if not report.solvable:
        raise NotSolvableError(f"S_0 is not positive semidefinite (min eigenvalue {report.min_eigenvalue:.3e})")
    if not np.any(S0):
        return DiscreteSolution(N, ())
    W = 0.5 * (S0 + S0.conj().T)
    return DiscreteSolution(N, (Atom(TWO_PI, W),))
