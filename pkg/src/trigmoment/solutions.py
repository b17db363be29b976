"""Explicit solutions: atomic measures, Poisson-smoothed distributions, checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.linalg

from .extension import ExtensionParam, extension_stack, make_constant_param
from .isometry import IsometryA
from .measures import TWO_PI, Atom, DiscreteSolution, GridDistribution
from .moments import MomentSequence

ANGLE_TOL = 1e-8
WEIGHT_NEG_TOL = 1e-10


@dataclass(frozen=True)
class VerificationReport:
    residuals: tuple[float, ...]
    max_residual: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "residuals": [float(x) for x in self.residuals],
            "max_residual": float(self.max_residual),
            "tolerance": float(self.tolerance),
            "passed": bool(self.passed),
        }


def _clean_weight(W: np.ndarray) -> np.ndarray:
    W = 0.5 * (W + W.conj().T)
    lam, Q = np.linalg.eigh(W)
    if lam[0] < -WEIGHT_NEG_TOL:
        raise np.linalg.LinAlgError(f"atom weight has eigenvalue {lam[0]:.3e}; spectral projector drifted")
    if lam[0] >= 0:
        return W
    lam = np.clip(lam, 0.0, None)
    return (Q * lam) @ Q.conj().T


def _cluster_angles(thetas: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(thetas, kind="stable")
    groups = []
    start = 0
    for i in range(1, len(order) + 1):
        if i == len(order) or thetas[order[i]] - thetas[order[i - 1]] > tol:
            groups.append(order[start:i])
            start = i
    return groups


def canonical_solution(a: IsometryA, V, angle_tol: float = ANGLE_TOL) -> DiscreteSolution:
    """Atomic solution generated by the unitary extension A ⊕ V inside H.

    Eigenvalues of U = A ⊕ V are read off a complex Schur form (for a
    unitary matrix the Schur vectors are orthonormal eigenvectors).
    Angles are placed in (0, 2π], with angle 0 relabeled 2π, and
    eigenvalues closer than ``angle_tol`` are merged.  Atom weights are
    W_p[k, j] = inner(P_p x_k, x_j).
    """
    p = V if isinstance(V, ExtensionParam) else make_constant_param(a, V)
    if p.kind != "constant" or not p.is_unitary:
        raise ValueError("canonical solutions need a constant unitary parameter")
    N, r = a.N, a.space.r
    if r == 0:
        return DiscreteSolution(N, ())
    U = extension_stack(a, p, [0.0])[0]
    Tri, Z = scipy.linalg.schur(U, output="complex")
    lam = np.diag(Tri)
    theta = np.mod(np.angle(lam), TWO_PI)
    theta = np.where(theta <= angle_tol, theta + TWO_PI, theta)
    Y = Z.conj().T @ a.space.X[:, :N]

    atoms = []
    for grp in _cluster_angles(theta, angle_tol):
        Yg = Y[grp]
        W = _clean_weight(Yg.T @ Yg.conj())
        t = float(min(np.mean(theta[grp]), TWO_PI))
        atoms.append(Atom(t, W))
    return DiscreteSolution(N, tuple(atoms))


def poisson_invert(F: Callable[[np.ndarray], np.ndarray], S0, r_poisson: float, grid: int) -> GridDistribution:
    """Recover a smoothed distribution function from a resolvent sampler.

    With ζ = r e^{-iθ}, H(θ) = F(ζ) + F(ζ)^* - S_0 equals the integral of the
    Poisson kernel P_r(θ - t) against dM(t), so (1/2π) ∫_0^θ H is the
    distribution function of dM smoothed at radius r.  ``F`` maps a 1-D
    array of ζ to an array of shape (len(ζ), N, N).
    """
    if not 0 < r_poisson < 1:
        raise ValueError("r_poisson must lie in (0, 1)")
    if grid < 256:
        raise ValueError("grid must be at least 256")
    S0 = np.asarray(S0, dtype=complex)
    thetas = np.linspace(0.0, TWO_PI, grid + 1)
    vals = np.asarray(F(r_poisson * np.exp(-1j * thetas[:-1])))
    H = vals + np.conj(np.swapaxes(vals, 1, 2)) - S0[None]
    H = np.concatenate([H, H[:1]], axis=0)
    h = TWO_PI / grid
    steps = 0.5 * h * (H[1:] + H[:-1]) / TWO_PI
    cum = np.concatenate([np.zeros_like(S0)[None], np.cumsum(steps, axis=0)], axis=0)
    cum = 0.5 * (cum + np.conj(np.swapaxes(cum, 1, 2)))
    return GridDistribution(thetas, cum, float(r_poisson))


def verify_solution(sol: Union[DiscreteSolution, GridDistribution], m: MomentSequence, tol: float = 1e-8) -> VerificationReport:
    """Compare the trigonometric moments of ``sol`` with S_0..S_d (spectral norm)."""
    if sol.N != m.N:
        raise ValueError(f"solution has N={sol.N}, moments have N={m.N}")
    res = tuple(float(np.linalg.norm(sol.moment(n) - m.S[n], 2)) for n in range(m.d + 1))
    worst = max(res)
    return VerificationReport(res, worst, float(tol), worst <= tol)


def sample_points(count: int, radius: float = 0.9) -> np.ndarray:
    """Deterministic sunflower (golden-angle) point set filling |ζ| <= radius."""
    j = np.arange(count)
    golden = (np.sqrt(5.0) - 1.0) / 2.0
    return radius * np.sqrt((j + 0.5) / count) * np.exp(2j * np.pi * golden * j)


def compare_solutions(F1: Callable[[np.ndarray], np.ndarray], F2: Callable[[np.ndarray], np.ndarray], sample_count: int = 32) -> float:
    z = sample_points(sample_count)
    diff = np.asarray(F1(z)) - np.asarray(F2(z))
    if diff.shape[-1] == 0:
        return 0.0
    return float(np.max(np.linalg.norm(diff, ord=2, axis=(1, 2))))
