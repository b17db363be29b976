"""Contraction parameters, the extension A ⊕ Φ_ζ, and generalized resolvents.

A parameter Φ_ζ is a δ x δ matrix function, written in the orthonormal
bases ``defect_dom`` (input) and ``defect_ran`` (output) of an
:class:`~trigmoment.isometry.IsometryA`.  Every analytic contraction-valued
Φ on the unit disk gives one generalized resolvent

    R_ζ = (I - ζ (A ⊕ Φ_ζ))^{-1},   |ζ| < 1,

and its compression F(ζ)[k, j] = inner(R_ζ x_k, x_j) is the resolvent
matrix of one solution of the moment problem.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ContractivityError, DefectSizeError
from .isometry import IsometryA

CONTRACTION_TOL = 1e-10
UNITARY_TOL = 1e-10
PROBE_RADIUS = 1.0 - 1e-6
PROBE_COUNT = 512


@dataclass(frozen=True)
class ExtensionParam:
    """Parameter Φ_ζ of the extension.

    ``kind`` is ``"constant"``, ``"polynomial"`` (Φ_ζ = sum ζ^m C_m) or
    ``"sampler"`` (an arbitrary hook ζ -> δ x δ matrix).  The hook must be
    a pure function; it may be called concurrently.
    """

    kind: str
    delta: int
    coeffs: tuple[np.ndarray, ...] = ()
    sampler: Optional[Callable[[complex], np.ndarray]] = None
    is_unitary: bool = False

    def value(self, zeta: complex) -> np.ndarray:
        return self.values(np.array([zeta]))[0]

    def values(self, zetas) -> np.ndarray:
        zetas = np.atleast_1d(np.asarray(zetas, dtype=complex))
        if self.kind == "sampler":
            out = np.empty((zetas.size, self.delta, self.delta), dtype=complex)
            for g, z in enumerate(zetas):
                out[g] = np.asarray(self.sampler(complex(z)), dtype=complex).reshape(self.delta, self.delta)
            return out
        out = np.zeros((zetas.size, self.delta, self.delta), dtype=complex)
        for m, C in enumerate(self.coeffs):
            out += zetas[:, None, None] ** m * C[None]
        return out

    def to_dict(self) -> dict:
        if self.kind == "sampler":
            raise TypeError("sampler parameters cannot be serialized")
        return {"kind": self.kind, "coeffs": [C for C in self.coeffs]}


def _max_singular(stack: np.ndarray) -> np.ndarray:
    if stack.shape[-1] == 0:
        return np.zeros(stack.shape[0])
    return np.linalg.svd(stack, compute_uv=False)[:, 0]


def _check_size(a: IsometryA, C: np.ndarray) -> np.ndarray:
    C = np.asarray(C, dtype=complex)
    if C.size == 0 and a.delta == 0:
        return np.zeros((0, 0), dtype=complex)
    if C.ndim != 2 or C.shape != (a.delta, a.delta):
        got = C.shape[0] if C.ndim == 2 and C.shape[0] == C.shape[1] else "x".join(map(str, C.shape))
        raise DefectSizeError(a.delta, got)
    return C


def make_constant_param(a: IsometryA, C) -> ExtensionParam:
    C = _check_size(a, C)
    s = float(_max_singular(C[None])[0])
    if s > 1.0 + CONTRACTION_TOL:
        raise ContractivityError(f"parameter is not a contraction (norm {s:.6g})", norm=s)
    unitary = bool(np.allclose(C.conj().T @ C, np.eye(a.delta), rtol=0, atol=UNITARY_TOL))
    C.setflags(write=False)
    return ExtensionParam("constant", a.delta, (C,), is_unitary=unitary)


def _probe(values: np.ndarray, zetas: np.ndarray) -> None:
    s = _max_singular(values)
    if s.size and s.max() > 1.0 + CONTRACTION_TOL:
        g = int(np.argmax(s))
        z = complex(zetas[g])
        raise ContractivityError(
            f"parameter is not contractive: norm {s[g]:.6g} at zeta={z.real:.6g}{z.imag:+.6g}j",
            zeta=z, norm=float(s[g]),
        )


def probe_points() -> np.ndarray:
    return PROBE_RADIUS * np.exp(2j * np.pi * np.arange(PROBE_COUNT) / PROBE_COUNT)


def make_polynomial_param(a: IsometryA, coeffs) -> ExtensionParam:
    """Polynomial parameter Φ_ζ = sum_m ζ^m C_m.

    Contractivity is checked by sampling the largest singular value on the
    circle |ζ| = 1 - 1e-6 and relying on the maximum principle.  This is a
    semi-decision: a violation narrower than the probe spacing can slip
    through.
    """
    coeffs = [_check_size(a, C) for C in coeffs]
    if not coeffs:
        raise ValueError("polynomial parameter needs at least one coefficient")
    if len(coeffs) == 1:
        return make_constant_param(a, coeffs[0])
    z = probe_points()
    p = ExtensionParam("polynomial", a.delta, tuple(coeffs))
    _probe(p.values(z), z)
    for C in coeffs:
        C.setflags(write=False)
    return p


def make_sampler_param(a: IsometryA, fn: Callable[[complex], np.ndarray], probe: bool = True) -> ExtensionParam:
    p = ExtensionParam("sampler", a.delta, sampler=fn)
    if probe:
        z = probe_points()
        _probe(p.values(z), z)
    return p


def identity_param(a: IsometryA) -> ExtensionParam:
    return make_constant_param(a, np.eye(a.delta, dtype=complex))


def _defect_map(a: IsometryA, phi: np.ndarray) -> np.ndarray:
    """J_ran Φ J_dom^* for a stack of parameter values."""
    Jd = a.defect_dom.basis
    Jr = a.defect_ran.basis
    return np.einsum("ia,gab,jb->gij", Jr, phi, Jd.conj())


def extension_stack(a: IsometryA, p: ExtensionParam, zetas) -> np.ndarray:
    """T(ζ) = A P_D + J_ran Φ_ζ J_dom^* for each ζ, shape (G, r, r)."""
    zetas = np.atleast_1d(np.asarray(zetas, dtype=complex))
    _check_param(a, p)
    T = np.broadcast_to(a.A_mat, (zetas.size,) + a.A_mat.shape).copy()
    if a.delta:
        T += _defect_map(a, p.values(zetas))
    return T


def _check_param(a: IsometryA, p: ExtensionParam) -> None:
    if p.delta != a.delta:
        raise DefectSizeError(a.delta, p.delta)


def extension_operator(a: IsometryA, p: ExtensionParam, zeta: complex) -> np.ndarray:
    if abs(zeta) >= 1:
        raise ValueError(f"extension operator is defined for |zeta| < 1, got {zeta}")
    return extension_stack(a, p, [zeta])[0]


@dataclass(frozen=True)
class ResolventValue:
    zeta: complex
    F: np.ndarray


def _inner_resolvents(a: IsometryA, p: ExtensionParam, zetas: np.ndarray) -> np.ndarray:
    N, r = a.N, a.space.r
    G = zetas.size
    if r == 0:
        return np.zeros((G, N, N), dtype=complex)
    T = extension_stack(a, p, zetas)
    M = np.eye(r)[None] - zetas[:, None, None] * T
    XN = a.space.X[:, :N]
    W = np.linalg.solve(M, np.broadcast_to(XN, (G, r, N)))
    # F[k, j] = inner(w_k, x_j) = x_j^* w_k
    return np.einsum("rj,grk->gkj", XN.conj(), W)


def s0(a: IsometryA) -> np.ndarray:
    N = a.N
    return np.asarray(a.space.gram[:N, :N])


def resolvent_values(a: IsometryA, p: ExtensionParam, zetas) -> np.ndarray:
    """F(ζ) for an array of ζ off the unit circle, shape (G, N, N).

    Points inside the disk use the extension formula; points outside use
    F(ζ) = S_0 - F(1/conj ζ)^*.
    """
    zetas = np.atleast_1d(np.asarray(zetas, dtype=complex))
    mod = np.abs(zetas)
    if np.any(np.abs(mod - 1.0) < 1e-14):
        raise ValueError("resolvent is undefined on the unit circle")
    out = np.empty((zetas.size, a.N, a.N), dtype=complex)
    inside = mod < 1
    if inside.any():
        out[inside] = _inner_resolvents(a, p, zetas[inside])
    if (~inside).any():
        mirrored = 1.0 / np.conj(zetas[~inside])
        Fin = _inner_resolvents(a, p, mirrored)
        out[~inside] = s0(a)[None] - np.conj(np.swapaxes(Fin, 1, 2))
    return out


def generalized_resolvent(a: IsometryA, p: ExtensionParam, zeta: complex) -> ResolventValue:
    zeta = complex(zeta)
    if abs(zeta) >= 1:
        raise ValueError(f"inside-disk branch requires |zeta| < 1, got {zeta}")
    return ResolventValue(zeta, _inner_resolvents(a, p, np.array([zeta]))[0])


def resolvent_outside_disk(a: IsometryA, p: ExtensionParam, zeta: complex) -> ResolventValue:
    zeta = complex(zeta)
    if abs(zeta) <= 1:
        raise ValueError(f"outside-disk branch requires |zeta| > 1, got {zeta}")
    Fin = generalized_resolvent(a, p, 1.0 / np.conj(zeta)).F
    return ResolventValue(zeta, s0(a) - Fin.conj().T)


def direct_unitary_resolvent(a: IsometryA, p: ExtensionParam, zetas) -> np.ndarray:
    """F(ζ) = compression of (I - ζU)^{-1} for a constant unitary parameter.

    U is unitary, so this formula is valid on both sides of the circle; it
    is the independent path against which the reflection formula is checked.
    """
    if not (p.kind == "constant" and p.is_unitary):
        raise ValueError("direct resolvent needs a constant unitary parameter")
    zetas = np.atleast_1d(np.asarray(zetas, dtype=complex))
    N, r = a.N, a.space.r
    if r == 0:
        return np.zeros((zetas.size, N, N), dtype=complex)
    U = extension_stack(a, p, [0.0])[0]
    M = np.eye(r)[None] - zetas[:, None, None] * U[None]
    XN = a.space.X[:, :N]
    W = np.linalg.solve(M, np.broadcast_to(XN, (zetas.size, r, N)))
    return np.einsum("rj,grk->gkj", XN.conj(), W)


def resolvent_sampler(a: IsometryA, p: ExtensionParam) -> Callable[[np.ndarray], np.ndarray]:
    return lambda zetas: resolvent_values(a, p, zetas)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def taylor_moments(a: IsometryA, p: ExtensionParam, n_max: int, rho: float = 0.5, grid: int = 1024) -> np.ndarray:
    """Taylor coefficients C_0..C_{n_max} of F by the trapezoid rule on |ζ| = rho.

    C_n equals S_n for n <= d for every admissible parameter; higher C_n are
    the moments of the solution the parameter selects.  Returns an array of
    shape (n_max + 1, N, N).
    """
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    if not _is_power_of_two(grid) or grid < 4 * (n_max + 1):
        raise ValueError(f"grid must be a power of two >= {4 * (n_max + 1)}, got {grid}")
    theta = 2 * np.pi * np.arange(grid) / grid
    F = _inner_resolvents(a, p, rho * np.exp(1j * theta))
    coef = np.fft.fft(F, axis=0)[: n_max + 1] / grid
    return coef * (rho ** -np.arange(n_max + 1, dtype=float))[:, None, None]
