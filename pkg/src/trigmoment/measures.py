"""Solution containers: atomic measures and gridded distribution functions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Atom:
    theta: float
    weight: np.ndarray


@dataclass(frozen=True)
class DiscreteSolution:
    """Finite atomic matrix measure on (0, 2π].

    Encodes the left-continuous distribution M(t) = sum of W_p over θ_p < t,
    with M(0) = 0 and M(2π) equal to the total mass.
    """

    N: int
    atoms: tuple[Atom, ...]

    @property
    def thetas(self) -> np.ndarray:
        return np.array([a.theta for a in self.atoms], dtype=float)

    @property
    def weights(self) -> np.ndarray:
        if not self.atoms:
            return np.zeros((0, self.N, self.N), dtype=complex)
        return np.stack([a.weight for a in self.atoms])

    def total_mass(self) -> np.ndarray:
        return self.weights.sum(axis=0)

    def moment(self, n: int) -> np.ndarray:
        """Return the trigonometric moment sum_p exp(i n θ_p) W_p."""
        phases = np.exp(1j * n * self.thetas)
        return np.einsum("p,pkl->kl", phases, self.weights)

    def distribution(self, t: float) -> np.ndarray:
        """Evaluate the distribution function M(t) on [0, 2π].

        Atoms at θ < 2π enter left-continuously (M(t) sums θ_p < t).  An
        atom at 2π stands for the point 0 ≡ 2π of the circle and is the
        jump at 0+, so M(0) = 0 and M(t) includes it for every t > 0.
        """
        th = self.thetas
        mask = (th < t) | ((th >= TWO_PI) & (t > 0))
        return self.weights[mask].sum(axis=0) if mask.any() else np.zeros((self.N, self.N), dtype=complex)


@dataclass(frozen=True)
class GridDistribution:
    """Distribution function sampled on a uniform grid over [0, 2π].

    ``cumulative[i]`` is M(thetas[i]); the measure is the Poisson smoothing
    of a solution at radius ``r_poisson``.
    """

    thetas: np.ndarray
    cumulative: np.ndarray
    r_poisson: float

    @property
    def N(self) -> int:
        return self.cumulative.shape[1]

    def increments(self) -> np.ndarray:
        return np.diff(self.cumulative, axis=0)

    def moment(self, n: int) -> np.ndarray:
        """Quadrature of exp(i n t) against the grid increments (midpoint nodes)."""
        mid = 0.5 * (self.thetas[1:] + self.thetas[:-1])
        return np.einsum("g,gkl->kl", np.exp(1j * n * mid), self.increments())

    def window_mass(self, center: float, halfwidth: float) -> np.ndarray:
        """Mass of the circular arc [center - halfwidth, center + halfwidth].

        The arc is taken modulo 2π, so a window around 2π collects mass from
        both ends of the grid.
        """
        lo = center - halfwidth
        hi = center + halfwidth

        def cum(t):
            # M is periodic-extended: M(t + 2π) = M(t) + M(2π)
            k = np.floor(t / TWO_PI)
            s = t - k * TWO_PI
            vals = np.stack([np.interp(s, self.thetas, self.cumulative[:, a, b].real)
                             + 1j * np.interp(s, self.thetas, self.cumulative[:, a, b].imag)
                             for a in range(self.N) for b in range(self.N)])
            return vals.reshape(self.N, self.N) + k * self.cumulative[-1]

        return cum(hi) - cum(lo)
