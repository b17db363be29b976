import numpy as np
import pytest

import trigmoment as tm
from oracles import measure_moments, random_measure


def pipeline(m, tol=1e-10):
    t = tm.build_toeplitz(m)
    return tm.build_isometry(tm.factor_gram(t, tol))


def moments_of(thetas, weights, d):
    N = weights[0].shape[0]
    return tm.validate_moments(N, d, measure_moments(thetas, weights, d))


def random_instance(rng, N, d, n_atoms, rank=None):
    th, W = random_measure(rng, N, n_atoms, rank)
    return th, W, moments_of(th, W, d)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def scalar_model():
    """N=1, d=1, S=(1, 0): T = I, one-dimensional defects."""
    return pipeline(tm.validate_moments(1, 1, [[[1]], [[0]]]))


@pytest.fixture
def rank1_model():
    """N=1, d=1, S=(1, i): rank-one T, A is multiplication by i."""
    return pipeline(tm.validate_moments(1, 1, [[[1]], [[1j]]]))


def has_spectral_gap(m, tol=1e-10):
    """True when T_d has no eigenvalues near the rank cutoff.

    The 1e-10-level operator contracts assume this: eigenvalues just below
    the cutoff move coordinates by up to sqrt(cutoff).
    """
    lam = np.linalg.eigvalsh(tm.build_toeplitz(m).entries)
    thr = tol * max(1.0, lam[-1])
    kept = lam[lam > thr]
    dropped = lam[lam <= thr]
    return kept.min() > 1e-6 * lam[-1] and (dropped.size == 0 or np.abs(dropped).max() < 1e-13)


def gapped_instance(rng, N, d, n_atoms, rank=None):
    while True:
        th, W, m = random_instance(rng, N, d, n_atoms, rank)
        if has_spectral_gap(m):
            return th, W, m
