"""Shared generators for randomized structure tests."""

import numpy as np

from dhdae import BlockDhdae


def random_complex(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_hpd(rng, n, shift=None):
    m = random_complex(rng, n, n)
    if shift is None:
        shift = max(n, 1)
    return m @ m.conj().T + shift * np.eye(n)


def random_dissipative(rng, n, definite=True):
    """A = J - R with J skew-Hermitian; R is positive definite when asked."""
    g = random_complex(rng, n, n)
    j = 0.5 * (g - g.conj().T)
    l = random_complex(rng, n, n)
    r = l.conj().T @ l
    if definite:
        r = r + 0.1 * np.eye(n)
    return j - r


def random_conforming(rng, n1, n2):
    """Random conforming block system with a definite dissipation part.

    E1 is a well-conditioned random matrix and Q1 = E1^{-H} M with M Hermitian
    positive definite, so the energy metric E1^H Q1 = M is coercive by
    construction.
    """
    e1 = random_complex(rng, n1, n1) + 2.0 * n1 * np.eye(n1)
    m = random_hpd(rng, n1)
    q1 = np.linalg.inv(e1.conj().T) @ m
    q2 = random_complex(rng, n2, n2) + 2.0 * max(n2, 1) * np.eye(n2)
    a = random_dissipative(rng, n1 + n2)
    return BlockDhdae(n1=n1, n2=n2, E1=e1, Q1=q1, Q2=q2, A=a)


def random_singular_conforming(rng, n1, n2):
    """Conforming system whose pencil is singular: A vanishes on the algebraic part.

    The dissipation acts on the dynamic block only and the algebraic rows and
    columns of A are identically zero, so s E - A Q kills the X2 directions
    for every s.
    """
    e1 = random_complex(rng, n1, n1) + 2.0 * n1 * np.eye(n1)
    m = random_hpd(rng, n1)
    q1 = np.linalg.inv(e1.conj().T) @ m
    q2 = random_complex(rng, n2, n2) + 2.0 * max(n2, 1) * np.eye(n2)
    a = np.zeros((n1 + n2, n1 + n2), dtype=np.complex128)
    a[:n1, :n1] = random_dissipative(rng, n1)
    return BlockDhdae(n1=n1, n2=n2, E1=e1, Q1=q1, Q2=q2, A=a)


def random_state(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)
