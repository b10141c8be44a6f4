"""Random instance generators shared by the unit and acceptance suites."""

import numpy as np

from ddeacs.core import LinearDDE


def adj2(M):
    return np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]])


def detB0_system(rng, scale=2.0):
    """Two-variable system with a rank-one B."""
    A = rng.normal(size=(2, 2)) * scale
    return LinearDDE(A, np.outer(rng.normal(size=2), rng.normal(size=2)))


def detB0_equality_system(rng, scale=2.0):
    """det B = 0 with |det A| = |C| imposed by rescaling B = s u v^T.

    For rank-one B the cross term is C = v^T adj(A) u, linear in s.
    """
    A = rng.normal(size=(2, 2)) * scale
    u, v = rng.normal(size=2), rng.normal(size=2)
    s = rng.choice([-1.0, 1.0]) * np.linalg.det(A) / (v @ adj2(A) @ u)
    return LinearDDE(A, s * np.outer(u, v))


def sum_system(rng, scale=2.0):
    """det(A + B) = 0 through A + B = u v^T."""
    A = rng.normal(size=(2, 2)) * scale
    return LinearDDE(A, np.outer(rng.normal(size=2), rng.normal(size=2)) - A)


def diff_system(rng, scale=2.0):
    """det(A - B) = 0 through A - B = u v^T."""
    A = rng.normal(size=(2, 2)) * scale
    return LinearDDE(A, A - np.outer(rng.normal(size=2), rng.normal(size=2)))


def scalar_class1(rng, a_max=3.0):
    a = rng.uniform(-a_max, a_max)
    b = rng.choice([-1.0, 1.0]) * (abs(a) + rng.uniform(0.1, 3.0))
    return a, b
