import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P

from ddeacs.catalog import SYSTEMS
from ddeacs.core import (LinearDDE, delay_independent_roots, eval_char, generating_polynomial,
                         generating_roots)
from ddeacs.errors import InputError

entries = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def matrices(n):
    return st.lists(entries, min_size=n * n, max_size=n * n).map(lambda v: np.reshape(v, (n, n)))


@st.composite
def systems(draw, n_max=3):
    n = draw(st.integers(1, n_max))
    return LinearDDE(draw(matrices(n)), draw(matrices(n)))


def cofactor_poly(A, B, omega):
    """Leibniz expansion of det(i omega I - A - B Y) with polynomial entries in Y."""
    n = A.shape[0]
    M = [[np.array([(1j * omega if i == j else 0) - A[i, j], -B[i, j]], dtype=complex)
          for j in range(n)] for i in range(n)]
    total = np.zeros(n + 1, dtype=complex)
    for perm in itertools.permutations(range(n)):
        sign = np.linalg.det(np.eye(n)[list(perm)])
        term = np.array([1.0 + 0j])
        for i, j in enumerate(perm):
            term = P.polymul(term, M[i][j])
        total[:len(term)] += sign * term
    return total


def test_rejects_mismatched_shapes():
    with pytest.raises(InputError):
        LinearDDE(np.eye(2), np.eye(3))


def test_rejects_nonfinite():
    with pytest.raises(InputError):
        LinearDDE([[np.nan]], [[1.0]])


def test_json_roundtrip():
    sysm = SYSTEMS["sum_class3"]
    again = LinearDDE.from_json(json.dumps(sysm.to_dict()))
    np.testing.assert_array_equal(again.A, sysm.A)
    np.testing.assert_array_equal(again.B, sysm.B)


def test_scalar_char_value():
    sysm = LinearDDE.scalar(-0.5, -1.0)
    lam, tau = 0.3 + 0.7j, 2.0
    assert eval_char(sysm, tau, lam) == pytest.approx(lam + 0.5 + np.exp(-lam * tau))


@settings(max_examples=60, deadline=None)
@given(systems(), st.floats(-10, 10))
def test_cofactor_oracle(sysm, omega):
    got = generating_polynomial(sysm, omega).coeffs
    want = cofactor_poly(sysm.A, sysm.B, omega)
    ref = max(np.abs(want).max(), 1.0)
    np.testing.assert_allclose(got, want[:len(got)], atol=1e-10 * ref, rtol=0)
    # trailing coefficients dropped for degeneracy must be negligible
    assert np.all(np.abs(want[len(got):]) <= 1e-10 * ref)


@settings(max_examples=60, deadline=None)
@given(systems(), st.floats(-10, 10))
def test_anchors(sysm, omega):
    n = sysm.n
    c = generating_polynomial(sysm, omega).coeffs
    c0 = np.linalg.det(1j * omega * np.eye(n) - sysm.A)
    assert abs(c[0] - c0) <= 1e-10 * max(1.0, abs(c0))
    cn = (-1) ** n * np.linalg.det(sysm.B)
    top = c[n] if len(c) > n else 0.0
    assert abs(top - cn) <= 1e-10 * max(1.0, np.abs(c).max())


@settings(max_examples=60, deadline=None)
@given(systems(), st.floats(0.01, 10))
def test_conjugation_symmetry(sysm, omega):
    pp = generating_polynomial(sysm, omega)
    if pp.degenerate:
        return
    plus = generating_roots(sysm, omega)
    minus = generating_roots(sysm, -omega)
    assert len(plus) == len(minus)
    scale = max(1.0, np.abs(plus).max()) if len(plus) else 1.0
    # a multiple root is only determined to about sqrt(eps)
    gaps = [abs(a - b) for i, a in enumerate(plus) for b in plus[i + 1:]]
    if gaps and min(gaps) < 1e-4 * scale:
        return
    for y in np.conj(plus):
        assert np.min(np.abs(minus - y)) <= 1e-9 * scale


@settings(max_examples=60, deadline=None)
@given(systems(), st.floats(-10, 10))
def test_root_residuals(sysm, omega):
    pp = generating_polynomial(sysm, omega)
    if pp.degenerate:
        return
    cmax = np.abs(pp.coeffs).max()
    for y in generating_roots(sysm, omega):
        assert abs(pp(y)) <= 1e-10 * cmax * max(1.0, abs(y)) ** pp.degree


def test_delay_independent_roots_empty_for_real_spectrum():
    assert delay_independent_roots(SYSTEMS["detB0_class1"]) == []


def test_delay_independent_pair_detected():
    A = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    B = np.zeros((3, 3))
    B[2, 2] = 0.5
    sysm = LinearDDE(A, B)
    found = delay_independent_roots(sysm)
    assert found == pytest.approx([-1j, 1j], abs=1e-12)
    for tau in (0.3, 1.7, 9.1):
        for lam in found:
            assert abs(eval_char(sysm, tau, lam)) < 1e-12
