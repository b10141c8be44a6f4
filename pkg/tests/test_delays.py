import json
import math

import numpy as np
import pytest
from _gen import scalar_class1
from hypothesis import given, settings
from hypothesis import strategies as st

from ddeacs.acs import Crossing, Direction
from ddeacs.catalog import SYSTEMS
from ddeacs.classify import classify
from ddeacs.core import LinearDDE, eval_char
from ddeacs.delays import (critical_delays, crossing_direction_rate, delay_sequences,
                           double_hopf_search, sequences_to_json, tracked_rate, unstable_dimension,
                           unstable_dimension_scalar, zero_root_exchange)
from ddeacs.errors import Degenerate, NonTransverseCrossing, OnBifurcation, Unclassified
from ddeacs.oracle import count_unstable


@pytest.fixture(scope="module")
def sequences():
    names = ("scalar_class1", "negC_class1", "general_class2", "rotational_class2", "sum_class3")
    return {name: delay_sequences(SYSTEMS[name], 10) for name in names}


@pytest.mark.parametrize("name", ["scalar_class1", "negC_class1", "general_class2",
                                  "rotational_class2", "sum_class3"])
def test_lattice_and_residuals(sequences, name):
    sysm = SYSTEMS[name]
    for seq in sequences[name]:
        taus = np.asarray(seq.taus)
        assert np.all(taus > 0)
        np.testing.assert_allclose(np.diff(taus), 2 * math.pi / seq.omega_H, rtol=1e-12)
        for tau in taus:
            assert abs(eval_char(sysm, tau, 1j * seq.omega_H)) <= 1e-8 * (1 + sysm.norm_A + sysm.norm_B)


def test_scalar_reference_delays(sequences):
    (seq,) = sequences["scalar_class1"]
    assert seq.omega_H == pytest.approx(math.sqrt(0.75), abs=1e-12)
    assert seq.tau(0) == pytest.approx(2.4184, abs=1e-4)
    assert seq.tau(8) == pytest.approx(60.4600, abs=1e-4)


def test_non_transverse_rejected():
    with pytest.raises(NonTransverseCrossing):
        critical_delays(Crossing(1.0, 0.5, 0.0, 0, Direction.NON_TRANSVERSE), 3)


def test_scalar_rate_positive_and_tracked():
    sysm = SYSTEMS["scalar_class1"]
    (c,) = [c for c in classify(sysm).crossings if c.omega_H > 0]
    seq = critical_delays(c, 3, sysm)
    rates = [crossing_direction_rate(sysm, c, t) for t in seq.taus]
    assert rates[0] > 0
    assert tracked_rate(sysm, c.omega_H, seq.taus[0]) == pytest.approx(rates[0], rel=1e-3)
    # the denominator grows like tau^2
    assert all(abs(x) > abs(y) for x, y in zip(rates, rates[1:]))


def test_rotational_inner_rate_negative(sequences):
    sysm = SYSTEMS["rotational_class2"]
    cs = [c for c in classify(sysm).crossings if c.direction is Direction.STABILIZING]
    seq = critical_delays(cs[0], 0, sysm)
    assert crossing_direction_rate(sysm, cs[0], seq.taus[0]) < 0


def test_direction_consistency_random_scalar():
    rng = np.random.default_rng(21)
    for _ in range(10):
        a, b = scalar_class1(rng)
        sysm = LinearDDE.scalar(a, b)
        (c,) = [c for c in classify(sysm, n_samples=256).crossings if c.omega_H > 0]
        tau = critical_delays(c, 0, sysm).taus[0]
        assert np.sign(tracked_rate(sysm, c.omega_H, tau)) == -np.sign(c.dgamma)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 3), st.booleans(), st.floats(0.05, 30))
def test_scalar_dimension_matches_oracle(a, margin, neg, tau):
    b = (abs(a) + margin) * (-1 if neg else 1)
    try:
        du = unstable_dimension_scalar(a, b, tau)
    except OnBifurcation:
        return
    w = math.sqrt(b * b - a * a)
    phi = (-math.atan2(w, -a) + math.atan2(0.0, b)) % (2 * math.pi)
    if abs(((tau * w - phi) / (2 * math.pi) + 0.5) % 1 - 0.5) * 2 * math.pi / w < 1e-2:
        return
    assert du == count_unstable(LinearDDE.scalar(a, b), tau)


def test_scalar_dimension_class0():
    assert unstable_dimension_scalar(-2.0, 1.0, 5.0) == 0
    assert unstable_dimension_scalar(2.0, -1.0, 5.0) == 1
    with pytest.raises(Degenerate):
        unstable_dimension_scalar(1.0, -1.0, 1.0)


def test_on_bifurcation(sequences):
    (seq,) = sequences["scalar_class1"]
    with pytest.raises(OnBifurcation):
        unstable_dimension_scalar(-0.5, -1.0, seq.taus[2])
    with pytest.raises(OnBifurcation):
        unstable_dimension(SYSTEMS["scalar_class1"], seq.taus[2])


def test_two_k_minus_one_law():
    sysm = SYSTEMS["detB0_class1"]
    verdict = classify(sysm)
    (seq,) = delay_sequences(sysm, 8, verdict.crossings)
    for k in range(1, 7):
        tau = seq.intercept + (k - 0.5) * seq.period
        assert unstable_dimension(sysm, tau, verdict) == 2 * k - 1


def test_unclassified_rejected():
    # two decoupled class I blocks give two destabilizing crossings
    sysm = LinearDDE(np.diag([-0.5, -0.2]), np.diag([-1.0, -2.0]))
    assert classify(sysm).tag.value == "Other"
    with pytest.raises(Unclassified):
        unstable_dimension(sysm, 1.0)


@pytest.mark.parametrize("name, tau_c", [("sum_class3", 1 / 12), ("detB0_class3", 0.2)])
def test_zero_root_exchange(name, tau_c):
    ex = zero_root_exchange(SYSTEMS[name])
    assert ex.tau == pytest.approx(tau_c, rel=1e-9)
    assert ex.delta == -1


def test_zero_root_exchange_absent():
    assert zero_root_exchange(SYSTEMS["negC_class1"]) is None


@pytest.mark.parametrize("name", ["detB0_class3", "sum_class3", "diff_class3", "general_class2"])
def test_dimension_matches_oracle(name):
    sysm = SYSTEMS[name]
    verdict = classify(sysm)
    crit = np.concatenate([s.taus for s in delay_sequences(sysm, 20, verdict.crossings)])
    for tau in (0.05, 0.5, 1.3, 3.7, 7.9, 12.2):
        if np.min(np.abs(crit - tau)) < 1e-2:
            continue
        assert unstable_dimension(sysm, tau, verdict) == count_unstable(sysm, tau, exclude_axis_roots=True)


def test_double_hopf_identical(sequences):
    (seq,) = sequences["scalar_class1"]
    report = double_hopf_search(seq, seq, 5)
    assert [(k, l) for k, l, _ in report.matches] == [(k, k) for k in range(6)]


def test_double_hopf_none_for_class2_example(sequences):
    s1, s2 = sequences["general_class2"]
    assert double_hopf_search(s1, s2, 10, tol=1e-6).matches == []


def test_sequences_json(sequences):
    doc = json.loads(sequences_to_json(sequences["general_class2"], tau=2.0, d_u=3))
    assert doc["unstable_dimension"] == {"tau": 2.0, "D_u": 3}
    assert len(doc["sequences"]) == 2
