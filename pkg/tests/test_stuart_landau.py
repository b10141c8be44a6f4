import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddeacs.acs import Direction, find_crossings, sample_branches
from ddeacs.classify import ClassTag, classify
from ddeacs.errors import StepTooLarge
from ddeacs.stuart_landau import (SLParams, all_disconnected, branches_to_csv, endpoint_mismatches,
                                  rotating_wave_residual, sl_branches, sl_growth_rate,
                                  sl_hopf_sequence, sl_simulate)


def test_alpha_zero_closed_form():
    hopf = sl_hopf_sequence(SLParams(0.0, 2.0), 3)
    out, inner = hopf.destabilizing, hopf.stabilizing
    assert out.omega_H == pytest.approx(3.0)
    assert inner.omega_H == pytest.approx(1.0)
    assert out.taus == pytest.approx([(3 * math.pi / 2 + 2 * math.pi * k) / 3 for k in range(4)])
    assert inner.taus == pytest.approx([(math.pi / 2 + 2 * math.pi * k) for k in range(4)])


def test_no_hopf_outside_unit_alpha():
    hopf = sl_hopf_sequence(SLParams(1.8, 2.0), 5)
    assert hopf.sequences == []
    assert hopf.notes
    assert not any(b.start_hopf is not None or b.end_hopf is not None
                   for b in sl_branches(SLParams(1.8, 2.0), 5))


def test_small_beta_both_destabilize():
    hopf = sl_hopf_sequence(SLParams(0.5, 0.2), 2)
    assert all(s.direction is Direction.DESTABILIZING for s in hopf.sequences)


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.95, 0.95), st.floats(1.2, 4.0))
def test_pipeline_matches_closed_form(alpha, beta):
    p = SLParams(alpha, beta)
    hopf = sl_hopf_sequence(p, 0)
    sysm = p.linearization()
    cs = sorted((c for c in find_crossings(sample_branches(sysm, n_samples=512)) if c.omega_H > 0),
                key=lambda c: -c.omega_H)
    assert len(cs) == 2
    for c, seq in zip(cs, (hopf.destabilizing, hopf.stabilizing)):
        assert abs(c.omega_H - seq.omega_H) < 1e-8
        assert abs((c.phi_H - seq.phi_H + math.pi) % (2 * math.pi) - math.pi) < 1e-8
        assert c.direction is seq.direction
    assert classify(sysm, n_samples=512).tag is ClassTag.II


@pytest.mark.parametrize("alpha, beta", [(0.8, 1.0), (0.8, 2.0), (-0.5, 3.0), (1.8, 2.0)])
def test_rotating_wave_residual(alpha, beta):
    p = SLParams(alpha, beta)
    for b in sl_branches(p, 6):
        assert np.all(rotating_wave_residual(p, b.a, b.tau, b.omega) <= 1e-10)
        np.testing.assert_allclose(b.omega, beta - np.sin(b.phi), atol=1e-14)


def test_bridge_endpoints_hit_hopf_delays():
    p = SLParams(0.8, 2.0)
    branches = sl_branches(p, 8)
    assert any(b.is_bridge for b in branches)
    assert max(endpoint_mismatches(p, branches, 8)) < 1e-6
    assert not all_disconnected(branches)


def test_disconnection_at_unit_beta():
    assert all_disconnected(sl_branches(SLParams(0.8, 1.0), 8))


def test_branch_csv():
    text = branches_to_csv(sl_branches(SLParams(0.8, 2.0), 1, n_phi=50))
    assert text.splitlines()[0] == "k,phi,a,tau,omega,component_id"


def test_step_guard():
    with pytest.raises(StepTooLarge):
        sl_simulate(SLParams(0.8, 1.0), 1.0, 1e-3, 5.0, 0.1)


def test_zero_history_stays_zero():
    traj = sl_simulate(SLParams(-0.5, 0.0), 100.0, 0.0, 1.0, 0.01)
    assert np.all(traj.z == 0)


@pytest.mark.parametrize("tau", [1.0, 5.0, 20.0])
def test_absolutely_stable_decay(tau):
    assert sl_growth_rate(SLParams(-1.5, 1.0), tau).rate < 0
