import math

import numpy as np
import pytest

from ddeacs.acs import sample_branches
from ddeacs.catalog import SYSTEMS
from ddeacs.core import LinearDDE, char_scale, eval_char
from ddeacs.errors import RootOnContour
from ddeacs.oracle import (axis_roots, compute_spectrum, contour_radius, count_unstable,
                           discretized_spectrum, newton_refine, spectrum_vs_acs_distance,
                           unstable_at_zero_delay, winding_number)

FIG3 = LinearDDE.scalar(-0.5, -1.0)


def test_conjugation_closure():
    ev = discretized_spectrum(SYSTEMS["general_class2"], 3.0, 48)
    for lam in ev:
        assert np.min(np.abs(ev - np.conj(lam))) <= 1e-8 * (1 + abs(lam))


def test_refined_roots_are_roots():
    sysm = SYSTEMS["negC_class1"]
    win = compute_spectrum(sysm, 2.0)
    assert win.roots
    values = win.values
    for lam, res in win.roots:
        assert res == pytest.approx(abs(eval_char(sysm, 2.0, lam)))
        assert res <= 1e-8 * char_scale(sysm, 2.0, lam)
        assert np.min(np.abs(values - np.conj(lam))) <= 1e-8 * (1 + abs(lam))
    gaps = [abs(a - b) for i, a in enumerate(values) for b in values[i + 1:]]
    assert min(gaps) > 1e-8


def test_grid_independence():
    tau = 10.0
    low = discretized_spectrum(FIG3, tau, 40)
    high = discretized_spectrum(FIG3, tau, 80)
    trusted = low[np.abs(low) * tau <= 0.3 * 40]
    assert len(trusted) >= 2
    for lam in trusted:
        assert np.min(np.abs(high - lam)) < 1e-8


def test_newton_from_nearby_guess():
    tau = 2.4184
    probe = newton_refine(FIG3, tau, 0.01 + 0.86j)
    assert abs(probe.lam.real) < 1e-3
    assert probe.lam.imag == pytest.approx(math.sqrt(0.75), abs=1e-3)


def test_winding_number_integral():
    for tau in (0.5, 3.0, 12.0):
        w = winding_number(SYSTEMS["general_class2"], tau)
        assert abs(w - round(w)) < 1e-3


def test_zero_delay_count():
    assert unstable_at_zero_delay(SYSTEMS["detB0_class1"]) == 1
    assert unstable_at_zero_delay(FIG3) == 0


def test_count_matches_spectrum_random():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        sysm = LinearDDE(rng.normal(size=(n, n)), rng.normal(size=(n, n)))
        tau = rng.uniform(0.1, 20)
        R = contour_radius(sysm, tau)
        win = compute_spectrum(sysm, tau, region=(0.0, R, -R, R))
        assert count_unstable(sysm, tau) == sum(lam.real > 0 for lam in win.values)


def test_axis_roots_exact():
    roots = axis_roots(LinearDDE.scalar(0.0, -1.0), math.pi / 2)
    assert roots == pytest.approx([-1j, 1j], abs=1e-10)


def test_root_on_contour():
    sysm = SYSTEMS["sum_class3"]
    with pytest.raises(RootOnContour):
        count_unstable(sysm, 1.0)
    assert count_unstable(sysm, 1.0, exclude_axis_roots=True) >= 0


def test_distance_shrinks_with_delay():
    br = sample_branches(FIG3)
    assert spectrum_vs_acs_distance(FIG3, 60.46, br) < spectrum_vs_acs_distance(FIG3, 9.67, br)


def test_distance_without_branches():
    assert spectrum_vs_acs_distance(SYSTEMS["no_delay_effect"], 5.0, []) == math.inf
