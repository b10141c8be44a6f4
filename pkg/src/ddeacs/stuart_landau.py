"""Stuart-Landau oscillator with delayed self-feedback.

    z'(t) = (alpha + i beta) z(t) - z(t) |z(t)|^2 + z(t - tau)

Rotating waves z = a exp(i omega t) satisfy, with phi = omega tau - 2 pi k,

    a^2 = alpha + cos(phi),  omega = beta - sin(phi),  tau = (phi + 2 pi k) / omega.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .acs import Crossing, Direction
from .core import LinearDDE
from .delays import DelaySequence, critical_delays
from .errors import StepTooLarge

TWO_PI = 2.0 * math.pi
POLE_TOL = 1e-12


@dataclass(frozen=True)
class SLParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("alpha and beta must be finite")

    def linearization(self) -> LinearDDE:
        """Real 2x2 form of z' = (alpha + i beta) z + z(t - tau)."""
        a, b = self.alpha, self.beta
        return LinearDDE([[a, -b], [b, a]], np.eye(2))


@dataclass
class SLHopf:
    destabilizing: DelaySequence | None
    stabilizing: DelaySequence | None
    notes: list = field(default_factory=list)

    @property
    def sequences(self) -> list:
        return [s for s in (self.destabilizing, self.stabilizing) if s is not None]


def sl_hopf_sequence(p: SLParams, k_max: int) -> SLHopf:
    """Hopf delays of the trivial state.

    omega_H1,2 = beta +- sqrt(1 - alpha^2) with phi_H = -arg(+-i sqrt(1 - alpha^2) - alpha);
    the outer crossing destabilizes and the inner one stabilizes when
    alpha^2 + beta^2 > 1.  The attribute names follow that case.
    """
    if abs(p.alpha) >= 1:
        return SLHopf(None, None, ["|alpha| >= 1: the ACS never reaches the axis, no Hopf points"])
    s = math.sqrt(1.0 - p.alpha ** 2)
    sys = p.linearization()
    notes: list[str] = []
    seqs = []
    for sign, direction in ((1.0, Direction.DESTABILIZING), (-1.0, Direction.STABILIZING)):
        w = p.beta + sign * s
        phi = -math.atan2(sign * s, -p.alpha)
        if w < 0:
            # the conjugate pair crosses at -w, where gamma' has the opposite sign
            w, phi = -w, -phi
            direction = Direction.DESTABILIZING
            notes.append("beta < sqrt(1 - alpha^2): both crossings destabilize")
        if w == 0:
            notes.append(f"crossing frequency {'outer' if sign > 0 else 'inner'} vanishes")
            seqs.append(None)
            continue
        seqs.append(critical_delays(Crossing(w, phi, 0.0, 0, direction), k_max, sys))
    return SLHopf(seqs[0], seqs[1], notes)


@dataclass
class PeriodicBranch:
    """One connected piece of the rotating-wave family for a fixed k."""

    k: int
    component_id: int
    phi: np.ndarray
    a: np.ndarray
    tau: np.ndarray
    omega: np.ndarray
    start_hopf: float | None = None
    end_hopf: float | None = None
    start_pole: bool = False
    end_pole: bool = False

    @property
    def is_bridge(self) -> bool:
        """Both ends sit on Hopf points of the trivial state."""
        return self.start_hopf is not None and self.end_hopf is not None

    @property
    def unbounded(self) -> bool:
        return self.start_pole or self.end_pole


def rotating_wave_residual(p: SLParams, a, tau, omega) -> np.ndarray:
    """|alpha + i beta - a^2 + exp(-i omega tau) - i omega|."""
    a, tau, omega = np.asarray(a), np.asarray(tau), np.asarray(omega)
    return np.abs(p.alpha + 1j * p.beta - a ** 2 + np.exp(-1j * omega * tau) - 1j * omega)


def _phi_grid(p: SLParams, n_phi: int) -> np.ndarray:
    grid = np.linspace(-math.pi, math.pi, n_phi, endpoint=False)
    extra = []
    if abs(p.alpha) < 1:
        c = math.acos(-p.alpha)
        extra += [-c, c]
    if abs(p.beta) <= 1:
        s = math.asin(p.beta)
        extra += [s, math.pi - s if s > 0 else -math.pi - s]
    extra = [x for x in extra if -math.pi <= x < math.pi]
    return np.unique(np.concatenate([grid, extra]))


def sl_branches(p: SLParams, k_max: int, n_phi: int = 2000) -> list[PeriodicBranch]:
    """Rotating-wave branches for k = 0..k_max, phi in [-pi, pi).

    Samples with a^2 <= 0 or tau < 0 are dropped; components are split where
    beta - sin(phi) vanishes or changes sign (tau has a pole there).
    """
    phi = _phi_grid(p, n_phi)
    a2 = p.alpha + np.cos(phi)
    omega = p.beta - np.sin(phi)
    pole = np.abs(omega) <= POLE_TOL
    hopf_c = math.acos(-p.alpha) if abs(p.alpha) < 1 else None
    out: list[PeriodicBranch] = []
    for k in range(k_max + 1):
        with np.errstate(divide="ignore", invalid="ignore"):
            tau = (phi + TWO_PI * k) / omega
        zero_a = np.zeros_like(phi, dtype=bool)
        if hopf_c is not None:
            zero_a = np.isin(phi, [-hopf_c, hopf_c])
        keep = ((a2 > 0) | zero_a) & ~pole & (tau >= 0) & np.isfinite(tau)
        # component breaks: dropped samples, poles, or omega sign flips
        brk = np.ones(len(phi), dtype=bool)
        brk[1:] = ~keep[:-1] | (np.sign(omega[1:]) != np.sign(omega[:-1]))
        comp = -1
        pieces: dict[int, list[int]] = {}
        for i in range(len(phi)):
            if not keep[i]:
                continue
            if brk[i]:
                comp += 1
            pieces.setdefault(comp, []).append(i)
        for cid, idx in pieces.items():
            idx = np.array(idx)
            i0, i1 = idx[0], idx[-1]
            br = PeriodicBranch(
                k, cid, phi[idx], np.sqrt(np.maximum(a2[idx], 0.0)), tau[idx], omega[idx])
            if zero_a[i0]:
                br.start_hopf = float(tau[i0])
            if zero_a[i1]:
                br.end_hopf = float(tau[i1])
            br.start_pole = bool(i0 > 0 and (pole[i0 - 1] or np.sign(omega[i0 - 1]) != np.sign(omega[i0])))
            br.end_pole = bool(i1 + 1 < len(phi) and
                               (pole[i1 + 1] or np.sign(omega[i1 + 1]) != np.sign(omega[i1])))
            out.append(br)
    return out


def all_disconnected(branches) -> bool:
    """True when branches run into poles of tau(phi) and none joins two Hopf points."""
    return any(b.unbounded for b in branches) and not any(b.is_bridge for b in branches)


def endpoint_mismatches(p: SLParams, branches, k_max: int) -> list[float]:
    """Distance from every a = 0 endpoint to the nearest Hopf delay."""
    hopf = sl_hopf_sequence(p, k_max + 1)
    taus = np.concatenate([np.asarray(s.taus) for s in hopf.sequences]) if hopf.sequences else np.empty(0)
    out = []
    for b in branches:
        for t in (b.start_hopf, b.end_hopf):
            if t is not None:
                out.append(float(np.min(np.abs(taus - t))) if len(taus) else math.inf)
    return out


def branches_to_csv(branches, fh=None) -> str:
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf)
    w.writerow(["k", "phi", "a", "tau", "omega", "component_id"])
    for b in branches:
        for row in zip(b.phi, b.a, b.tau, b.omega):
            w.writerow([b.k, *(repr(float(x)) for x in row), b.component_id])
    return buf.getvalue() if fh is None else ""


# -- time integration ---------------------------------------------------------

@dataclass
class Trajectory:
    t: np.ndarray
    z: np.ndarray

    @property
    def abs_z(self) -> np.ndarray:
        return np.abs(self.z)

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf)
        w.writerow(["t", "re_z", "im_z", "abs_z"])
        for t, z in zip(self.t, self.z):
            w.writerow([repr(float(t)), repr(float(z.real)), repr(float(z.imag)), repr(float(abs(z)))])
        return buf.getvalue() if fh is None else ""


def sl_simulate(p: SLParams, tau: float, z_history: complex, t_end: float,
                dt: float) -> Trajectory:
    """Method of steps with classical RK4 and cubic Hermite dense output.

    The history on [-tau, 0] is the constant ``z_history``.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    if dt > tau / 20:
        raise StepTooLarge(f"dt = {dt:g} exceeds tau / 20 = {tau / 20:g}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    lin = complex(p.alpha, p.beta)
    n = int(math.ceil(t_end / dt))
    z = np.empty(n + 1, dtype=complex)
    f = np.empty(n + 1, dtype=complex)
    zh = complex(z_history)

    def rhs(x, xd):
        return lin * x - x * (x.real * x.real + x.imag * x.imag) + xd

    def delayed(s):
        if s <= 0.0:
            return zh
        j = int(s / dt)
        th = s / dt - j
        if th == 0.0:
            return z[j]
        h00 = (1 + 2 * th) * (1 - th) ** 2
        h10 = th * (1 - th) ** 2
        h01 = th * th * (3 - 2 * th)
        h11 = th * th * (th - 1)
        return h00 * z[j] + h10 * dt * f[j] + h01 * z[j + 1] + h11 * dt * f[j + 1]

    z[0] = zh
    f[0] = rhs(zh, zh)
    for i in range(n):
        t = i * dt
        x = z[i]
        d_half = delayed(t + 0.5 * dt - tau)
        k1 = f[i]
        k2 = rhs(x + 0.5 * dt * k1, d_half)
        k3 = rhs(x + 0.5 * dt * k2, d_half)
        k4 = rhs(x + dt * k3, delayed(t + dt - tau))
        z[i + 1] = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        f[i + 1] = rhs(z[i + 1], delayed(t + dt - tau))
    return Trajectory(np.arange(n + 1) * dt, z)


@dataclass
class GrowthProbe:
    rate: float
    window: tuple
    saturated: bool
    trajectory: Trajectory


def sl_growth_rate(p: SLParams, tau: float, amplitude: float = 1e-6, t_end: float | None = None,
                   dt: float | None = None, saturation: float = 1e-2) -> GrowthProbe:
    """Growth rate of ln|z| near the trivial state.

    Integrates from a constant history of size ``amplitude``, cuts the run
    where |z| first exceeds ``saturation`` and fits a line to ln|z| over the
    last quarter of what remains.
    """
    if t_end is None:
        t_end = 40.0 * tau
    if dt is None:
        dt = tau / 40.0
    traj = sl_simulate(p, tau, complex(amplitude), t_end, dt)
    mag = traj.abs_z
    over = np.flatnonzero(mag > saturation)
    stop = int(over[0]) if len(over) else len(mag)
    start = max(0, stop - max(stop // 4, 2))
    t = traj.t[start:stop]
    with np.errstate(divide="ignore"):
        y = np.log(mag[start:stop])
    ok = np.isfinite(y)
    rate = float(np.polyfit(t[ok], y[ok], 1)[0]) if ok.sum() >= 2 else -math.inf
    return GrowthProbe(rate, (float(t[0]), float(t[-1])), bool(len(over)), traj)
