"""Critical-delay lattices, crossing speeds, unstable dimension and double-Hopf coincidences."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .acs import FD_STEP_REL, Crossing, Direction, default_omega_max, find_crossings, sample_branches
from .core import LinearDDE, eval_char, generating_roots
from .errors import (Degenerate, NonTransverseCrossing, OnBifurcation, ResidualCheckFailed,
                     Unclassified)
from .oracle import newton_refine, unstable_at_zero_delay

TWO_PI = 2.0 * math.pi
DELAY_RESIDUAL = 1e-8
BIFURCATION_TOL = 1e-9
HOPF_MATCH_TOL = 1e-6
NEAR_MISS_TOL = 1e-2


@dataclass
class DelaySequence:
    """tau_k = (phi_H + 2 pi k) / omega_H with phi_H in [0, 2 pi).

    ``intercept`` and ``period`` give the affine form with the phase kept in
    (-pi, pi], so the intercept may be negative.
    """

    omega_H: float
    phi_H: float
    direction: Direction
    ks: list
    taus: list
    residuals: list = field(default_factory=list)
    branch_id: int = 0

    @property
    def period(self) -> float:
        return TWO_PI / self.omega_H

    @property
    def intercept(self) -> float:
        phi = self.phi_H - TWO_PI if self.phi_H > math.pi else self.phi_H
        return phi / self.omega_H

    def tau(self, k: int) -> float:
        return (self.phi_H + TWO_PI * k) / self.omega_H

    def to_dict(self) -> dict:
        return {
            "omega_H": self.omega_H,
            "phi_H": self.phi_H,
            "direction": self.direction.value,
            "taus": list(self.taus),
            "affine": {"intercept": self.intercept, "period": self.period},
        }


def _normalized_phase(phi: float) -> float:
    phi = math.fmod(phi, TWO_PI)
    if phi < 0:
        phi += TWO_PI
    return 0.0 if phi >= TWO_PI else phi


def critical_delays(crossing: Crossing, k_max: int, sys: LinearDDE | None = None) -> DelaySequence:
    """Positive critical delays tau_0 < ... < tau_kmax of a transverse crossing.

    When ``sys`` is given each delay is checked against
    |chi(i omega_H)| <= 1e-8 (1 + ||A|| + ||B||).
    """
    if crossing.direction is Direction.NON_TRANSVERSE:
        raise NonTransverseCrossing(f"crossing at omega={crossing.omega_H:.6g} is not transverse")
    if not crossing.omega_H > 0:
        raise NonTransverseCrossing("critical delays need omega_H > 0")
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    w = float(crossing.omega_H)
    phi = _normalized_phase(crossing.phi_H)
    ks, taus, res = [], [], []
    for k in range(k_max + 1):
        tau = (phi + TWO_PI * k) / w
        if tau <= 0:
            continue
        ks.append(k)
        taus.append(tau)
        if sys is not None:
            r = abs(eval_char(sys, tau, 1j * w))
            if r > DELAY_RESIDUAL * sys.scale:
                raise ResidualCheckFailed(
                    f"|chi(i*{w:.10g})| = {r:.3g} at tau_{k} = {tau:.10g}")
            res.append(r)
    return DelaySequence(w, phi, crossing.direction, ks, taus, res, crossing.branch_id)


def delay_sequences(sys: LinearDDE, k_max: int, crossings=None, omega_max=None,
                    n_samples: int = 1024) -> list[DelaySequence]:
    """One sequence per transverse crossing with omega_H > 0."""
    if crossings is None:
        crossings = find_crossings(sample_branches(sys, omega_max, n_samples))
    return [critical_delays(c, k_max, sys) for c in crossings
            if c.omega_H > 0 and c.direction is not Direction.NON_TRANSVERSE]


def _branch_derivatives(sys: LinearDDE, omega: float, phi: float):
    """(gamma', phi') at a crossing by central differences along the root with |Y| = 1."""
    roots = generating_roots(sys, omega)
    target = np.exp(-1j * phi)
    y0 = roots[np.argmin(np.abs(roots - target))]
    h = default_omega_max(sys) * FD_STEP_REL
    rp = generating_roots(sys, omega + h)
    rm = generating_roots(sys, omega - h)
    yp = rp[np.argmin(np.abs(rp - y0))]
    ym = rm[np.argmin(np.abs(rm - y0))]
    dgamma = (math.log(abs(ym)) - math.log(abs(yp))) / (2 * h)
    dphi = -float(np.angle(yp / ym)) / (2 * h)
    return dgamma, dphi


def crossing_direction_rate(sys: LinearDDE, crossing: Crossing, tau_H: float) -> float:
    """d Re(lambda) / d tau at a critical delay.

    -omega_H gamma' / ((tau_H - phi')^2 + gamma'^2) with phi(omega) = -arg Y(omega).
    """
    if crossing.direction is Direction.NON_TRANSVERSE:
        raise NonTransverseCrossing(f"crossing at omega={crossing.omega_H:.6g} is not transverse")
    dgamma, dphi = _branch_derivatives(sys, crossing.omega_H, crossing.phi_H)
    if dgamma == 0.0:
        raise NonTransverseCrossing("gamma' vanishes at the crossing")
    w = crossing.omega_H
    return -w * dgamma / ((tau_H - dphi) ** 2 + dgamma ** 2)


def track_root(sys: LinearDDE, lam0: complex, tau0: float, tau1: float,
               steps: int = 8) -> complex:
    """Follow a characteristic root from tau0 to tau1 by Newton continuation."""
    lam = complex(lam0)
    prev_tau = tau0
    velocity = 0j
    for tau in np.linspace(tau0, tau1, steps + 1)[1:]:
        guess = lam + velocity * (tau - prev_tau)
        probe = newton_refine(sys, float(tau), guess)
        if tau != prev_tau:
            velocity = (probe.lam - lam) / (tau - prev_tau)
        prev_tau, lam = float(tau), probe.lam
    return lam


def tracked_rate(sys: LinearDDE, omega_H: float, tau_H: float, eps: float | None = None) -> float:
    """Centred difference of Re(lambda) along the root through i omega_H at tau_H."""
    if eps is None:
        eps = 1e-3 * tau_H
    lam0 = newton_refine(sys, tau_H, 1j * omega_H).lam
    up = track_root(sys, lam0, tau_H, tau_H + eps)
    down = track_root(sys, lam0, tau_H, tau_H - eps)
    return (up.real - down.real) / (2 * eps)


# -- unstable dimension -------------------------------------------------------

def unstable_dimension_scalar(a: float, b: float, tau: float) -> int:
    """Unstable dimension of x' = a x + b x(t - tau) from the crossing count.

    2 ceil((tau omega_H - phi_H) / 2 pi) + nu when |b| > |a|, else nu, where
    nu = 1 for a + b > 0 and 0 for a + b < 0.
    """
    if a + b == 0:
        raise Degenerate("a + b = 0: lambda = 0 is a root for every delay")
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    nu = 1 if a + b > 0 else 0
    if abs(b) <= abs(a):
        return nu
    w = math.sqrt(b * b - a * a)
    phi = _normalized_phase(-math.atan2(w, -a) + math.atan2(0.0, b))
    x = (tau * w - phi) / TWO_PI
    k = round(x)
    if abs(tau - (phi + TWO_PI * k) / w) <= BIFURCATION_TOL * max(1.0, tau):
        raise OnBifurcation(f"tau = {tau!r} is the critical delay tau_{k}")
    return 2 * math.ceil(x) + nu


def _adjugate(M: np.ndarray) -> np.ndarray:
    """adj(M) from the SVD; valid for singular M."""
    U, sv, Vh = np.linalg.svd(M)
    n = len(sv)
    others = np.array([np.prod(np.delete(sv, i)) for i in range(n)])
    sign = np.linalg.det(U) * np.linalg.det(Vh)
    return sign * (Vh.T.conj() * others) @ U.T.conj()


@dataclass(frozen=True)
class ZeroExchange:
    """A real root passing through the permanent root lambda = 0 at ``tau``."""

    tau: float
    delta: int


def zero_root_exchange(sys: LinearDDE) -> ZeroExchange | None:
    """Delay where a real root crosses lambda = 0 when det(A + B) = 0.

    chi'(0) = tr(adj(-A - B)(I + tau B)) is affine in tau; where it vanishes
    lambda = 0 is a double root and the second real root changes sides.
    Near there that root sits at -2 chi'(0) / chi''(0), which fixes the sign.
    """
    M = -sys.A - sys.B
    scale = sys.scale ** sys.n
    if abs(np.linalg.det(M)) > 1e-9 * scale:
        return None
    J = _adjugate(M)
    c0 = float(np.trace(J).real)
    c1 = float(np.trace(J @ sys.B).real)
    if abs(c1) <= 1e-12 * scale or -c0 / c1 <= 0:
        return None
    tau_c = -c0 / c1
    h = 1e-4 / (1.0 + tau_c)
    second = (eval_char(sys, tau_c, h) + eval_char(sys, tau_c, -h)).real / h ** 2
    if second == 0.0:
        return None
    speed = -2.0 * c1 / second
    return ZeroExchange(tau_c, 1 if speed > 0 else -1)


def unstable_dimension(sys: LinearDDE, tau: float, verdict=None, omega_max=None,
                       n_samples: int = 1024) -> int:
    """D_u(0) + 2 #(destabilizing tau_k <= tau) - 2 #(stabilizing tau_k <= tau).

    When det(A + B) = 0 a real root may also pass through the permanent
    root lambda = 0 at one delay; that event adds its +-1.
    """
    from .classify import ClassTag, classify

    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if verdict is None:
        verdict = classify(sys, omega_max, n_samples)
    if verdict.tag is ClassTag.OTHER:
        raise Unclassified("crossing pattern is outside classes 0/I/II/III; use the spectrum oracle")
    du = unstable_at_zero_delay(sys)
    for c in verdict.crossings:
        if c.omega_H <= 0 or c.direction is Direction.NON_TRANSVERSE:
            continue
        phi = _normalized_phase(c.phi_H)
        x = (tau * c.omega_H - phi) / TWO_PI
        k = round(x)
        if k >= 0 and abs(tau - (phi + TWO_PI * k) / c.omega_H) <= BIFURCATION_TOL * max(1.0, tau):
            raise OnBifurcation(f"tau = {tau!r} is a critical delay of omega_H = {c.omega_H:.10g}")
        count = max(0, math.floor(x) + 1)
        du += 2 * count if c.direction is Direction.DESTABILIZING else -2 * count
    ex = zero_root_exchange(sys)
    if ex is not None:
        if abs(tau - ex.tau) <= BIFURCATION_TOL * max(1.0, tau):
            raise OnBifurcation(f"tau = {tau!r} is the zero-root exchange delay")
        if tau > ex.tau:
            du += ex.delta
    return du


# -- double Hopf --------------------------------------------------------------

@dataclass
class DoubleHopfReport:
    matches: list
    near_misses: list


def double_hopf_search(seq1: DelaySequence, seq2: DelaySequence, k_max: int,
                       tol: float = HOPF_MATCH_TOL, near: float = NEAR_MISS_TOL) -> DoubleHopfReport:
    """Pairs (k, l, tau) with |tau_k^(1) - tau_l^(2)| <= tol; near misses up to ``near``."""
    t1 = np.array([seq1.tau(k) for k in range(k_max + 1)])
    t2 = np.array([seq2.tau(l) for l in range(k_max + 1)])
    diff = np.abs(t1[:, None] - t2[None, :])
    matches, misses = [], []
    for k, l in zip(*np.nonzero(diff <= near)):
        entry = (int(k), int(l), float(0.5 * (t1[k] + t2[l])))
        (matches if diff[k, l] <= tol else misses).append(entry)
    return DoubleHopfReport(matches, misses)


def rotational_system(alpha: float, beta: float, mu: float) -> LinearDDE:
    return LinearDDE([[alpha, beta], [-beta, alpha]], [[mu, 0.0], [0.0, mu]])


def _outer_inner(sys: LinearDDE, k_max: int):
    seqs = delay_sequences(sys, k_max)
    outer = [s for s in seqs if s.direction is Direction.DESTABILIZING]
    inner = [s for s in seqs if s.direction is Direction.STABILIZING]
    if len(outer) != 1 or len(inner) != 1:
        raise Unclassified("expected one destabilizing and one stabilizing crossing")
    return outer[0], inner[0]


@dataclass
class DoubleHopfPoint:
    mu: float
    k: int
    l: int
    tau: float
    omega_1: float
    omega_2: float
    gap: float
    residual_1: float
    residual_2: float


def locate_double_hopf(alpha: float, beta: float, mu_range=(1.9, 2.5), k_max: int = 10,
                       n_scan: int = 61, tol: float = HOPF_MATCH_TOL) -> list[DoubleHopfPoint]:
    """Values mu where tau_k^(1)(mu) = tau_l^(2)(mu) for the rotational family.

    Scans mu, brackets sign changes of tau_k^(1) - tau_l^(2) for k, l <= k_max,
    refines each by brentq and checks both imaginary pairs against chi.
    """
    def taus(mu):
        s1, s2 = _outer_inner(rotational_system(alpha, beta, mu), k_max)
        return (np.array([s1.tau(k) for k in range(k_max + 1)]),
                np.array([s2.tau(l) for l in range(k_max + 1)]))

    grid = np.linspace(mu_range[0], mu_range[1], n_scan)
    table = [taus(m) for m in grid]
    found: list[DoubleHopfPoint] = []
    for k in range(k_max + 1):
        for l in range(k_max + 1):
            f = np.array([t1[k] - t2[l] for t1, t2 in table])
            for i in np.flatnonzero(f[:-1] * f[1:] < 0):
                def gap(mu, k=k, l=l):
                    t1, t2 = taus(mu)
                    return t1[k] - t2[l]

                mu_star = brentq(gap, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-15)
                sys = rotational_system(alpha, beta, mu_star)
                s1, s2 = _outer_inner(sys, k_max)
                t1, t2 = s1.tau(k), s2.tau(l)
                if abs(t1 - t2) > tol:
                    continue
                tau = 0.5 * (t1 + t2)
                found.append(DoubleHopfPoint(
                    float(mu_star), k, l, tau, s1.omega_H, s2.omega_H, abs(t1 - t2),
                    abs(eval_char(sys, tau, 1j * s1.omega_H)),
                    abs(eval_char(sys, tau, 1j * s2.omega_H))))
    found.sort(key=lambda p: p.mu)
    return found


def sequences_to_json(seqs, tau=None, d_u=None, double_hopf=None) -> str:
    doc = {"sequences": [s.to_dict() for s in seqs]}
    if tau is not None:
        doc["unstable_dimension"] = {"tau": tau, "D_u": d_u}
    if double_hopf is not None:
        doc["double_hopf"] = [list(m) for m in double_hopf]
    return json.dumps(doc, indent=2)


__all__ = [
    "DelaySequence", "DoubleHopfPoint", "DoubleHopfReport",
    "critical_delays", "crossing_direction_rate", "delay_sequences", "double_hopf_search",
    "locate_double_hopf", "rotational_system", "sequences_to_json", "track_root",
    "tracked_rate", "unstable_at_zero_delay", "zero_root_exchange", "unstable_dimension", "unstable_dimension_scalar",
]
