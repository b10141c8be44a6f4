"""Sampling, branch matching and zero detection for the asymptotic continuous spectrum.

A branch is the curve omega -> Y_j(omega) of one root of the generating
polynomial, with gamma_j = -ln|Y_j|.  Zeros of gamma_j with omega >= 0 are the
only frequencies at which delay-induced crossings can happen.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment, minimize_scalar

from .core import LinearDDE, effective_degree, poly_coeffs, roots_batch
from .errors import BranchCollision

log = logging.getLogger(__name__)

GAMMA_JUMP = 0.05
AMBIGUITY_FACTOR = 10.0
MIN_STEP_REL = 1e-6
FD_STEP_REL = 1e-7
PERTURB = 1e-6
NEAR_ZERO_SAMPLES = 24
COLLISION_TOL = 1e-10
GAMMA_TOL = 1e-10
ZERO_BAND = 1e-8
TANGENCY_REL = 1e-6
MAX_REFINE_PASSES = 40


class Direction(str, enum.Enum):
    DESTABILIZING = "Destabilizing"
    STABILIZING = "Stabilizing"
    NON_TRANSVERSE = "NonTransverse"


def default_omega_max(sys: LinearDDE) -> float:
    """4 (1 + ||A||_2 + ||B||_2).

    Any root with |Y| <= 1 needs |omega| <= ||A|| + ||B||, so every branch is
    negative beyond this bound with a wide margin.
    """
    return 4.0 * sys.scale


@dataclass(frozen=True, eq=False)
class ACSBranch:
    branch_id: int
    omega: np.ndarray
    Y: np.ndarray

    @property
    def gamma(self) -> np.ndarray:
        return -np.log(np.abs(self.Y))

    @property
    def samples(self):
        return list(zip(self.omega.tolist(), self.Y.tolist(), self.gamma.tolist()))

    def value_near(self, omega: float) -> complex:
        i = int(np.argmin(np.abs(self.omega - omega)))
        return complex(self.Y[i])


class BranchSet(list):
    """List of ACSBranch with the sampling context attached."""

    def __init__(self, branches, sys, omega_max, base_step, min_step, degree):
        super().__init__(branches)
        self.sys = sys
        self.omega_max = omega_max
        self.base_step = base_step
        self.min_step = min_step
        self.degree = degree

    @property
    def omega(self) -> np.ndarray:
        return self[0].omega if self else np.empty(0)


@dataclass(frozen=True)
class Crossing:
    omega_H: float
    phi_H: float
    dgamma: float
    branch_id: int
    direction: Direction
    Y_H: complex = 0j
    dphi: float = 0.0

    def to_dict(self) -> dict:
        return {
            "omega_H": self.omega_H,
            "phi_H": self.phi_H,
            "dgamma": self.dgamma,
            "direction": self.direction.value,
            "branch_id": self.branch_id,
        }

    @classmethod
    def from_dict(cls, d) -> "Crossing":
        return cls(float(d["omega_H"]), float(d["phi_H"]), float(d["dgamma"]),
                   int(d["branch_id"]), Direction(d["direction"]))


def _roots_at(sys: LinearDDE, omegas, degree: int):
    """Roots at each omega; returns (ok_mask, roots) with rows of bad samples zeroed."""
    coeffs = poly_coeffs(sys.A, sys.B, omegas)
    deg = effective_degree(coeffs)
    ok = (deg == degree) & (coeffs[:, 0] != 0)
    roots = np.zeros((len(omegas), degree), dtype=complex)
    if ok.any():
        roots[ok] = roots_batch(coeffs[ok][:, : degree + 1])
    if degree > 1:
        diff = np.abs(roots[:, :, None] - roots[:, None, :])
        diff[:, np.arange(degree), np.arange(degree)] = np.inf
        mag = np.maximum(1.0, np.max(np.abs(roots), axis=1))
        ok &= np.min(diff, axis=(1, 2)) > COLLISION_TOL * mag
    return ok, roots


def _robust_roots(sys, omegas, degree, delta):
    """Roots on a grid, nudging degenerate/colliding samples by +-delta."""
    omegas = np.array(omegas, dtype=float)
    ok, roots = _roots_at(sys, omegas, degree)
    for sign in (1.0, -1.0):
        if ok.all():
            break
        bad = ~ok
        trial = omegas[bad] + sign * delta
        ok2, r2 = _roots_at(sys, trial, degree)
        idx = np.flatnonzero(bad)[ok2]
        omegas[idx] = trial[ok2]
        roots[idx] = r2[ok2]
        ok[idx] = True
    return omegas, ok, roots


def _match(roots: np.ndarray):
    """Reorder roots along the grid so that each column is a continuous branch.

    Returns the reordered array and, per step, (max matched displacement,
    ratio of best alternative cost to optimal cost).
    """
    m, d = roots.shape
    if d == 1 or m < 2:
        disp = np.abs(np.diff(roots, axis=0)).max(axis=1) if m > 1 else np.zeros(0)
        return roots.copy(), disp, np.full(max(m - 1, 0), np.inf)
    out = np.empty_like(roots)
    out[0] = roots[0]
    disp = np.empty(m - 1)
    ratio = np.empty(m - 1)
    if d == 2:
        a, b = roots[:-1], roots[1:]
        c_id = np.abs(a[:, 0] - b[:, 0]) + np.abs(a[:, 1] - b[:, 1])
        c_sw = np.abs(a[:, 0] - b[:, 1]) + np.abs(a[:, 1] - b[:, 0])
        swap = c_sw < c_id
        parity = np.concatenate([[False], np.cumsum(swap) % 2 == 1])
        out = np.where(parity[:, None], roots[:, ::-1], roots)
        disp = np.abs(np.diff(out, axis=0)).max(axis=1)
        best = np.minimum(c_id, c_sw)
        other = np.maximum(c_id, c_sw)
        ratio = np.where(best > 0, other / np.where(best > 0, best, 1.0), np.inf)
        return out, disp, ratio
    for k in range(1, m):
        cost = np.abs(out[k - 1][:, None] - roots[k][None, :])
        r, c = linear_sum_assignment(cost)
        out[k] = roots[k][c]
        disp[k - 1] = cost[r, c].max()
        best = cost[r, c].sum()
        # cheapest single transposition away from the optimum
        alt = np.inf
        for i in range(d):
            for j in range(i + 1, d):
                cc = c.copy()
                cc[i], cc[j] = cc[j], cc[i]
                alt = min(alt, cost[r, cc].sum())
        ratio[k - 1] = alt / best if best > 0 else np.inf
    return out, disp, ratio


def sample_branches(sys: LinearDDE, omega_max: float | None = None,
                    n_samples: int = 1024) -> BranchSet:
    """Sample and continuously match all ACS branches on [-omega_max, omega_max].

    The uniform grid is bisected wherever some branch jumps by more than 0.05 in
    gamma or the root pairing is ambiguous, down to omega_max * 1e-6.
    """
    if omega_max is None:
        omega_max = default_omega_max(sys)
    if omega_max <= 0:
        raise ValueError("omega_max must be positive")
    if n_samples < 64:
        raise ValueError("n_samples must be at least 64")
    min_step = omega_max * MIN_STEP_REL
    delta = min(PERTURB, min_step / 4)
    grid = np.linspace(-omega_max, omega_max, n_samples)
    base_step = grid[1] - grid[0]
    # narrow lobes at omega = 0 would otherwise slip between two samples
    near = np.geomspace(min_step, base_step, NEAR_ZERO_SAMPLES, endpoint=False)
    grid = np.unique(np.concatenate([grid, [0.0], near, -near]))

    coeffs = poly_coeffs(sys.A, sys.B, grid)
    degree = int(effective_degree(coeffs).max())
    if degree == 0:
        return BranchSet([], sys, omega_max, base_step, min_step, 0)

    omegas, ok, roots = _robust_roots(sys, grid, degree, delta)
    if not ok.all():
        bad = omegas[~ok]
        raise BranchCollision(float(bad[0]))

    for _ in range(MAX_REFINE_PASSES):
        order = np.argsort(omegas)
        omegas, roots = omegas[order], roots[order]
        matched, disp, ratio = _match(roots)
        gam = -np.log(np.abs(matched))
        jump = np.abs(np.diff(gam, axis=0)).max(axis=1)
        med = np.median(disp) if len(disp) else 0.0
        ambiguous = (disp > AMBIGUITY_FACTOR * med) | (ratio < 2.0)
        need = ((jump > GAMMA_JUMP) | ambiguous) & (np.diff(omegas) > 2 * min_step)
        if not need.any():
            break
        mids = 0.5 * (omegas[:-1][need] + omegas[1:][need])
        m_om, m_ok, m_roots = _robust_roots(sys, mids, degree, delta)
        if not m_ok.all():
            m_om, m_roots = m_om[m_ok], m_roots[m_ok]
        omegas = np.concatenate([omegas, m_om])
        roots = np.concatenate([matched, m_roots])
    else:
        log.warning("ACS refinement hit the pass limit (%d)", MAX_REFINE_PASSES)
    order = np.argsort(omegas)
    omegas, roots = omegas[order], roots[order]
    keep = np.concatenate([[True], np.diff(omegas) > 0])
    omegas, roots = omegas[keep], roots[keep]
    matched, _, _ = _match(roots)
    branches = [ACSBranch(j, omegas.copy(), matched[:, j].copy()) for j in range(degree)]
    return BranchSet(branches, sys, omega_max, base_step, min_step, degree)


def _tracked(sys, degree, omega, guess):
    """Root of p_omega closest to ``guess``."""
    ok, roots = _roots_at(sys, [omega], degree)
    r = roots[0]
    if not ok[0]:
        return complex(guess)
    return complex(r[np.argmin(np.abs(r - guess))])


def _phi(y: complex) -> float:
    phi = -np.angle(y)
    return float(np.pi if phi <= -np.pi else phi)


def roots_at_zero(branches: BranchSet):
    """(branch_id, Y_j(0)) for every branch, or [] when omega=0 is degenerate."""
    sys, degree = branches.sys, branches.degree
    ok, roots = _roots_at(sys, [0.0], degree)
    if not ok[0]:
        return []
    out = []
    taken = set()
    for y in roots[0]:
        # assign to the branch passing closest to y near omega = 0
        dists = [(abs(br.value_near(0.0) - y), br.branch_id) for br in branches
                 if br.branch_id not in taken]
        _, bid = min(dists)
        taken.add(bid)
        out.append((bid, complex(y)))
    return sorted(out)


def _tangency_tol(gamma, omega_max):
    g = gamma[np.isfinite(gamma)]
    span = float(g.max() - g.min()) if len(g) else 1.0
    return TANGENCY_REL * max(span, 1.0) / (2 * omega_max)


def find_crossings(branches: BranchSet, full_axis: bool = False) -> list[Crossing]:
    """Refined zeros of every branch, with transversality direction.

    Zeros at omega = 0 come back with phi_H in {0, pi} and direction
    NonTransverse (the root lambda = 0 does not move with the delay).
    Only omega_H >= 0 is returned unless ``full_axis`` is set.
    """
    if not branches:
        return []
    sys, degree, wmax = branches.sys, branches.degree, branches.omega_max
    h = wmax * FD_STEP_REL
    out: list[Crossing] = []

    zero_ids = set()
    for bid, y in roots_at_zero(branches):
        if abs(np.log(abs(y))) < ZERO_BAND:
            zero_ids.add(bid)
            phi = 0.0 if y.real > 0 else float(np.pi)
            out.append(Crossing(0.0, phi, 0.0, bid, Direction.NON_TRANSVERSE, y, 0.0))
    zero_guard = 2 * branches.base_step

    for br in branches:
        om, Y, g = br.omega, br.Y, br.gamma
        tol = _tangency_tol(g, wmax)
        found = []
        idx = np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)
        for k in idx:
            lo, hi = om[k], om[k + 1]
            if br.branch_id in zero_ids and lo - zero_guard <= 0 <= hi + zero_guard:
                if max(abs(g[k]), abs(g[k + 1])) < 1e-6:
                    continue
            ylo, yhi = Y[k], Y[k + 1]

            def gam(w, ylo=ylo, yhi=yhi, lo=lo, hi=hi):
                t = (w - lo) / (hi - lo)
                return -np.log(abs(_tracked(sys, degree, w, ylo + t * (yhi - ylo))))

            glo, ghi = gam(lo), gam(hi)
            if glo * ghi > 0:
                w = lo if abs(glo) < abs(ghi) else hi
            else:
                w = brentq(gam, lo, hi, xtol=1e-15 * max(1.0, abs(lo)), rtol=1e-15, maxiter=200)
            t = (w - lo) / (hi - lo)
            yH = _tracked(sys, degree, w, ylo + t * (yhi - ylo))
            found.append((w, yH))

        # touching zeros never change sign; look at small local extrema instead
        dg = np.diff(g)
        ext = np.flatnonzero((dg[:-1] * dg[1:] < 0)) + 1
        for k in ext:
            if abs(g[k]) > 1e-3 or k in idx or (k - 1) in idx:
                continue
            if br.branch_id in zero_ids and abs(om[k]) <= zero_guard:
                continue
            sgn = 1.0 if dg[k - 1] > 0 else -1.0  # maximum -> minimise -gamma
            yk = Y[k]

            def neg(w, yk=yk, sgn=sgn):
                return -sgn * -np.log(abs(_tracked(sys, degree, w, yk)))

            res = minimize_scalar(neg, bounds=(om[k - 1], om[k + 1]), method="bounded",
                                  options={"xatol": 1e-14 * max(1.0, abs(om[k]))})
            if abs(res.fun) < ZERO_BAND:
                w = float(res.x)
                out.append(Crossing(w, _phi(_tracked(sys, degree, w, yk)), 0.0,
                                    br.branch_id, Direction.NON_TRANSVERSE,
                                    _tracked(sys, degree, w, yk), 0.0))

        for w, yH in found:
            yp = _tracked(sys, degree, w + h, yH)
            ym = _tracked(sys, degree, w - h, yH)
            dgam = (np.log(abs(ym)) - np.log(abs(yp))) / (2 * h)
            dphi = -float(np.angle(yp / ym)) / (2 * h)
            if abs(dgam) < tol:
                direction = Direction.NON_TRANSVERSE
            elif dgam < 0:
                direction = Direction.DESTABILIZING
            else:
                direction = Direction.STABILIZING
            out.append(Crossing(float(w), _phi(yH), float(dgam), br.branch_id,
                                direction, yH, dphi))

    if not full_axis:
        out = [c for c in out if c.omega_H >= 0]
    out.sort(key=lambda c: (c.omega_H, c.branch_id))
    return out


def branches_to_csv(branches, fh=None) -> str:
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf)
    w.writerow(["branch_id", "omega", "gamma", "re_Y", "im_Y"])
    for br in branches:
        for om, y, g in zip(br.omega, br.Y, br.gamma):
            w.writerow([br.branch_id, repr(float(om)), repr(float(g)),
                        repr(float(y.real)), repr(float(y.imag))])
    return buf.getvalue() if fh is None else ""


def crossings_to_json(crossings) -> str:
    return json.dumps([c.to_dict() for c in crossings], indent=2)
