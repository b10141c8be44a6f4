"""Universality classes 0/I/II/III from the ACS crossing pattern, plus closed-form 2x2 criteria."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .acs import ZERO_BAND, Crossing, Direction, find_crossings, sample_branches
from .core import LinearDDE, delay_independent_roots
from .errors import Degenerate, Inconclusive, PreconditionViolated, ZeroDelayCoupling

DET_ZERO = 1e-10
IDENTITY_REL = 1e-9

NOT_APPLICABLE = "not_applicable"


class ClassTag(str, enum.Enum):
    ZERO = "0"
    I = "I"  # noqa: E741
    II = "II"
    III = "III"
    OTHER = "Other"


@dataclass
class UniversalityClass:
    tag: ClassTag
    crossings: list = field(default_factory=list)
    pattern: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    lemma_checks: dict = field(default_factory=dict)
    delay_independent: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "class": self.tag.value,
            "crossings": [c.to_dict() for c in self.crossings],
            "lemma_checks": dict(self.lemma_checks),
            "notes": list(self.notes),
            "delay_independent_roots": [[z.real, z.imag] for z in self.delay_independent],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d) -> "UniversalityClass":
        crossings = [Crossing.from_dict(c) for c in d["crossings"]]
        return cls(
            tag=ClassTag(d["class"]),
            crossings=crossings,
            pattern=[(c.omega_H, c.direction.value) for c in crossings],
            notes=list(d.get("notes", [])),
            lemma_checks=dict(d.get("lemma_checks", {})),
            delay_independent=[complex(re, im) for re, im in d.get("delay_independent_roots", [])],
        )

    @classmethod
    def from_json(cls, text: str) -> "UniversalityClass":
        return cls.from_dict(json.loads(text))


# -- closed-form two-variable quantities ------------------------------------

@dataclass(frozen=True)
class TwoVarInvariants:
    detA: float
    detB: float
    trA: float
    trB: float
    C: float
    det_sum: float
    det_diff: float
    scale: float


def two_var_invariants(sys: LinearDDE) -> TwoVarInvariants:
    if sys.n != 2:
        raise PreconditionViolated(f"two-variable criterion needs n = 2, got n = {sys.n}")
    A, B = sys.A, sys.B
    detA = float(np.linalg.det(A))
    detB = float(np.linalg.det(B))
    det_sum = float(np.linalg.det(A + B))
    det_diff = float(np.linalg.det(A - B))
    scale = max(1.0, float(np.sum(A * A) + np.sum(B * B)))
    return TwoVarInvariants(detA, detB, float(np.trace(A)), float(np.trace(B)),
                            det_sum - detA - detB, det_sum, det_diff, scale)


def _detB_zero(inv: TwoVarInvariants) -> bool:
    return abs(inv.detB) <= DET_ZERO * inv.scale


def _rel_equal(x: float, y: float, rel: float = IDENTITY_REL) -> bool:
    return abs(x - y) <= rel * max(abs(x), abs(y), np.finfo(float).tiny)


def class1_scalar_check(a: float, b: float) -> bool:
    """Scalar x' = a x + b x(t - tau) is class I iff |b| > |a|."""
    if b == 0:
        raise ZeroDelayCoupling("b = 0: the delay does not enter the equation")
    return abs(b) > abs(a)


def class1_2var_detB0_check(sys: LinearDDE) -> bool:
    inv = two_var_invariants(sys)
    if not _detB_zero(inv):
        raise PreconditionViolated(f"det B = {inv.detB:g} is not zero")
    tiny = DET_ZERO * inv.scale
    if abs(inv.C) <= tiny and abs(inv.trB) <= tiny:
        raise Degenerate("C, Tr B and det B vanish: the delay has no effect on the spectrum")
    # |det A| = |C| within tolerance is the class III boundary, not class I
    return abs(inv.detA) < abs(inv.C) and not _rel_equal(abs(inv.detA), abs(inv.C))


def class1_2var_necessary(sys: LinearDDE) -> bool:
    """det B != 0 and |C| > |det A + det B|; False certifies 'not class I' when det B != 0."""
    inv = two_var_invariants(sys)
    return (not _detB_zero(inv)) and abs(inv.C) > abs(inv.detA + inv.detB)


def class2_rotational_check(alpha: float, beta: float, mu: float) -> bool:
    """A = [[alpha, beta], [-beta, alpha]], B = mu I is class II iff |alpha| < |mu| and alpha^2 + beta^2 > mu^2."""
    if not beta > 0:
        raise PreconditionViolated("beta must be positive")
    if mu == 0:
        raise PreconditionViolated("mu must be nonzero")
    return abs(alpha) < abs(mu) and alpha * alpha + beta * beta > mu * mu


def rotational_parameters(sys: LinearDDE):
    """(alpha, |beta|, mu) when (A, B) has the rotational form, else None."""
    if sys.n != 2:
        return None
    A, B = sys.A, sys.B
    if not (A[0, 0] == A[1, 1] and A[0, 1] == -A[1, 0] and A[0, 1] != 0):
        return None
    if not (B[0, 1] == 0 and B[1, 0] == 0 and B[0, 0] == B[1, 1] and B[0, 0] != 0):
        return None
    return float(A[0, 0]), abs(float(A[0, 1])), float(B[0, 0])


def class3_detB0_check(sys: LinearDDE) -> bool:
    inv = two_var_invariants(sys)
    if not _detB_zero(inv):
        raise PreconditionViolated(f"det B = {inv.detB:g} is not zero")
    return (_rel_equal(abs(inv.detA), abs(inv.C))
            and inv.trA ** 2 - inv.trB ** 2 < 2 * inv.detA)


def _identity_holds(value: float, inv: TwoVarInvariants) -> bool:
    ref = abs(inv.detA) + abs(inv.detB) + abs(inv.C)
    return abs(value) <= IDENTITY_REL * max(ref, np.finfo(float).tiny)


def class3_necessary_sum(sys: LinearDDE) -> bool:
    """Necessary conditions for class III when det(A + B) = 0 and det B != 0.

    |det A| > |det B| and  nu1^2 + 2 [nu2 - nu1 Tr B + (nu1^2 / nu2) det B] < 0,
    with nu1 = Tr A + Tr B, nu2 = det B - det A.  The second inequality is
    gamma''(0) > 0 on the branch through Y = 1.
    """
    inv = two_var_invariants(sys)
    if _detB_zero(inv):
        raise PreconditionViolated("det B must be nonzero")
    if not _identity_holds(inv.det_sum, inv):
        raise PreconditionViolated(f"det(A + B) = {inv.det_sum:g} is not zero")
    nu1 = inv.trA + inv.trB
    nu2 = inv.detB - inv.detA
    if nu2 == 0:
        return False
    curv = nu1 ** 2 + 2 * (nu2 - nu1 * inv.trB + nu1 ** 2 / nu2 * inv.detB)
    return abs(inv.detA) > abs(inv.detB) and curv < 0


def class3_necessary_diff(sys: LinearDDE) -> bool:
    """Necessary conditions for class III when det(A - B) = 0 and det B != 0.

    C^2 > max(4 det A det B, 2 det A det B + 2 det B^2) and
    2 [nu4 - nu3 Tr B + (nu3^2 / nu4) det B] - nu3^2 > 0,
    with nu3 = Tr A - Tr B, nu4 = det(A + B) - det A - 3 det B.  The second
    inequality is gamma''(0) > 0 for the branch through Y = -1.
    """
    inv = two_var_invariants(sys)
    if _detB_zero(inv):
        raise PreconditionViolated("det B must be nonzero")
    if not _identity_holds(inv.det_diff, inv):
        raise PreconditionViolated(f"det(A - B) = {inv.det_diff:g} is not zero")
    nu3 = inv.trA - inv.trB
    nu4 = inv.det_sum - inv.detA - 3 * inv.detB
    if nu4 == 0:
        return False
    c2 = inv.C ** 2
    cond3 = c2 > max(4 * inv.detA * inv.detB, 2 * inv.detA * inv.detB + 2 * inv.detB ** 2)
    curv = 2 * (nu4 - nu3 * inv.trB + nu3 ** 2 / nu4 * inv.detB) - nu3 ** 2
    return cond3 and curv > 0


def lemma_checks(sys: LinearDDE) -> dict:
    """Every closed-form criterion whose preconditions hold; the rest are not_applicable."""
    names = ["class1_2var_detB0", "class1_2var_necessary", "class2_rotational",
             "class3_detB0", "class3_necessary_sum", "class3_necessary_diff"]
    out = {k: NOT_APPLICABLE for k in names}
    if sys.n == 1:
        b = float(sys.B[0, 0])
        out = {"class1_scalar": class1_scalar_check(float(sys.A[0, 0]), b) if b != 0 else NOT_APPLICABLE}
        return out
    if sys.n != 2:
        return out
    funcs = {
        "class1_2var_detB0": class1_2var_detB0_check,
        "class1_2var_necessary": class1_2var_necessary,
        "class3_detB0": class3_detB0_check,
        "class3_necessary_sum": class3_necessary_sum,
        "class3_necessary_diff": class3_necessary_diff,
    }
    for name, fn in funcs.items():
        try:
            out[name] = bool(fn(sys))
        except (PreconditionViolated, Degenerate):
            pass
    rot = rotational_parameters(sys)
    if rot is not None:
        out["class2_rotational"] = class2_rotational_check(*rot)
    return out


# -- numerical classification -------------------------------------------------

def _check_zero_band(branches):
    """Inconclusive when a branch hugs gamma = 0 over more than one base grid step."""
    for br in branches:
        small = np.abs(br.gamma) < ZERO_BAND
        if not small.any():
            continue
        edges = np.diff(np.concatenate([[0], small.astype(int), [0]]))
        starts = np.flatnonzero(edges == 1)
        stops = np.flatnonzero(edges == -1) - 1
        for a, b in zip(starts, stops):
            if br.omega[b] - br.omega[a] > branches.base_step:
                raise Inconclusive(
                    f"branch {br.branch_id} stays within {ZERO_BAND:g} of zero on "
                    f"[{br.omega[a]:.6g}, {br.omega[b]:.6g}]")


def _positive_count(branches):
    """(omega, #branches with gamma > band, #branches with |gamma| <= band) on omega >= 0."""
    om = branches.omega
    sel = om >= 0
    G = np.array([br.gamma[sel] for br in branches])
    pos = np.sum(G > ZERO_BAND, axis=0)
    amb = np.sum(np.abs(G) <= ZERO_BAND, axis=0)
    return om[sel], pos, amb


def _branch_profile(branches, bid, w_h):
    """Class III shape on omega > 0: branch ``bid`` positive on (0, w_h) and
    negative beyond, every other branch never positive."""
    for br in branches:
        om, g = br.omega, br.gamma
        sel = (om > 0) & (np.abs(g) > ZERO_BAND)
        if br.branch_id == bid:
            inside = sel & (om < w_h)
            outside = sel & (om > w_h)
            if np.any(g[inside] < 0) or np.any(g[outside] > 0):
                return False
        elif np.any(g[sel] > 0):
            return False
    return True


def _profile_matches(om, pos, amb, intervals):
    """intervals: list of (lo, hi, expected count); ambiguous samples are skipped."""
    for lo, hi, want in intervals:
        m = (om > lo) & (om < hi) & (amb == 0)
        if np.any(pos[m] != want):
            return False
    return True


def classify(sys: LinearDDE, omega_max: float | None = None,
             n_samples: int = 1024) -> UniversalityClass:
    """Universality class from the ACS crossing pattern.

    Raises Inconclusive when a branch stays on gamma = 0 over an interval.
    """
    branches = sample_branches(sys, omega_max, n_samples)
    notes: list[str] = []
    checks = lemma_checks(sys)
    di = delay_independent_roots(sys)
    if di:
        notes.append("delay-independent imaginary roots (eigenvectors in ker B): "
                     + ", ".join(f"{z.imag:+.6g}i" for z in di))
    if not branches:
        notes.append("generating polynomial is degenerate for every omega: the delay has no effect")
        return UniversalityClass(ClassTag.ZERO, [], [], notes, checks, di)
    _check_zero_band(branches)
    crossings = find_crossings(branches)
    pattern = [(c.omega_H, c.direction.value) for c in crossings]
    zero = [c for c in crossings if c.omega_H == 0.0]
    pos = [c for c in crossings if c.omega_H > 0.0]
    tag = ClassTag.OTHER
    if any(c.direction is Direction.NON_TRANSVERSE for c in pos):
        notes.append("tangential zero of the ACS: transversality fails")
    else:
        om, cnt, amb = _positive_count(branches)
        top = float(om[-1]) + 1.0
        dirs = [c.direction for c in pos]
        D, S = Direction.DESTABILIZING, Direction.STABILIZING
        if not zero and not pos:
            if _profile_matches(om, cnt, amb, [(-1.0, top, 0)]):
                tag = ClassTag.ZERO
        elif not zero and dirs == [D]:
            w = pos[0].omega_H
            if _profile_matches(om, cnt, amb, [(-1.0, w, 1), (w, top, 0)]):
                tag = ClassTag.I
        elif not zero and dirs == [S, D]:
            w2, w1 = pos[0].omega_H, pos[1].omega_H
            if _profile_matches(om, cnt, amb, [(-1.0, w2, 0), (w2, w1, 1), (w1, top, 0)]):
                tag = ClassTag.II
        elif len(zero) == 1 and dirs == [D] and zero[0].branch_id == pos[0].branch_id:
            w = pos[0].omega_H
            if (_profile_matches(om, cnt, amb, [(0.0, w, 1), (w, top, 0)])
                    and _branch_profile(branches, pos[0].branch_id, w)):
                tag = ClassTag.III
        if zero and tag is not ClassTag.III:
            notes.append("gamma(0) = 0 without the class III pattern")
    return UniversalityClass(tag, crossings, pattern, notes, checks, di)
