"""Characteristic roots computed without the ACS: collocation, Newton, argument principle."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .core import CharRootProbe, LinearDDE, char_matrix, char_scale
from .errors import NoConvergence, QuadratureStall, RootOnContour

TRUST_FACTOR = 0.8
NEWTON_TOL = 1e-10
NEWTON_MAXITER = 50
AXIS_TOL = 1e-6
MAX_ARG_STEP = math.pi / 4
PANEL_MISMATCH = 0.05
MAX_NODES = 2_000_000


def cheb(N: int):
    """Chebyshev points x_j = cos(j pi / N) and the differentiation matrix."""
    x = np.cos(np.pi * np.arange(N + 1) / N)
    c = np.hstack([2.0, np.ones(N - 1), 2.0]) * (-1.0) ** np.arange(N + 1)
    X = np.tile(x, (N + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


def generator_matrix(sys: LinearDDE, tau: float, N: int) -> np.ndarray:
    """Collocation of the solution-operator generator on [-tau, 0].

    Node 0 is theta = 0 (carries x' = A x(0) + B x(-tau)), node N is theta = -tau.
    """
    n = sys.n
    _, D = cheb(N)
    big = np.kron((2.0 / tau) * D, np.eye(n))
    big[:n, :] = 0.0
    big[:n, :n] = sys.A
    big[:n, N * n:] = sys.B
    return big


def discretized_spectrum(sys: LinearDDE, tau: float, N: int = 64) -> np.ndarray:
    """Eigenvalues of the collocated generator inside the trusted disc |lambda| tau <= 0.8 N."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    if N < 16:
        raise ValueError("N must be at least 16")
    ev = np.linalg.eigvals(generator_matrix(sys, tau, N))
    ev = ev[np.isfinite(ev)]
    return ev[np.abs(ev) * tau <= TRUST_FACTOR * N]


def newton_refine(sys: LinearDDE, tau: float, lambda0: complex,
                  max_iter: int = NEWTON_MAXITER) -> CharRootProbe:
    """Newton on chi(lambda) = 0.

    chi'/chi = tr(M^{-1} M') with M = lambda I - A - B e^{-lambda tau} and
    M' = I + tau B e^{-lambda tau}, so only a linear solve is needed per step.
    """
    n = sys.n
    lam = complex(lambda0)
    eye = np.eye(n)
    # far-left iterates overflow e^{-lambda tau}; the finiteness checks below end the run
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(1, max_iter + 1):
            e = np.exp(-lam * tau)
            M = lam * eye - sys.A - sys.B * e
            Mp = eye + tau * sys.B * e
            try:
                ratio = np.trace(np.linalg.solve(M, Mp))
            except np.linalg.LinAlgError:
                return CharRootProbe(lam, tau, float(abs(np.linalg.det(M))), it)
            if ratio == 0 or not np.isfinite(ratio):
                break
            step = 1.0 / ratio
            lam -= step
            if not np.isfinite(lam):
                break
            res = abs(np.linalg.det(char_matrix(sys, tau, lam)))
            if res <= NEWTON_TOL * char_scale(sys, tau, lam) and abs(step) <= 1e-8 * (1 + abs(lam)):
                return CharRootProbe(lam, tau, float(res), it)
    raise NoConvergence(f"Newton did not converge from {lambda0!r}", last=lam)


@dataclass
class SpectrumWindow:
    tau: float
    region: tuple
    roots: list = field(default_factory=list)  # (lambda, residual)
    N: int = 0
    iterations: int = 0

    @property
    def values(self) -> np.ndarray:
        return np.array([r for r, _ in self.roots], dtype=complex)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["re", "im", "residual"])
        for lam, res in self.roots:
            w.writerow([repr(lam.real), repr(lam.imag), repr(res)])
        return buf.getvalue()


def auto_order(tau: float, radius: float) -> int:
    """Smallest even collocation order whose trusted disc covers |lambda| <= radius."""
    N = int(math.ceil(radius * tau / TRUST_FACTOR)) + 8
    return max(32, N + (N % 2))


def compute_spectrum(sys: LinearDDE, tau: float, N: int | None = None,
                     region=None) -> SpectrumWindow:
    """Refined characteristic roots in ``region`` = (re_min, re_max, im_min, im_max).

    Defaults: the rectangle Re >= -2/tau-ish around the trusted disc.
    """
    if region is None:
        r = sys.scale + 1.0
        region = (-max(1.0, 2.0 / tau) - r, r, -r, r)
    re_min, re_max, im_min, im_max = region
    if N is None:
        radius = max(abs(complex(a, b)) for a in (re_min, re_max) for b in (im_min, im_max))
        N = auto_order(tau, radius)
    seeds = discretized_spectrum(sys, tau, N)
    seeds = seeds[(seeds.real >= re_min) & (seeds.real <= re_max)
                  & (seeds.imag >= im_min) & (seeds.imag <= im_max)]
    roots: list = []
    iters = 0
    for s in seeds:
        try:
            probe = newton_refine(sys, tau, s)
        except NoConvergence:
            continue
        iters += probe.iterations
        lam = probe.lam
        if abs(lam - s) > 1e-3 * (1 + abs(s)):
            continue
        if any(abs(lam - q) <= 1e-8 * (1 + abs(lam)) for q, _ in roots):
            continue
        roots.append((lam, probe.residual))
    roots.sort(key=lambda t: (-t[0].real, t[0].imag))
    return SpectrumWindow(tau, tuple(region), roots, N, iters)


def _chi_batch(sys, tau, z):
    n = sys.n
    e = np.exp(-z * tau)
    M = z[:, None, None] * np.eye(n) - sys.A - e[:, None, None] * sys.B
    return np.linalg.det(M)


def _logderiv_batch(sys, tau, z):
    n = sys.n
    e = np.exp(-z * tau)
    M = z[:, None, None] * np.eye(n) - sys.A - e[:, None, None] * sys.B
    Mp = np.eye(n) + tau * e[:, None, None] * sys.B
    return np.trace(np.linalg.solve(M, Mp), axis1=1, axis2=2)


def contour_radius(sys: LinearDDE, tau: float) -> float:
    return 2.0 * sys.scale + 2.0 / tau


INDENT_RADIUS = 1e-4


def _segments(R, axis_roots=(), rho=INDENT_RADIUS):
    """Pieces of the right half-disc boundary, counterclockwise.

    Each piece is (kind, a, b): an arc of radius R, an axis segment from
    i a down to i b, or a right-hand semicircle of radius ``rho`` about i a
    that leaves the axis root at i a outside the region.
    """
    segs = [("arc", R, 0.0)]
    top = R
    for y in sorted(axis_roots, reverse=True):
        segs.append(("line", top, y + rho))
        segs.append(("indent", y, rho))
        top = y - rho
    segs.append(("line", top, -R))
    return segs


def _contour(R, axis_roots=(), rho=INDENT_RADIUS):
    """z(s), z'(s) on s in [0, len(segments)] and the segment list."""
    segs = _segments(R, axis_roots, rho)

    def pieces(s):
        s = np.asarray(s, dtype=float)
        idx = np.clip(np.floor(s).astype(int), 0, len(segs) - 1)
        return idx, s - idx

    def z(s):
        idx, t = pieces(s)
        out = np.empty(t.shape, dtype=complex)
        for j, (kind, a, b) in enumerate(segs):
            m = idx == j
            tt = t[m]
            if kind == "arc":
                out[m] = a * np.exp(1j * np.pi * (tt - 0.5))
            elif kind == "line":
                out[m] = 1j * (a + (b - a) * tt)
            else:
                out[m] = 1j * a + b * np.exp(1j * np.pi * (0.5 - tt))
        return out

    def dz(s):
        idx, t = pieces(s)
        out = np.empty(t.shape, dtype=complex)
        for j, (kind, a, b) in enumerate(segs):
            m = idx == j
            tt = t[m]
            if kind == "arc":
                out[m] = 1j * np.pi * a * np.exp(1j * np.pi * (tt - 0.5))
            elif kind == "line":
                out[m] = 1j * (b - a)
            else:
                out[m] = -1j * np.pi * b * np.exp(1j * np.pi * (0.5 - tt))
        return out

    return z, dz, segs


def winding_number(sys: LinearDDE, tau: float, axis_roots=()) -> float:
    """Unrounded winding number of chi around the right half disc of radius R.

    Roots listed in ``axis_roots`` (imaginary parts) are bypassed by small
    semicircles and so are not counted.  Each panel's integral of chi'/chi
    is taken as the principal log increment of chi, accepted only when the
    argument moves by less than pi/4 and the trapezoid rule on chi'/chi
    agrees with it; otherwise the panel is halved.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    R = contour_radius(sys, tau)
    z, dz, segs = _contour(R, axis_roots)
    density = 16 + 4.0 * tau * R
    grids = []
    for j, (kind, a, b) in enumerate(segs):
        length = math.pi * a if kind == "arc" else (abs(a - b) if kind == "line" else math.pi * b)
        m = int(min(200_000, max(16, density * length / R)))
        grids.append(np.linspace(j, j + 1, m + 1))
    # segment joints stay nodes
    nodes = np.unique(np.concatenate(grids))
    zs = z(nodes)
    chi = _chi_batch(sys, tau, zs)
    f = _logderiv_batch(sys, tau, zs) * dz(nodes)
    smin = 1e-13
    total = 0.0
    while True:
        with np.errstate(divide="ignore", invalid="ignore"):
            inc = np.log(chi[1:] / chi[:-1])
        trap = 0.5 * np.diff(nodes) * (f[:-1] + f[1:])
        bad = (~np.isfinite(inc)) | (np.abs(inc.imag) >= MAX_ARG_STEP) | (np.abs(trap - inc) > PANEL_MISMATCH)
        if not bad.any():
            total = float(np.sum(inc.imag))
            break
        widths = np.diff(nodes)[bad]
        if widths.min() < smin or len(nodes) > MAX_NODES:
            _check_axis_root(sys, tau, z(nodes[:-1][bad][np.argmin(widths)]))
            raise QuadratureStall("argument-principle panels stopped shrinking")
        mids = 0.5 * (nodes[:-1][bad] + nodes[1:][bad])
        zm = z(mids)
        chim = _chi_batch(sys, tau, zm)
        if np.any(chim == 0):
            _check_axis_root(sys, tau, zm[chim == 0][0])
        fm = _logderiv_batch(sys, tau, zm) * dz(mids)
        nodes = np.concatenate([nodes, mids])
        order = np.argsort(nodes, kind="stable")
        nodes = nodes[order]
        chi = np.concatenate([chi, chim])[order]
        f = np.concatenate([f, fm])[order]
    return total / (2 * math.pi)


def _check_axis_root(sys, tau, z0):
    root = _refine_axis_root(sys, tau, z0)
    if root is not None:
        raise RootOnContour(root)


def _refine_axis_root(sys, tau, z0):
    try:
        probe = newton_refine(sys, tau, complex(z0))
    except NoConvergence:
        return None
    if abs(probe.lam.real) < AXIS_TOL:
        return probe.lam
    return None


def axis_roots(sys: LinearDDE, tau: float) -> list[complex]:
    """Characteristic roots within 1e-6 of the imaginary axis inside |Im| <= R.

    Found by Newton refinement from local minima of |chi| along the axis.
    """
    R = contour_radius(sys, tau)
    w = np.linspace(-R, R, int(min(400_000, 64 + 8 * tau * R)) | 1)
    zs = 1j * w
    mag = np.abs(_chi_batch(sys, tau, zs))
    loc = np.flatnonzero((mag[1:-1] <= mag[:-2]) & (mag[1:-1] <= mag[2:])) + 1
    found: list[complex] = []
    for i in loc:
        root = _refine_axis_root(sys, tau, zs[i])
        if root is not None and abs(root.imag) <= R and not any(abs(root - q) < 1e-8 for q in found):
            found.append(root)
    return sorted(found, key=lambda z: z.imag)


def count_unstable(sys: LinearDDE, tau: float, exclude_axis_roots: bool = False) -> int:
    """Number of characteristic roots with Re(lambda) > 0 via the argument principle.

    A root within 1e-6 of the imaginary axis raises RootOnContour unless
    ``exclude_axis_roots`` is set, in which case the contour is indented
    around it and it is not counted (e.g. the permanent root lambda = 0 when
    det(A + B) = 0).
    """
    roots = axis_roots(sys, tau)
    if roots and not exclude_axis_roots:
        raise RootOnContour(roots[0])
    raw = winding_number(sys, tau, [r.imag for r in roots])
    k = round(raw)
    if abs(raw - k) > 1e-3:
        raise QuadratureStall(f"winding number {raw} is not an integer")
    return int(k)


def unstable_at_zero_delay(sys: LinearDDE) -> int:
    """Eigenvalues of A + B with real part above 1e-10."""
    return int(np.sum(np.linalg.eigvals(sys.A + sys.B).real > 1e-10))


def _polyline_distance(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Distance from each point P (k, 2) to the polyline through Q (m, 2)."""
    a, b = Q[:-1], Q[1:]
    ab = b - a
    L2 = np.sum(ab * ab, axis=1)
    L2 = np.where(L2 > 0, L2, 1.0)
    ap = P[:, None, :] - a[None, :, :]
    t = np.clip(np.sum(ap * ab[None], axis=2) / L2[None], 0.0, 1.0)
    proj = a[None] + t[..., None] * ab[None]
    return np.sqrt(np.min(np.sum((P[:, None, :] - proj) ** 2, axis=2), axis=1))


def spectrum_vs_acs_distance(sys: LinearDDE, tau: float, branches, roots=None) -> float:
    """Max distance from rescaled roots (tau Re lambda, Im lambda) to the ACS curves.

    Only roots with Re(lambda) >= -1/tau enter.  Returns inf without branches.
    """
    if not branches:
        return math.inf
    if roots is None:
        om_need = 0.0
        for br in branches:
            g = br.gamma
            sel = g >= -1.0
            if sel.any():
                om_need = max(om_need, float(np.max(np.abs(br.omega[sel]))))
        radius = om_need + 1.0
        win = compute_spectrum(sys, tau, region=(-1.0 / tau - 1e-9, radius, -radius, radius))
        roots = win.values
    roots = np.asarray(roots, dtype=complex)
    roots = roots[roots.real >= -1.0 / tau]
    if len(roots) == 0:
        return math.inf
    P = np.column_stack([tau * roots.real, roots.imag])
    best = np.full(len(P), np.inf)
    for br in branches:
        g = br.gamma
        fin = np.isfinite(g)
        Q = np.column_stack([g[fin], br.omega[fin]])
        best = np.minimum(best, _polyline_distance(P, Q))
    return float(best.max())
