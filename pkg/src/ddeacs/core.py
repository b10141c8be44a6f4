"""Characteristic quasipolynomial and generating polynomial of x' = A x(t) + B x(t - tau)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateFrequency, InputError

COEFF_TRUNCATION = 1e-12
SAMPLE_RADIUS = 2.0
ROOT_RESIDUAL = 1e-10
KER_B_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LinearDDE:
    """Real n x n coefficient pair (A, B) of a linear DDE with one discrete delay."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float)
        if A.ndim == 0:
            A = A.reshape(1, 1)
        if B.ndim == 0:
            B = B.reshape(1, 1)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InputError(f"A must be a square matrix, got shape {A.shape}")
        if B.shape != A.shape:
            raise InputError(f"A and B must share a shape, got {A.shape} and {B.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise InputError("matrix entries must be finite")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def norm_A(self) -> float:
        return float(np.linalg.norm(self.A, 2))

    @property
    def norm_B(self) -> float:
        return float(np.linalg.norm(self.B, 2))

    @property
    def scale(self) -> float:
        """1 + ||A||_2 + ||B||_2, the reference magnitude for residual tolerances."""
        return 1.0 + self.norm_A + self.norm_B

    @classmethod
    def scalar(cls, a: float, b: float) -> "LinearDDE":
        return cls([[a]], [[b]])

    @classmethod
    def from_dict(cls, doc) -> "LinearDDE":
        if not isinstance(doc, dict) or "A" not in doc or "B" not in doc:
            raise InputError('expected a JSON object with keys "A" and "B"')
        try:
            A = np.array(doc["A"], dtype=float)
            B = np.array(doc["B"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise InputError(f"matrix entries must be real numbers: {exc}") from None
        return cls(A, B)

    @classmethod
    def from_json(cls, text: str) -> "LinearDDE":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from None
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path) -> "LinearDDE":
        return cls.from_json(Path(path).read_text())

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "B": self.B.tolist()}


@dataclass(frozen=True, eq=False)
class ComplexPolynomial:
    """Coefficients c_0..c_d of a polynomial in Y (c_k multiplies Y**k)."""

    coeffs: np.ndarray
    degenerate: bool = False

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, y):
        # np.polyval wants the highest power first
        return np.polyval(self.coeffs[::-1], y)

    def scale_at(self, y) -> float:
        return float(np.sum(np.abs(self.coeffs) * np.abs(y) ** np.arange(len(self.coeffs))))


@dataclass(frozen=True)
class CharRootProbe:
    lam: complex
    tau: float
    residual: float
    iterations: int = 0


def char_matrix(sys: LinearDDE, tau: float, lam: complex) -> np.ndarray:
    return lam * np.eye(sys.n) - sys.A - sys.B * np.exp(-lam * tau)


def eval_char(sys: LinearDDE, tau: float, lam: complex) -> complex:
    """chi(lambda) = det[lambda I - A - B exp(-lambda tau)] via LU with partial pivoting."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return complex(np.linalg.det(char_matrix(sys, tau, complex(lam))))


def char_scale(sys: LinearDDE, tau: float, lam: complex) -> float:
    """Magnitude of the terms entering chi(lambda); residuals are measured against it."""
    growth = abs(np.exp(-complex(lam) * tau))
    return (1.0 + abs(lam) + sys.norm_A + sys.norm_B * growth) ** sys.n


def _sample_points(n: int) -> np.ndarray:
    return SAMPLE_RADIUS * np.exp(2j * np.pi * np.arange(n + 1) / (n + 1))


def poly_coeffs(A: np.ndarray, B: np.ndarray, omegas) -> np.ndarray:
    """Coefficients of p_omega for every omega in ``omegas``; shape (m, n + 1).

    Interpolates det[i omega I - A - B Y] on the circle |Y| = 2 and truncates
    coefficients below the relative threshold to exact zeros.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    n = A.shape[0]
    ys = _sample_points(n)
    eye = np.eye(n)
    M = (1j * omegas[:, None, None, None] * eye
         - A[None, None, :, :]
         - ys[None, :, None, None] * B[None, None, :, :])
    vals = np.linalg.det(M)
    coeffs = np.fft.fft(vals, axis=1) / (n + 1)
    coeffs /= SAMPLE_RADIUS ** np.arange(n + 1)
    cmax = np.max(np.abs(coeffs), axis=1, keepdims=True)
    coeffs[np.abs(coeffs) < COEFF_TRUNCATION * cmax] = 0.0
    return coeffs


def effective_degree(coeffs: np.ndarray) -> np.ndarray:
    """Index of the highest nonzero coefficient per row (0 for constants)."""
    nz = coeffs != 0
    idx = np.arange(coeffs.shape[-1])
    return np.max(np.where(nz, idx, 0), axis=-1)


def generating_polynomial(sys: LinearDDE, omega: float) -> ComplexPolynomial:
    c = poly_coeffs(sys.A, sys.B, [omega])[0]
    d = int(effective_degree(c))
    return ComplexPolynomial(c[: d + 1].copy(), degenerate=(d == 0))


def _polish(coeffs: np.ndarray, roots: np.ndarray, steps: int = 3) -> np.ndarray:
    """A few Newton steps on each root; coeffs (m, d+1) low-to-high, roots (m, d)."""
    d = coeffs.shape[1] - 1
    dcoef = coeffs[:, 1:] * np.arange(1, d + 1)
    for _ in range(steps):
        p = np.zeros_like(roots)
        dp = np.zeros_like(roots)
        for k in range(d, -1, -1):
            p = p * roots + coeffs[:, k:k + 1]
        for k in range(d - 1, -1, -1):
            dp = dp * roots + dcoef[:, k:k + 1]
        ok = dp != 0
        step = np.where(ok, p / np.where(ok, dp, 1.0), 0.0)
        roots = roots - step
    return roots


def roots_batch(coeffs: np.ndarray) -> np.ndarray:
    """Roots of many polynomials of the same degree d >= 1; coeffs (m, d+1)."""
    m, dp1 = coeffs.shape
    d = dp1 - 1
    if d == 1:
        return (-coeffs[:, 0] / coeffs[:, 1])[:, None]
    monic = coeffs[:, :d] / coeffs[:, d:d + 1]
    comp = np.zeros((m, d, d), dtype=complex)
    comp[:, 1:, :-1] = np.eye(d - 1)
    comp[:, :, -1] = -monic
    roots = np.linalg.eigvals(comp)
    return _polish(coeffs, roots)


def generating_roots(sys: LinearDDE, omega: float) -> np.ndarray:
    """All roots Y_j(omega) of the generating polynomial.

    Raises DegenerateFrequency when p_omega does not depend on Y.
    """
    poly = generating_polynomial(sys, omega)
    if poly.degenerate:
        raise DegenerateFrequency(omega)
    roots = roots_batch(poly.coeffs[None, :])[0]
    if poly.coeffs[0] != 0:
        roots = roots[roots != 0]
    return roots


def delay_independent_roots(sys: LinearDDE) -> list[complex]:
    """Imaginary eigenvalues i*omega of A with an eigenvector in ker B.

    These are characteristic roots for every delay and never take part in
    delay-induced crossings.
    """
    n = sys.n
    tol = KER_B_TOL * sys.scale
    found: list[complex] = []
    for ev in np.linalg.eigvals(sys.A):
        if abs(ev.real) > tol:
            continue
        lam = 1j * ev.imag
        stacked = np.vstack([lam * np.eye(n) - sys.A, sys.B.astype(complex)])
        smin = np.linalg.svd(stacked, compute_uv=False)[-1]
        if smin <= tol and not any(abs(lam - f) <= tol for f in found):
            found.append(complex(lam))
    return sorted(found, key=lambda z: z.imag)
