"""Spectral classification of the derivation D = ad(X).

The periodicity verdict follows the unique-frequency rule: the flow is
periodic iff the nonzero eigenvalues of D are exactly +-i*alpha for a single
alpha > 0, with period 2*pi/alpha. Rationally related frequencies are
reported as non-periodic with their distinct alpha values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .algebra import AlgebraElement, ad_matrix
from .errors import AllZero, WrongAlgebra, ZeroVector
from .linalg import Spectrum, eigen_decompose, mat_exp

__all__ = [
    "Verdict",
    "SpectralReport",
    "analyze_derivation",
    "classify_spectrum",
    "check_hyperbolic",
    "is_hyperbolic_matrix",
    "check_semisimple_eigenvalues",
    "lyapunov_exponent",
    "Periodicity",
    "so4_periodicity_criterion",
    "so4_periodicity_pfaffian",
    "so4_ad_frequencies",
    "so4_pfaffian",
]

ZERO_ATOL = 1e-12  # derivation counts as the zero matrix
ZERO_RTOL = 1e-9  # eigenvalue counts as zero
REAL_RTOL = 1e-9  # real parts merged / treated as zero
ALPHA_RTOL = 1e-8  # two frequencies are "the same alpha"
HYP_RTOL = 1e-9
CRIT_RTOL = 1e-9  # |bc - ed| criterion, relative to squared coefficient scale

ALL_FIXED = "all-fixed"
PERIODIC = "periodic"
NON_PERIODIC = "non-periodic"


@dataclass(frozen=True)
class Verdict:
    kind: str
    period: float | None = None
    alpha: float | None = None
    alphas: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == PERIODIC:
            d["period"] = self.period
            d["alpha"] = self.alpha
        if self.kind == NON_PERIODIC:
            d["alphas"] = list(self.alphas)
        return d


@dataclass(frozen=True, eq=False)
class SpectralReport:
    algebra: str
    coefficients: np.ndarray
    derivation: np.ndarray
    spectrum: Spectrum
    realpart_decomposition: dict[float, int]
    is_hyperbolic: bool
    all_semisimple: bool
    verdict: Verdict
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        eig = [
            {"re": z.real, "im": z.imag, "alg_mult": a, "geo_mult": g}
            for z, a, g in zip(self.spectrum.eigenvalues, self.spectrum.algebraic, self.spectrum.geometric)
        ]
        return {
            "algebra": self.algebra,
            "coefficients": [float(c) for c in self.coefficients],
            "eigenvalues": eig,
            "verdict": self.verdict.to_dict(),
            "flags": {
                "hyperbolic": self.is_hyperbolic,
                "all_semisimple": self.all_semisimple,
                "realpart_decomposition": {format(k, ".17g"): v for k, v in self.realpart_decomposition.items()},
                **self.extra,
            },
        }


def _scale(A: np.ndarray) -> float:
    return max(1.0, float(np.abs(A).sum(axis=1).max())) if A.size else 1.0


def _merge(values: list[float], close) -> list[float]:
    out: list[list[float]] = []
    for v in sorted(values):
        if out and close(out[-1][-1], v):
            out[-1].append(v)
        else:
            out.append([v])
    return [float(np.mean(g)) for g in out]


def realpart_decomposition(spec: Spectrum, scale: float) -> dict[float, int]:
    tol = REAL_RTOL * scale
    groups: list[tuple[list[float], int]] = []
    for z, m in sorted(zip(spec.eigenvalues, spec.algebraic), key=lambda p: p[0].real):
        if groups and abs(groups[-1][0][-1] - z.real) <= tol:
            groups[-1][0].append(z.real)
            groups[-1] = (groups[-1][0], groups[-1][1] + m)
        else:
            groups.append(([z.real], m))
    out = {}
    for vals, m in groups:
        key = float(np.mean(vals))
        if abs(key) <= tol:
            key = 0.0
        out[key] = out.get(key, 0) + m
    return out


def classify_spectrum(spec: Spectrum, scale: float, zero_matrix: bool = False) -> Verdict:
    if zero_matrix:
        return Verdict(ALL_FIXED)
    vals = spec.all_values()
    nonzero = vals[np.abs(vals) > ZERO_RTOL * scale]
    if len(nonzero) == 0:
        # nonzero nilpotent derivation: no rotation, orbits are not closed
        return Verdict(NON_PERIODIC, alphas=())
    if np.any(np.abs(nonzero.real) > REAL_RTOL * scale):
        return Verdict(NON_PERIODIC, alphas=tuple(sorted({float(abs(z.imag)) for z in nonzero})))
    alphas = _merge(
        [float(abs(z.imag)) for z in nonzero],
        lambda p, q: abs(p - q) <= ALPHA_RTOL * max(p, q, 1.0),
    )
    if len(alphas) == 1:
        a = alphas[0]
        return Verdict(PERIODIC, period=2.0 * math.pi / a, alpha=a)
    return Verdict(NON_PERIODIC, alphas=tuple(alphas))


def analyze_derivation(X: AlgebraElement) -> SpectralReport:
    D = ad_matrix(X)
    spec = eigen_decompose(D)
    scale = _scale(D)
    zero = float(np.abs(D).max()) <= ZERO_ATOL if D.size else True
    verdict = classify_spectrum(spec, scale, zero_matrix=zero)
    hyper = bool(all(abs(z.real) > HYP_RTOL * scale for z in spec.eigenvalues))
    extra = {}
    if X.algebra.name == "so4":
        extra["bc_minus_ed"] = float(X.coords[1] * X.coords[2] - X.coords[4] * X.coords[3])
        extra["pfaffian"] = so4_pfaffian(*X.coords)
    return SpectralReport(
        algebra=X.algebra.name,
        coefficients=np.array(X.coords, dtype=float),
        derivation=D,
        spectrum=spec,
        realpart_decomposition=realpart_decomposition(spec, scale),
        is_hyperbolic=hyper,
        all_semisimple=spec.diagonalizable,
        verdict=verdict,
        extra=extra,
    )


def is_hyperbolic_matrix(A: np.ndarray) -> bool:
    """True iff no eigenvalue of A has (numerically) zero real part."""
    A = np.asarray(A)
    spec = eigen_decompose(A)
    tol = HYP_RTOL * _scale(A)
    return all(abs(z.real) > tol for z in spec.eigenvalues)


def check_hyperbolic(X: AlgebraElement) -> bool:
    return is_hyperbolic_matrix(ad_matrix(X))


def check_semisimple_eigenvalues(A: np.ndarray) -> bool:
    return eigen_decompose(np.asarray(A)).diagonalizable


def lyapunov_exponent(X: AlgebraElement, v: AlgebraElement, t_final: float) -> float:
    """(1/t) log(|e^{tD} v|_K / |v|_K), the norm taken from minus the Killing form.

    ``lyapunov_profile`` also returns the estimate at t/2, which shows whether
    the value has settled.
    """
    return lyapunov_profile(X, v, t_final)[1]


def lyapunov_profile(X: AlgebraElement, v: AlgebraElement, t_final: float) -> tuple[float, float]:
    """Exponent estimates at (t_final / 2, t_final)."""
    X._same(v)
    if not t_final > 0:
        raise ValueError("t_final must be positive")
    gram = -X.algebra.killing_gram
    base = float(v.coords @ gram @ v.coords)
    if base <= 0.0 or not np.any(v.coords):
        raise ZeroVector("v must be nonzero")
    D = ad_matrix(X)
    out = []
    for t in (0.5 * t_final, t_final):
        w = mat_exp(t * D) @ v.coords
        out.append(0.5 * math.log(float(w @ gram @ w) / base) / t)
    return out[0], out[1]


# --------------------------------------------------------------------------
# so(4) closed forms; coefficients (a, b, c, d, e, f) on (e12, e13, e14, e23, e24, e34)


class Periodicity(NamedTuple):
    periodic: bool
    period: float | None


def _coeff_scale(coeffs) -> float:
    s = max(abs(float(c)) for c in coeffs)
    if s == 0.0:
        raise AllZero("all six coefficients are zero")
    return s


def so4_periodicity_criterion(a, b, c, d, e, f) -> Periodicity:
    """Periodicity from the bc = ed closed form.

    Period 2*pi/sqrt((a+f)^2 + (b+e)^2 + (c-d)^2), falling back to
    2*pi/sqrt((a+f)^2 + (b-e)^2 + (c+d)^2) when the first radicand vanishes.
    This closed form does not agree with the actual spectrum of ad(X) off
    the generic set; ``so4_periodicity_pfaffian`` is the spectrally exact
    version.
    """
    s = _coeff_scale((a, b, c, d, e, f))
    periodic = abs(b * c - e * d) <= CRIT_RTOL * max(1.0, s * s)
    if not periodic:
        return Periodicity(False, None)
    r1 = (a + f) ** 2 + (b + e) ** 2 + (c - d) ** 2
    r2 = (a + f) ** 2 + (b - e) ** 2 + (c + d) ** 2
    zero = (ZERO_RTOL * max(1.0, s)) ** 2
    r = r1 if r1 > zero else r2
    if r <= zero:
        return Periodicity(True, None)
    return Periodicity(True, 2.0 * math.pi / math.sqrt(r))


def so4_pfaffian(a, b, c, d, e, f) -> float:
    """Pfaffian of the 4x4 matrix of X; zero iff X has rank <= 2."""
    return float(a * f - b * e + c * d)


def so4_ad_frequencies(a, b, c, d, e, f) -> tuple[float, float]:
    """Moduli of the two conjugate eigenvalue pairs of ad(X) on so(4).

    ad(X) has eigenvalues 0, 0, +-i*w1, +-i*w2 with
    w1 = sqrt((a+f)^2 + (b-e)^2 + (c+d)^2) and
    w2 = sqrt((a-f)^2 + (b+e)^2 + (c-d)^2);
    w1^2 - w2^2 = 4 * (af - be + cd).
    """
    w1 = math.sqrt((a + f) ** 2 + (b - e) ** 2 + (c + d) ** 2)
    w2 = math.sqrt((a - f) ** 2 + (b + e) ** 2 + (c - d) ** 2)
    return w1, w2


def so4_periodicity_pfaffian(a, b, c, d, e, f) -> Periodicity:
    """Unique-frequency rule evaluated on the exact so(4) eigenvalue moduli.

    Periodic iff w1 == w2 (vanishing Pfaffian) or exactly one of them is
    zero (X self-dual or anti-self-dual).
    """
    s = _coeff_scale((a, b, c, d, e, f))
    w = [x for x in so4_ad_frequencies(a, b, c, d, e, f) if x > ZERO_RTOL * max(1.0, s)]
    if len(w) == 1 or abs(w[0] - w[1]) <= ALPHA_RTOL * max(w[0], w[1], 1.0):
        alpha = max(w)
        return Periodicity(True, 2.0 * math.pi / alpha)
    return Periodicity(False, None)


def require_algebra(X: AlgebraElement, name: str) -> None:
    if X.algebra.name != name:
        raise WrongAlgebra(f"expected {name}, got {X.algebra.name}")
