"""Bi-invariant Riemannian geometry from minus the Killing form.

Distances are ||log(g^-1 h)||_K. The principal logarithm is used away from
the cut locus; when g^-1 h has an eigenvalue within ``CUT_TOL`` of -1 the
distance comes from eigen-angles instead: d^2 = kappa * sum_j theta_j^2 over
all eigenvalues exp(i theta_j), theta_j in [-pi, pi], where kappa is the
ratio between the Killing gram and the trace form -tr(B_i B_j).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .algebra import AlgebraElement, LieAlgebra, get_algebra
from .errors import HNotInTube, InvalidTolerance, MixedGroups
from .flows import flow_matrices
from .groups import GroupElement, identity, random_element
from .linalg import eigvals_qr, mat_log_principal
from .spectral import PERIODIC, analyze_derivation

__all__ = [
    "MetricContext",
    "metric_context",
    "distances",
    "riemannian_distance",
    "VerificationReport",
    "verify_isometry",
    "verify_sphere_invariance",
    "PeriodResult",
    "detect_period",
    "OmegaLimitEstimate",
    "estimate_omega_limit",
    "verify_orbit_tube",
]

CUT_TOL = 1e-3
# groups whose logarithm is evaluated in closed form
CLOSED_FORM_GROUPS = ("so3", "su2")
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class MetricContext:
    algebra: LieAlgebra
    gram: np.ndarray
    kappa: float
    basis_norms: np.ndarray

    def norm(self, X: AlgebraElement) -> float:
        return math.sqrt(float(X.coords @ self.gram @ X.coords))

    def coords_stack(self, L: np.ndarray) -> np.ndarray:
        flat = L.reshape(len(L), -1)
        if np.iscomplexobj(self.algebra.basis):
            rhs = np.concatenate([flat.real, flat.imag], axis=1)
        else:
            rhs = flat.real
        return rhs @ self.algebra._pinv.T


@lru_cache(maxsize=None)
def _context(name: str) -> MetricContext:
    alg = get_algebra(name)
    gram = -alg.killing_gram
    if np.linalg.eigvalsh(gram).min() <= 0:
        raise ValueError(f"{name}: minus the Killing form is not positive definite")
    B = alg.basis
    trace_form = -np.einsum("iab,jba->ij", B, B).real
    kappa = float(gram[0, 0] / trace_form[0, 0])
    if np.abs(gram - kappa * trace_form).max() > 1e-10 * np.abs(gram).max():
        raise ValueError(f"{name}: Killing form is not a multiple of the trace form")
    return MetricContext(alg, gram, kappa, np.sqrt(np.diag(gram)))


def metric_context(alg: LieAlgebra | str) -> MetricContext:
    return _context(alg if isinstance(alg, str) else alg.name)


def _dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def _angle_closed(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotation angle theta in [0, pi] and skew part (M - M^H)/2 for SO(3) / SU(2).

    Both groups have eigenvalues exp(+-i theta) (plus 1 for SO(3)), and the
    principal logarithm is (theta / sin theta) (M - M^H) / 2.
    """
    n = M.shape[-1]
    S = 0.5 * (M - _dagger(M))
    tr = np.trace(M, axis1=-2, axis2=-1).real
    c = (tr - 1.0) / 2.0 if n == 3 else tr / 2.0
    s = np.linalg.norm(S, axis=(-2, -1)) / math.sqrt(2.0)
    return np.arctan2(s, c), S, s


def _distances_closed(M: np.ndarray, ctx: MetricContext) -> np.ndarray:
    theta, S, s = _angle_closed(M)
    out = np.empty(len(M))
    # 2 cos(theta / 2) is the distance of the spectrum from -1
    near = 2.0 * np.cos(0.5 * theta) <= CUT_TOL
    small = s <= 1e-300
    far = ~near & ~small
    if far.any():
        L = (theta[far] / s[far])[:, None, None] * S[far]
        c = ctx.coords_stack(L)
        out[far] = np.sqrt(np.maximum(np.einsum("ki,ij,kj->k", c, ctx.gram, c), 0.0))
    # eigen-angles are {theta, -theta} (plus 0 for SO(3))
    out[near] = np.sqrt(2.0 * ctx.kappa) * theta[near]
    out[small & ~near] = 0.0
    return out


def distances(A: np.ndarray, B: np.ndarray, ctx: MetricContext) -> np.ndarray:
    """Pairwise (broadcast) distances between stacks of group matrices."""
    A = np.asarray(A)
    B = np.asarray(B)
    M = _dagger(A) @ B
    shape = M.shape[:-2]
    n = M.shape[-1]
    M = M.reshape((-1, n, n))
    if ctx.algebra.name in CLOSED_FORM_GROUPS:
        return _distances_closed(M, ctx).reshape(shape)
    out = np.empty(len(M))
    # for unitary M, (M + I)^H (M + I) = 2I + M + M^H; its smallest eigenvalue
    # is the squared distance of the spectrum from -1
    lam = np.linalg.eigvalsh(2.0 * np.eye(n) + M + _dagger(M))[:, 0]
    near = lam <= CUT_TOL**2
    far = ~near
    if far.any():
        L = mat_log_principal(M[far], unitary=True, screen=False)
        c = ctx.coords_stack(L)
        out[far] = np.sqrt(np.maximum(np.einsum("ki,ij,kj->k", c, ctx.gram, c), 0.0))
    for k in np.nonzero(near)[0]:
        theta = np.angle(eigvals_qr(M[k]))
        out[k] = math.sqrt(ctx.kappa * float(np.sum(theta**2)))
    return out.reshape(shape)


def riemannian_distance(g: GroupElement, h: GroupElement, ctx: MetricContext | None = None) -> float:
    if g.group != h.group:
        raise MixedGroups(f"{g.group} vs {h.group}")
    ctx = ctx or metric_context(g.group)
    return float(distances(g.matrix, h.matrix, ctx))


@dataclass
class VerificationReport:
    claim: str
    group: str
    coefficients: list | None
    trials: int
    max_deviation: float
    passed: bool
    tolerance: float
    runtime_ms: float | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self, timings: bool = False) -> dict:
        d = {
            "claim": self.claim,
            "group": self.group,
            "coefficients": self.coefficients,
            "trials": self.trials,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "runtime_ms": self.runtime_ms if timings else None,
        }
        if self.details:
            d["details"] = self.details
        return d


def verify_isometry(
    X: AlgebraElement, trials: int, rng, t_range: float = 10.0, tol: float = 1e-8, times=None
) -> VerificationReport:
    """max |d(phi_t g, phi_t h) - d(g, h)| over random (g, h, t)."""
    t0 = time.perf_counter()
    name = X.algebra.name
    ctx = metric_context(name)
    G = np.array([random_element(name, rng).matrix for _ in range(trials)])
    H = np.array([random_element(name, rng).matrix for _ in range(trials)])
    ts = np.asarray(times, dtype=float) if times is not None else rng.uniforms(-t_range, t_range, trials)
    E = flow_matrices(X, np.eye(ctx.algebra.matrix_size), ts, "invariant")
    Ed = _dagger(E)
    d0 = distances(G, H, ctx)
    d1 = distances(E @ G @ Ed, E @ H @ Ed, ctx)
    dev = float(np.max(np.abs(d1 - d0))) if trials else 0.0
    return VerificationReport(
        "isometry", name, [float(c) for c in X.coords], trials, dev, dev < tol, tol,
        (time.perf_counter() - t0) * 1e3,
    )


def verify_sphere_invariance(
    X: AlgebraElement, g: GroupElement, t_max: float, n: int, tol: float = 1e-8
) -> VerificationReport:
    t0 = time.perf_counter()
    ctx = metric_context(g.group)
    e = identity(g.group).matrix
    ts = np.linspace(0.0, t_max, n)
    orbit = flow_matrices(X, g.matrix, ts, "linear")
    r0 = float(distances(e, g.matrix, ctx))
    d = distances(e, orbit, ctx)
    dev = float(np.max(np.abs(d - r0)))
    return VerificationReport(
        "sphere", g.group, [float(c) for c in X.coords], n, dev, dev < tol, tol,
        (time.perf_counter() - t0) * 1e3, {"radius": r0},
    )


# --------------------------------------------------------------------------
# periods


def _golden(f, a: float, b: float, xtol: float, maxiter: int = 200) -> tuple[float, float]:
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if abs(b - a) <= xtol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _golden_vec(f, a: np.ndarray, b: np.ndarray, xtol: float, maxiter: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise golden-section search; f maps an array of abscissae to values."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    for _ in range(maxiter):
        if np.all(np.abs(b - a) <= xtol):
            break
        c = b - GOLDEN * (b - a)
        d = a + GOLDEN * (b - a)
        left = f(c) < f(d)
        a, b = np.where(left, a, c), np.where(left, d, b)
    x = 0.5 * (a + b)
    return x, f(x)


@dataclass(frozen=True)
class PeriodResult:
    kind: str  # "fixed" | "periodic" | "no-return"
    period: float | None = None
    return_distance: float | None = None
    tolerance: float | None = None
    diameter: float | None = None


def detect_period(
    X: AlgebraElement,
    flow_kind: str,
    g: GroupElement,
    t_horizon: float,
    tol: float | None = None,
    grid: int = 10_000,
    method: str = "generic-exp",
) -> PeriodResult:
    """Smallest positive return time of the orbit of g, found numerically.

    Scans d(flow_t(g), g) on a grid of ``grid`` steps, refines each candidate
    local minimum by golden-section search to 1e-10 in t, and accepts the
    first refined minimum below the return tolerance (``tol``, default
    1e-6 times the orbit diameter). "no-return" only means no return was
    found inside the horizon.
    """
    if tol is not None and not tol > 0:
        raise InvalidTolerance(f"tol must be positive, got {tol}")
    if not t_horizon > 0:
        raise ValueError("t_horizon must be positive")
    ctx = metric_context(g.group)
    G = g.matrix
    ts = np.linspace(0.0, t_horizon, grid + 1)
    d = distances(G, flow_matrices(X, G, ts, flow_kind, method), ctx)
    diam = float(d.max())
    fixed_tol = tol if tol is not None else 1e-9
    if diam <= fixed_tol:
        return PeriodResult("fixed", None, 0.0, fixed_tol, diam)
    rtol = tol if tol is not None else 1e-6 * diam
    slope = float(np.max(np.abs(np.diff(d))))
    # interior local minima, plus the final grid point when the distance is
    # still decreasing there (a return exactly at the horizon)
    padded = np.append(d, np.inf)
    inner = np.arange(1, grid + 1)
    is_min = (d[inner] <= d[inner - 1]) & (d[inner] <= padded[inner + 1]) & (d[inner] <= rtol + 2.0 * slope)

    def f(t: float) -> float:
        return float(distances(G, flow_matrices(X, G, [t], flow_kind, method)[0], ctx))

    best = None
    for i in inner[is_min]:
        t_star, val = _golden(f, ts[i - 1], ts[min(i + 1, grid)], 1e-10)
        if best is None or val < best[1]:
            best = (t_star, val)
        if val < rtol:
            return PeriodResult("periodic", t_star, val, rtol, diam)
    return PeriodResult("no-return", None, None if best is None else best[1], rtol, diam)


# --------------------------------------------------------------------------
# omega-limit sets and tubes


@dataclass(frozen=True, eq=False)
class OmegaLimitEstimate:
    seed: GroupElement
    samples: list
    contains_fixed_point: bool
    is_periodic_orbit: bool
    hausdorff_gap: float
    sphere_deviation: float
    gap_tolerance: float
    period: float | None = None


def _is_fixed(X: AlgebraElement, M: np.ndarray, tol: float = 1e-9) -> bool:
    A = X.matrix
    return float(np.abs(A @ M - M @ A).max()) <= tol * max(1.0, float(np.abs(A).max()))


def estimate_omega_limit(
    X: AlgebraElement,
    g: GroupElement,
    t_tail_start: float,
    t_tail_end: float,
    n: int,
    gap_tol: float = 1e-6,
    sphere_tol: float = 1e-8,
) -> OmegaLimitEstimate:
    """Tail samples of the linear-flow orbit of g and their fit to a closed orbit.

    The gap is the largest distance from a tail sample to the closed orbit
    {phi_t(g): t in [0, T)}, each point-to-curve distance refined by
    golden-section search in t.
    """
    if not t_tail_end > t_tail_start > 0:
        raise ValueError("need t_tail_end > t_tail_start > 0")
    ctx = metric_context(g.group)
    G = g.matrix
    e = identity(g.group).matrix
    r0 = float(distances(e, G, ctx))
    if _is_fixed(X, G):
        return OmegaLimitEstimate(g, [g], True, False, 0.0, 0.0, gap_tol, None)
    ts = np.linspace(t_tail_start, t_tail_end, n)
    tail = flow_matrices(X, G, ts, "linear")
    sphere_dev = float(np.max(np.abs(distances(e, tail, ctx) - r0)))
    samples = [GroupElement.make(g.group, M) for M in tail]
    contains_fixed = any(_is_fixed(X, M) for M in tail)
    verdict = analyze_derivation(X).verdict
    if verdict.kind != PERIODIC:
        return OmegaLimitEstimate(g, samples, contains_fixed, False, float("nan"), sphere_dev, gap_tol, None)

    T = verdict.period
    dt = (t_tail_end - t_tail_start) / max(n - 1, 1)
    m = max(n, int(math.ceil(T / dt)))
    orbit_ts = np.linspace(0.0, T, m, endpoint=False)
    orbit = flow_matrices(X, G, orbit_ts, "linear")
    coarse = distances(tail[:, None], orbit[None, :], ctx)
    j = np.argmin(coarse, axis=1)
    h = T / m

    def f(tt: np.ndarray) -> np.ndarray:
        return distances(tail, flow_matrices(X, G, tt, "linear"), ctx)

    _, refined = _golden_vec(f, orbit_ts[j] - h, orbit_ts[j] + h, 1e-11)
    gap = float(np.max(np.minimum(refined, coarse[np.arange(n), j])))
    periodic = bool(gap < gap_tol and sphere_dev < sphere_tol)
    return OmegaLimitEstimate(g, samples, contains_fixed, periodic, gap, sphere_dev, gap_tol, T)


def verify_orbit_tube(
    X: AlgebraElement,
    g: GroupElement,
    h: GroupElement,
    r: float,
    s_max: float = 20.0,
    n_s: int = 101,
    dt: float = 0.02,
) -> bool:
    """Check that phi_s(h) stays within r of the orbit of g for s in [0, s_max].

    Raises HNotInTube unless d(h, phi_t(g)) < r for some t in [0, s_max].
    """
    if g.group != h.group:
        raise MixedGroups(f"{g.group} vs {h.group}")
    ctx = metric_context(g.group)
    G, Hm = g.matrix, h.matrix
    nt = int(math.ceil(2 * s_max / dt)) + 1
    ts = np.linspace(0.0, 2 * s_max, nt)
    orbit = flow_matrices(X, G, ts, "linear")

    def curve_distance(P: np.ndarray, t_hi: float) -> float:
        sel = ts <= t_hi + 1e-12
        d = distances(P, orbit[sel], ctx)
        k = int(np.argmin(d))
        lo, hi = ts[max(k - 1, 0)], ts[min(k + 1, int(sel.sum()) - 1)]
        _, val = _golden(
            lambda t: float(distances(P, flow_matrices(X, G, [t], "linear")[0], ctx)), lo, hi, 1e-10
        )
        return min(val, float(d[k]))

    if not curve_distance(Hm, s_max) < r:
        raise HNotInTube(f"h is not within {r} of the orbit of g")
    for s in np.linspace(0.0, s_max, n_s):
        P = flow_matrices(X, Hm, [s], "linear")[0]
        if not curve_distance(P, 2 * s_max) < r + 1e-8:
            return False
    return True
