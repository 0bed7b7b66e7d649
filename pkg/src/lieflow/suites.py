"""Verification suites run by ``lieflow verify``.

Every suite draws its random inputs from its own xorshift64* stream, derived
from the run seed and the suite name, so a suite's report does not depend on
which other suites ran before it. Inputs are drawn sequentially before any
parallel evaluation, which keeps reports independent of LIEFLOW_THREADS.
"""

from __future__ import annotations

import itertools
import math
import time
import zlib
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, ad_matrix, get_algebra
from .geometry import (
    VerificationReport,
    detect_period,
    distances,
    metric_context,
    verify_isometry,
    verify_orbit_tube,
    verify_sphere_invariance,
)
from .flows import flow_matrices
from .groups import GroupElement, random_algebra_element, random_element
from .linalg import mat_exp
from .parallel import ordered_map
from .rng import XorShift64Star
from .spectral import (
    PERIODIC,
    analyze_derivation,
    check_hyperbolic,
    check_semisimple_eigenvalues,
    is_hyperbolic_matrix,
    lyapunov_exponent,
    so4_ad_frequencies,
    so4_periodicity_criterion,
    so4_periodicity_pfaffian,
)

# default trial counts when --trials is not given
DEFAULT_TRIALS = {
    "isometry": 1000,
    "sphere": 100,
    "central": 1000,
    "lyapunov": 100,
    "derivation": 1000,
    "hyperbolic": 1000,
    "stable": 3,
    "period-consistency": 20,
    "periodicSO4": 1000,
    "flow-equivalence": 20,
}
SUITE_NAMES = tuple(DEFAULT_TRIALS)
SO4_ONLY = ("periodicSO4",)


class UnknownSuite(KeyError):
    pass


@dataclass(frozen=True)
class SuiteConfig:
    group: str
    seed: int = 0
    trials: int | None = None
    x: tuple[float, ...] | None = None
    horizon: float | None = None
    samples: int | None = None
    tol: float | None = None


def suite_rng(seed: int, suite: str) -> XorShift64Star:
    return XorShift64Star((int(seed) << 32) ^ zlib.crc32(suite.encode()))


def _trials(cfg: SuiteConfig, suite: str) -> int:
    return DEFAULT_TRIALS[suite] if cfg.trials is None else int(cfg.trials)


def _generator(cfg: SuiteConfig, rng) -> AlgebraElement:
    alg = get_algebra(cfg.group)
    if cfg.x is not None:
        return alg.element(cfg.x)
    return random_algebra_element(alg, rng)


def _coeffs(cfg: SuiteConfig) -> list | None:
    return None if cfg.x is None else [float(v) for v in cfg.x]


def _rank_two(alg, rng) -> AlgebraElement:
    """u v^T - v u^T: a periodic generator on every so(n)."""
    n = alg.matrix_size
    u, v = rng.normals(n), rng.normals(n)
    return alg.from_matrix(np.outer(u, v) - np.outer(v, u))


def _mixed_generators(cfg: SuiteConfig, rng, trials: int) -> list[AlgebraElement]:
    # alternate generic draws with rank-two ones so both regimes are exercised
    alg = get_algebra(cfg.group)
    if cfg.x is not None:
        return [alg.element(cfg.x)] * trials
    out = []
    for k in range(trials):
        if k % 2 == 1 and not alg.is_complex:
            out.append(_rank_two(alg, rng))
        else:
            out.append(random_algebra_element(alg, rng))
    return out


def _elapsed(t0: float) -> float:
    return (time.perf_counter() - t0) * 1e3


# --------------------------------------------------------------------------


def suite_isometry(cfg: SuiteConfig) -> list[VerificationReport]:
    rng = suite_rng(cfg.seed, "isometry")
    X = _generator(cfg, rng)
    rep = verify_isometry(X, _trials(cfg, "isometry"), rng, tol=cfg.tol or 1e-8)
    rep.coefficients = _coeffs(cfg)
    return [rep]


def suite_sphere(cfg: SuiteConfig) -> list[VerificationReport]:
    t0 = time.perf_counter()
    rng = suite_rng(cfg.seed, "sphere")
    trials = _trials(cfg, "sphere")
    horizon = cfg.horizon or 50.0
    n = cfg.samples or 500
    tol = cfg.tol or 1e-8
    pairs = [(_generator(cfg, rng), random_element(cfg.group, rng)) for _ in range(trials)]
    reps = ordered_map(lambda p: verify_sphere_invariance(p[0], p[1], horizon, n, tol), pairs)
    dev = max((r.max_deviation for r in reps), default=0.0)
    return [
        VerificationReport(
            "sphere", cfg.group, _coeffs(cfg), trials, dev, dev < tol, tol, _elapsed(t0),
            {"horizon": horizon, "samples_per_orbit": n},
        )
    ]


def suite_central(cfg: SuiteConfig) -> list[VerificationReport]:
    t0 = time.perf_counter()
    rng = suite_rng(cfg.seed, "central")
    trials = _trials(cfg, "central")
    Xs = [_generator(cfg, rng) for _ in range(trials)]
    reports = ordered_map(analyze_derivation, Xs)
    dev = max((max(abs(z.real) for z in r.spectrum.eigenvalues) for r in reports), default=0.0)
    tol = cfg.tol or 1e-9
    return [VerificationReport("central", cfg.group, _coeffs(cfg), trials, dev, dev < tol, tol, _elapsed(t0))]


def suite_lyapunov(cfg: SuiteConfig) -> list[VerificationReport]:
    t0 = time.perf_counter()
    rng = suite_rng(cfg.seed, "lyapunov")
    trials = _trials(cfg, "lyapunov")
    alg = get_algebra(cfg.group)
    t_final = cfg.horizon or 1e3
    pairs = [(_generator(cfg, rng), random_algebra_element(alg, rng)) for _ in range(trials)]
    lam = ordered_map(lambda p: abs(lyapunov_exponent(p[0], p[1], t_final)), pairs)
    dev = max(lam, default=0.0)
    tol = cfg.tol or 1e-2
    return [
        VerificationReport(
            "lyapunov", cfg.group, _coeffs(cfg), trials, dev, dev < tol, tol, _elapsed(t0), {"t_final": t_final}
        )
    ]


def suite_derivation(cfg: SuiteConfig) -> list[VerificationReport]:
    t0 = time.perf_counter()
    rng = suite_rng(cfg.seed, "derivation")
    trials = _trials(cfg, "derivation")
    Xs = [_generator(cfg, rng) for _ in range(trials)]
    flags = ordered_map(lambda X: check_semisimple_eigenvalues(ad_matrix(X)), Xs)
    failures = sum(1 for f in flags if not f)
    jordan_flagged = not check_semisimple_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))
    return [
        VerificationReport(
            "derivation", cfg.group, _coeffs(cfg), trials, float(failures),
            failures == 0 and jordan_flagged, 0.5, _elapsed(t0),
            {"non_semisimple_count": failures, "jordan_control_flagged": jordan_flagged},
        )
    ]


def suite_hyperbolic(cfg: SuiteConfig) -> list[VerificationReport]:
    t0 = time.perf_counter()
    rng = suite_rng(cfg.seed, "hyperbolic")
    trials = _trials(cfg, "hyperbolic")
    Xs = [_generator(cfg, rng) for _ in range(trials)]
    hyper = sum(1 for h in ordered_map(check_hyperbolic, Xs) if h)
    control = is_hyperbolic_matrix(np.diag([1.0, -1.0]))
    return [
        VerificationReport(
            "hyperbolic", cfg.group, _coeffs(cfg), trials, float(hyper), hyper == 0 and control, 0.5,
            _elapsed(t0), {"hyperbolic_count": hyper, "diag_control_hyperbolic": control},
        )
    ]


def suite_stable(cfg: SuiteConfig) -> list[VerificationReport]:
    """Orbit tubes are invariant: phi_s(h) stays within r of the orbit of g."""
    t0 = time.perf_counter()
    rng = suite_rng(cfg.seed, "stable")
    trials = _trials(cfg, "stable")
    alg = get_algebra(cfg.group)
    ctx = metric_context(cfg.group)
    cases = []
    for _ in range(trials):
        X = _generator(cfg, rng)
        g = random_element(cfg.group, rng)
        Y = random_algebra_element(alg, rng)
        r = 0.1
        eps = 0.5 * r / ctx.norm(Y)
        h = GroupElement.make(cfg.group, g.matrix @ mat_exp(eps * Y.matrix))
        cases.append((X, g, h, r))

    def run(case):
        X, g, h, r = case
        inside = verify_orbit_tube(X, g, h, r, s_max=20.0, n_s=41, dt=0.05)
        ss = np.linspace(0.0, 20.0, 41)
        drift = np.abs(
            distances(flow_matrices(X, g.matrix, ss, "linear"), flow_matrices(X, h.matrix, ss, "linear"), ctx)
            - float(distances(g.matrix, h.matrix, ctx))
        )
        return inside, float(drift.max())

    out = ordered_map(run, cases)
    dev = max((d for _, d in out), default=0.0)
    tol = cfg.tol or 1e-8
    ok = all(inside for inside, _ in out) and dev < tol
    return [
        VerificationReport(
            "stable", cfg.group, _coeffs(cfg), trials, dev, ok, tol, _elapsed(t0),
            {"tube_radius": 0.1, "all_inside": all(inside for inside, _ in out)},
        )
    ]


def _period_case(X: AlgebraElement, g: GroupElement, horizon_np: float):
    verdict = analyze_derivation(X).verdict
    if verdict.kind == PERIODIC:
        res = detect_period(X, "linear", g, 1.5 * verdict.period)
        if res.kind != "periodic":
            return verdict.kind, res.kind, math.inf
        return verdict.kind, res.kind, abs(res.period - verdict.period) / verdict.period
    res = detect_period(X, "linear", g, horizon_np)
    return verdict.kind, res.kind, 0.0 if res.kind != "periodic" else math.inf


def suite_period_consistency(cfg: SuiteConfig) -> list[VerificationReport]:
    t0 = time.perf_counter()
    rng = suite_rng(cfg.seed, "period-consistency")
    trials = _trials(cfg, "period-consistency")
    Xs = _mixed_generators(cfg, rng, trials)
    gs = [random_element(cfg.group, rng) for _ in range(trials)]
    horizon = cfg.horizon or 50.0
    rows = ordered_map(lambda p: _period_case(p[0], p[1], horizon), list(zip(Xs, gs)))
    dev = max((r[2] for r in rows), default=0.0)
    tol = cfg.tol or 1e-6
    return [
        VerificationReport(
            "period-consistency", cfg.group, _coeffs(cfg), trials, dev, dev < tol, tol, _elapsed(t0),
            {
                "spectral_periodic": sum(1 for r in rows if r[0] == PERIODIC),
                "numeric_periodic": sum(1 for r in rows if r[1] == "periodic"),
                "non_periodic_horizon": horizon,
            },
        )
    ]


def _equivalence_case(X: AlgebraElement, g: GroupElement, horizon_np: float) -> tuple[str, str]:
    verdict = analyze_derivation(X).verdict
    # the invariant flow may need twice the linear period (e.g. on SU(2))
    horizon = 2.2 * verdict.period if verdict.kind == PERIODIC else horizon_np
    lin = detect_period(X, "linear", g, horizon).kind
    inv = detect_period(X, "invariant", g, horizon).kind
    return lin, inv


def suite_flow_equivalence(cfg: SuiteConfig) -> list[VerificationReport]:
    t0 = time.perf_counter()
    rng = suite_rng(cfg.seed, "flow-equivalence")
    trials = _trials(cfg, "flow-equivalence")
    Xs = _mixed_generators(cfg, rng, trials)
    gs = [random_element(cfg.group, rng) for _ in range(trials)]
    horizon = cfg.horizon or 50.0
    rows = ordered_map(lambda p: _equivalence_case(p[0], p[1], horizon), list(zip(Xs, gs)))
    mismatches = sum(1 for lin, inv in rows if lin != inv)
    return [
        VerificationReport(
            "flow-equivalence", cfg.group, _coeffs(cfg), trials, float(mismatches), mismatches == 0, 0.5,
            _elapsed(t0),
            {
                "mismatches": mismatches,
                "periodic_pairs": sum(1 for lin, inv in rows if lin == inv == "periodic"),
                "no_return_pairs": sum(1 for lin, inv in rows if lin == inv == "no-return"),
            },
        )
    ]


def so4_test_tuples(rng, n_random: int) -> list[tuple[float, ...]]:
    """The {-1,0,1}^4 grid on (b, c, d, e) with a = f = 0, minus the origin, then random tuples."""
    tuples = [
        (0.0, b, c, d, e, 0.0)
        for b, c, d, e in itertools.product((-1.0, 0.0, 1.0), repeat=4)
        if (b, c, d, e) != (0.0, 0.0, 0.0, 0.0)
    ]
    tuples += [tuple(float(v) for v in rng.normals(6)) for _ in range(n_random)]
    return tuples


def suite_periodic_so4(cfg: SuiteConfig) -> list[VerificationReport]:
    """Spectral verdicts against the bc = ed criterion and against the Pfaffian rule."""
    t0 = time.perf_counter()
    if get_algebra(cfg.group).name != "so4":
        raise ValueError("periodicSO4 suite needs --group so4")
    rng = suite_rng(cfg.seed, "periodicSO4")
    alg = get_algebra("so4")
    tuples = so4_test_tuples(rng, _trials(cfg, "periodicSO4"))
    verdicts = ordered_map(lambda c: analyze_derivation(alg.element(c)).verdict, tuples)
    t_spec = _elapsed(t0)

    def compare(rule):
        mismatch, worst = 0, 0.0
        for c, v in zip(tuples, verdicts):
            p = rule(*c)
            if p.periodic != (v.kind == PERIODIC):
                mismatch += 1
            elif p.periodic and p.period is not None:
                worst = max(worst, abs(p.period - v.period) / v.period)
        return mismatch, worst

    lit_mis, lit_err = compare(so4_periodicity_criterion)
    pf_mis, pf_err = compare(so4_periodicity_pfaffian)
    tol = 1e-9
    # eigenvalue moduli: exact pair vs the (a+f) form printed alongside bc = ed
    eig_dev_exact, eig_dev_lit = 0.0, 0.0
    for c in tuples:
        a, b, cc, d, e, f = c
        spec = analyze_derivation(alg.element(c)).spectrum.all_values()
        got = np.sort(np.abs(spec.imag))
        w1, w2 = so4_ad_frequencies(*c)
        exact = np.sort([0.0, 0.0, w1, w1, w2, w2])
        lit2 = math.sqrt((a + f) ** 2 + (b + e) ** 2 + (cc - d) ** 2)
        lit = np.sort([0.0, 0.0, w1, w1, lit2, lit2])
        eig_dev_exact = max(eig_dev_exact, float(np.abs(got - exact).max()))
        eig_dev_lit = max(eig_dev_lit, float(np.abs(got - lit).max()))
    n = len(tuples)
    return [
        VerificationReport(
            "periodicSO4", "so4", None, n, float(lit_mis), lit_mis == 0 and lit_err < tol, tol, t_spec,
            {"rule": "bc = ed", "verdict_mismatches": lit_mis, "max_period_rel_error": lit_err},
        ),
        VerificationReport(
            "periodicSO4-pfaffian", "so4", None, n, float(pf_mis), pf_mis == 0 and pf_err < tol, tol, t_spec,
            {"rule": "af - be + cd = 0 or one frequency zero", "verdict_mismatches": pf_mis,
             "max_period_rel_error": pf_err},
        ),
        VerificationReport(
            "so4-eigenvalues", "so4", None, n, eig_dev_lit, eig_dev_lit < tol, tol, _elapsed(t0),
            {"form": "(a+f) in both radicands", "exact_pair_max_deviation": eig_dev_exact},
        ),
    ]


SUITES = {
    "isometry": suite_isometry,
    "sphere": suite_sphere,
    "central": suite_central,
    "lyapunov": suite_lyapunov,
    "derivation": suite_derivation,
    "hyperbolic": suite_hyperbolic,
    "stable": suite_stable,
    "period-consistency": suite_period_consistency,
    "periodicSO4": suite_periodic_so4,
    "flow-equivalence": suite_flow_equivalence,
}


def suites_for(name: str, group: str) -> list[str]:
    """Expand a suite selector: one name, a comma-separated list, or "all"."""
    if name == "all":
        so4 = get_algebra(group).name == "so4"
        return [s for s in SUITE_NAMES if so4 or s not in SO4_ONLY]
    out = []
    for part in (p.strip() for p in name.split(",")):
        if part not in SUITES:
            raise UnknownSuite(f"unknown suite {part!r}; choose from {', '.join(SUITE_NAMES + ('all',))}")
        if part not in out:
            out.append(part)
    return out


def run_suites(name: str, cfg: SuiteConfig) -> list[VerificationReport]:
    out: list[VerificationReport] = []
    for s in suites_for(name, cfg.group):
        out.extend(SUITES[s](cfg))
    return out
