import math

import numpy as np
import pytest
import scipy.linalg as sla

from lieflow.algebra import get_algebra
from lieflow.errors import HNotInTube, InvalidTolerance, MixedGroups
from lieflow.flows import linear_flow
from lieflow.geometry import (
    distances,
    detect_period,
    estimate_omega_limit,
    metric_context,
    riemannian_distance,
    verify_isometry,
    verify_orbit_tube,
    verify_sphere_invariance,
)
from lieflow.groups import GroupElement, identity, minus_identity, random_algebra_element, random_element
from lieflow.linalg import mat_exp, mat_log_principal

GROUPS = ["so3", "su2", "so4", "so5"]


def logm_distance(g, h, kappa):
    """Oracle: scipy logm of g^-1 h, scaled trace norm."""
    L = sla.logm(g.conj().T @ h)
    return math.sqrt(max(-kappa * np.trace(L @ L).real, 0.0))


def test_kappa_values():
    assert metric_context("so3").kappa == pytest.approx(1.0)
    assert metric_context("su2").kappa == pytest.approx(4.0)
    for n in range(4, 8):
        assert metric_context(f"so{n}").kappa == pytest.approx(n - 2)


@pytest.mark.parametrize("name", GROUPS)
def test_distance_matches_logm_oracle(rng, name):
    ctx = metric_context(name)
    for _ in range(30):
        g, h = random_element(name, rng), random_element(name, rng)
        assert riemannian_distance(g, h) == pytest.approx(logm_distance(g.matrix, h.matrix, ctx.kappa), abs=1e-9)


@pytest.mark.parametrize("name", GROUPS)
def test_metric_axioms_and_bi_invariance(rng, name):
    for _ in range(20):
        g, h, k, m = (random_element(name, rng) for _ in range(4))
        d = riemannian_distance(g, h)
        assert riemannian_distance(g, g) < 1e-12
        assert d == pytest.approx(riemannian_distance(h, g), abs=1e-12)
        assert d <= riemannian_distance(g, m) + riemannian_distance(m, h) + 1e-12
        assert d == pytest.approx(riemannian_distance(k @ g, k @ h), abs=1e-10)
        assert d == pytest.approx(riemannian_distance(g @ k, h @ k), abs=1e-10)


def test_cut_locus_distances():
    assert riemannian_distance(identity("so4"), minus_identity("so4")) == pytest.approx(math.pi * math.sqrt(8))
    assert riemannian_distance(identity("su2"), minus_identity("su2")) == pytest.approx(math.pi * math.sqrt(8))
    R = GroupElement.make("so3", np.diag([1.0, -1.0, -1.0]))
    assert riemannian_distance(identity("so3"), R) == pytest.approx(math.pi * math.sqrt(2))


@pytest.mark.parametrize("name", ["so3", "so4"])
def test_distance_continuous_across_cut_threshold(name):
    # rotation by theta in the (1, 2) plane; distance sqrt(2 kappa) * theta
    kappa = metric_context(name).kappa
    n = get_algebra(name).matrix_size
    for eps in (1e-2, 1.1e-3, 0.9e-3, 1e-6):
        th = math.pi - eps
        A = np.zeros((n, n))
        A[1, 0], A[0, 1] = th, -th
        g = GroupElement.make(name, mat_exp(A))
        assert riemannian_distance(identity(name), g) == pytest.approx(math.sqrt(2 * kappa) * th, abs=1e-9)


@pytest.mark.parametrize("name", ["so3", "su2"])
def test_closed_form_distance_matches_generic_log(rng, name):
    ctx = metric_context(name)
    M = np.array([random_element(name, rng).matrix for _ in range(200)])
    closed = distances(np.eye(M.shape[-1]), M, ctx)
    c = ctx.coords_stack(mat_log_principal(M, unitary=True))
    generic = np.sqrt(np.einsum("ki,ij,kj->k", c, ctx.gram, c))
    assert np.abs(closed - generic).max() < 1e-11


def test_distance_rejects_mixed_groups():
    with pytest.raises(MixedGroups):
        riemannian_distance(identity("so3"), identity("su2"))


@pytest.mark.parametrize("name", GROUPS)
def test_isometry_and_sphere_reports(rng, name):
    X = random_algebra_element(get_algebra(name), rng)
    rep = verify_isometry(X, 50, rng)
    assert rep.passed and rep.max_deviation < 1e-9
    sph = verify_sphere_invariance(X, random_element(name, rng), 50.0, 200)
    assert sph.passed and sph.details["radius"] > 0


def test_detect_period_invariant_flow_from_identity():
    X = get_algebra("so3").element([0, 0, 1])
    res = detect_period(X, "invariant", identity("so3"), 10.0)
    assert res.kind == "periodic" and res.period == pytest.approx(2 * math.pi, abs=1e-8)


def test_detect_period_linear_flow(rng):
    X = get_algebra("so3").element([0, 0, 2.0])
    res = detect_period(X, "linear", random_element("so3", rng), 5.0)
    assert res.kind == "periodic" and res.period == pytest.approx(math.pi, abs=1e-8)


def test_detect_period_return_at_horizon(rng):
    X = get_algebra("so3").element([0, 0, 1])
    res = detect_period(X, "linear", random_element("so3", rng), 2 * math.pi)
    assert res.kind == "periodic" and res.period == pytest.approx(2 * math.pi, abs=1e-8)


def test_detect_period_fixed(rng):
    res = detect_period(get_algebra("so4").zero(), "linear", random_element("so4", rng), 10.0)
    assert res.kind == "fixed"
    # the identity is fixed by every linear flow
    X = random_algebra_element(get_algebra("so4"), rng)
    assert detect_period(X, "linear", identity("so4"), 10.0).kind == "fixed"


def test_detect_period_no_return(rng):
    X = get_algebra("so4").element([0, 1, 1, 0, 1, 0])
    res = detect_period(X, "linear", random_element("so4", rng), 200.0, tol=1e-4)
    assert res.kind == "no-return" and res.return_distance > 1e-4


def test_detect_period_rejects_bad_tolerance(rng):
    X = get_algebra("so3").element([0, 0, 1])
    with pytest.raises(InvalidTolerance):
        detect_period(X, "linear", identity("so3"), 1.0, tol=0.0)
    with pytest.raises(ValueError):
        detect_period(X, "linear", identity("so3"), -1.0)


def test_omega_limit_fixed_seed():
    X = get_algebra("so4").element([1, 2, 3, 4, 5, 6])
    est = estimate_omega_limit(X, identity("so4"), 1.0, 2.0, 10)
    assert est.contains_fixed_point and not est.is_periodic_orbit


def test_omega_limit_periodic_orbit(rng):
    X = get_algebra("so3").element([0.3, -0.4, 1.2])
    est = estimate_omega_limit(X, random_element("so3", rng), 50.0, 60.0, 100)
    assert est.is_periodic_orbit and est.hausdorff_gap < 1e-6
    assert est.period == pytest.approx(2 * math.pi / 1.3)


def test_omega_limit_non_periodic(rng):
    X = get_algebra("so4").element([0, 1, 1, 0, 1, 0])
    est = estimate_omega_limit(X, random_element("so4", rng), 10.0, 20.0, 50)
    assert not est.is_periodic_orbit and est.sphere_deviation < 1e-9
    with pytest.raises(ValueError):
        estimate_omega_limit(X, identity("so4"), 5.0, 1.0, 10)


def test_orbit_tube(rng):
    X = get_algebra("so3").element([0, 0, 1])
    g = random_element("so3", rng)
    h = linear_flow(X, g, 0.4)
    assert verify_orbit_tube(X, g, h, 0.1, s_max=3.0, n_s=11)
    # every orbit point is at distance d(e, g) from the identity
    r = 0.5 * riemannian_distance(identity("so3"), g)
    with pytest.raises(HNotInTube):
        verify_orbit_tube(X, g, identity("so3"), r, s_max=3.0, n_s=11)
