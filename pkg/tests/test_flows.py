import math

import numpy as np
import pytest
import scipy.linalg as sla

from lieflow.algebra import get_algebra
from lieflow.errors import MixedGroups, NotInGroup, WrongAlgebra
from lieflow.flows import (
    exp_stack,
    flow_matrices,
    invariant_flow,
    linear_flow,
    rk4_flow,
    sample_trajectory,
    so3_exp_closed,
    so3_exp_hyperbolic,
    su2_exp_closed,
)
from lieflow.groups import (
    GroupElement,
    identity,
    membership_residual,
    minus_identity,
    polar_project,
    random_algebra_element,
    random_element,
)


@pytest.mark.parametrize("name", ["so3", "su2", "so4", "so7"])
def test_random_elements_are_in_group(rng, name):
    for _ in range(20):
        g = random_element(name, rng)
        assert g.membership_residual < 1e-12
        assert np.isclose(np.linalg.det(g.matrix), 1.0)


def test_membership_rejects():
    with pytest.raises(NotInGroup):
        GroupElement.make("so3", np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(NotInGroup):
        GroupElement.make("su2", np.diag([1j, 1j]))
    assert membership_residual(np.eye(2), "so3") == math.inf
    with pytest.raises(NotInGroup):
        minus_identity("so3")
    assert np.array_equal(minus_identity("so4").matrix, -np.eye(4))


def test_polar_projection(rng, nprng):
    g = random_element("so4", rng)
    noisy = g.matrix + 1e-6 * nprng.normal(size=(4, 4))
    P = polar_project(noisy, "so4")
    assert membership_residual(P, "so4") < 1e-13
    assert np.abs(P - g.matrix).max() < 1e-5
    u = random_element("su2", rng)
    Q = polar_project(1.001 * u.matrix, "su2")
    assert membership_residual(Q, "su2") < 1e-13


@pytest.mark.parametrize("name", ["so3", "su2"])
def test_closed_forms_match_scipy(rng, name):
    alg = get_algebra(name)
    closed = so3_exp_closed if name == "so3" else su2_exp_closed
    for _ in range(50):
        X = random_algebra_element(alg, rng, scale=3.0)
        t = rng.uniform(-4, 4)
        assert np.abs(closed(X, t).matrix - sla.expm(t * X.matrix)).max() < 1e-12
    tiny = alg.element([1e-10, -2e-10, 3e-11])
    assert np.abs(closed(tiny, 2.0).matrix - sla.expm(2.0 * tiny.matrix)).max() < 1e-16


def test_hyperbolic_formula_both_roots(rng):
    X = random_algebra_element(get_algebra("so3"), rng)
    ref = sla.expm(1.7 * X.matrix)
    for sign in (-1, 1):
        M = so3_exp_hyperbolic(X, 1.7, sign=sign)
        assert np.abs(M - ref).max() < 1e-12


def test_closed_form_wrong_algebra(rng):
    X = random_algebra_element(get_algebra("so4"), rng)
    with pytest.raises(WrongAlgebra):
        so3_exp_closed(X, 1.0)
    with pytest.raises(WrongAlgebra):
        exp_stack(X, [1.0], "closed-form")


@pytest.mark.parametrize("name", ["so3", "su2", "so4"])
@pytest.mark.parametrize("kind", ["linear", "invariant"])
def test_rk4_oracle_agrees(rng, name, kind):
    alg = get_algebra(name)
    X = random_algebra_element(alg, rng)
    g = random_element(name, rng)
    exact = flow_matrices(X, g.matrix, [2.0], kind)[0]
    assert np.abs(rk4_flow(X, g.matrix, 2.0, kind, step=1e-3) - exact).max() < 1e-10


@pytest.mark.parametrize("name", ["so3", "su2", "so5"])
def test_linear_flow_is_automorphism_flow(rng, name):
    alg = get_algebra(name)
    X = random_algebra_element(alg, rng)
    g, h = random_element(name, rng), random_element(name, rng)
    t, s = 0.7, -1.9
    # phi_t(gh) = phi_t(g) phi_t(h)
    lhs = linear_flow(X, g @ h, t).matrix
    rhs = linear_flow(X, g, t).matrix @ linear_flow(X, h, t).matrix
    assert np.abs(lhs - rhs).max() < 1e-12
    # phi_{t+s} = phi_t o phi_s, and the identity is fixed
    both = linear_flow(X, linear_flow(X, g, s), t).matrix
    assert np.abs(both - linear_flow(X, g, t + s).matrix).max() < 1e-12
    assert np.abs(linear_flow(X, identity(name), t).matrix - np.eye(alg.matrix_size)).max() < 1e-13
    # invariant flow relation: phi_t(g) = exp(tX) g exp(-tX)
    inv = invariant_flow(X, g, t).matrix
    assert np.abs(inv @ sla.expm(-t * X.matrix) - linear_flow(X, g, t).matrix).max() < 1e-12


def test_center_is_fixed(rng):
    X = random_algebra_element(get_algebra("so4"), rng)
    assert np.abs(linear_flow(X, minus_identity("so4"), 3.3).matrix + np.eye(4)).max() < 1e-13


def test_methods_agree(rng):
    alg = get_algebra("so3")
    X = random_algebra_element(alg, rng)
    g = random_element("so3", rng)
    ts = np.linspace(0, 3, 7)
    a = flow_matrices(X, g.matrix, ts, "linear", "closed-form")
    b = flow_matrices(X, g.matrix, ts, "linear", "generic-exp")
    c = flow_matrices(X, g.matrix, ts, "linear", "ode-oracle")
    assert np.abs(a - b).max() < 1e-13
    assert np.abs(a - c).max() < 1e-6


def test_mixed_groups_rejected(rng):
    X = random_algebra_element(get_algebra("so3"), rng)
    with pytest.raises(MixedGroups):
        linear_flow(X, identity("su2"), 1.0)


def test_trajectory_csv(rng):
    X = get_algebra("so3").element([0, 0, 1])
    g = random_element("so3", rng)
    traj = sample_trajectory(X, g, 2 * math.pi, 100)
    lines = traj.to_csv().strip().split("\n")
    assert lines[0].split(",")[:2] == ["t", "m00"]
    assert lines[0].split(",")[-1] == "membership_residual"
    assert len(lines) == 101
    assert traj.reprojections == 0
    assert np.abs(traj.points[-1].matrix - g.matrix).max() < 1e-8


def test_trajectory_csv_complex(rng):
    X = get_algebra("su2").element([1, 0, 0])
    traj = sample_trajectory(X, random_element("su2", rng), 1.0, 5)
    header = traj.to_csv().split("\n")[0].split(",")
    assert header[1:3] == ["m00_re", "m00_im"]
    assert len(header) == 1 + 8 + 1


def test_trajectory_long_run_membership(rng):
    X = random_algebra_element(get_algebra("so4"), rng)
    traj = sample_trajectory(X, random_element("so4", rng), 500.0, 1000)
    assert traj.max_residual < 1e-10


def test_trajectory_preconditions(rng):
    X = get_algebra("so3").element([0, 0, 1])
    g = identity("so3")
    with pytest.raises(ValueError):
        sample_trajectory(X, g, 0.0, 10)
    with pytest.raises(ValueError):
        sample_trajectory(X, g, 1.0, 1)
    with pytest.raises(ValueError):
        sample_trajectory(X, g, 1.0, 10, method="euler")
