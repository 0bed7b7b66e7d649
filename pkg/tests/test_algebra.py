import itertools
import json

import numpy as np
import pytest

from lieflow.algebra import (
    LieAlgebra,
    ad_matrix,
    adjoint_rep,
    bracket,
    certify_compact_semisimple,
    get_algebra,
    killing_form,
    registered_algebras,
    so_basis,
)
from lieflow.errors import MixedAlgebras, NotInGroup, UnknownGroup
from lieflow.groups import random_algebra_element, random_element

# bracket table for so(4), basis order (e12, e13, e14, e23, e24, e34)
SO4_TABLE = {
    ("e12", "e13"): ("e23", 1), ("e12", "e14"): ("e24", 1), ("e12", "e23"): ("e13", -1),
    ("e12", "e24"): ("e14", -1), ("e12", "e34"): (None, 0), ("e13", "e14"): ("e34", 1),
    ("e13", "e23"): ("e12", 1), ("e13", "e24"): (None, 0), ("e13", "e34"): ("e14", -1),
    ("e14", "e23"): (None, 0), ("e14", "e24"): ("e12", 1), ("e14", "e34"): ("e13", 1),
    ("e23", "e24"): ("e34", 1), ("e23", "e34"): ("e24", -1), ("e24", "e34"): ("e23", 1),
}
NAMES = ["e12", "e13", "e14", "e23", "e24", "e34"]


def test_so4_bracket_table():
    alg = get_algebra("so4")
    for (p, q), (r, sign) in SO4_TABLE.items():
        got = bracket(alg.basis_element(NAMES.index(p)), alg.basis_element(NAMES.index(q))).coords
        want = np.zeros(6)
        if r is not None:
            want[NAMES.index(r)] = sign
        assert np.array_equal(got, want), (p, q)


def test_so4_basis_entries():
    # e12 carries +1 at row 2, column 1 (the (j, i) entry)
    e12 = get_algebra("so4").basis[0]
    assert e12[1, 0] == 1.0 and e12[0, 1] == -1.0


def test_structure_constants_match_matrix_commutator():
    for name in registered_algebras():
        alg = get_algebra(name)
        B = alg.basis
        C = alg.structure_constants
        for i, j in itertools.product(range(alg.dim), repeat=2):
            lhs = B[i] @ B[j] - B[j] @ B[i]
            rhs = np.tensordot(C[i, j], B, axes=1)
            assert np.abs(lhs - rhs).max() < 1e-12


def direct_killing(alg):
    """Oracle: build ad(B_i) column by column from matrix commutators."""
    d = alg.dim
    flat = alg.basis.reshape(d, -1).T
    if np.iscomplexobj(flat):
        flat = np.vstack([flat.real, flat.imag])
    ads = []
    for i in range(d):
        cols = []
        for j in range(d):
            M = (alg.basis[i] @ alg.basis[j] - alg.basis[j] @ alg.basis[i]).reshape(-1)
            rhs = np.concatenate([M.real, M.imag]) if np.iscomplexobj(alg.basis) else M.real
            cols.append(np.linalg.lstsq(flat, rhs, rcond=None)[0])
        ads.append(np.array(cols).T)
    return np.array([[np.trace(a @ b) for b in ads] for a in ads])


@pytest.mark.parametrize("name", registered_algebras())
def test_killing_gram_oracle(name):
    alg = get_algebra(name)
    assert np.allclose(alg.killing_gram, direct_killing(alg), atol=1e-10)


def test_killing_gram_values():
    assert np.allclose(get_algebra("so3").killing_gram, -2 * np.eye(3))
    assert np.allclose(get_algebra("su2").killing_gram, -2 * np.eye(3))
    for n in range(4, 9):
        # so(n): B(X, Y) = (n - 2) tr(XY), and tr(e_ij e_ij) = -2
        assert np.allclose(get_algebra(f"so{n}").killing_gram, -2 * (n - 2) * np.eye(n * (n - 1) // 2))


@pytest.mark.parametrize("name", registered_algebras())
def test_registered_algebras_certify(name):
    rep = certify_compact_semisimple(get_algebra(name))
    assert rep.semisimple and rep.compact_type
    assert rep.jacobi_residual < 1e-12 and rep.antisymmetry_residual == 0


def test_affine_algebra_is_not_semisimple():
    aff = LieAlgebra.from_basis("aff1", [np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([[0.0, 1.0], [0.0, 0.0]])])
    rep = certify_compact_semisimple(aff)
    assert not rep.semisimple and not rep.compact_type


def test_sl2_is_semisimple_but_not_compact():
    B = [np.array([[1.0, 0], [0, -1.0]]), np.array([[0, 1.0], [0, 0]]), np.array([[0, 0], [1.0, 0]])]
    rep = certify_compact_semisimple(LieAlgebra.from_basis("sl2", B))
    assert rep.semisimple and not rep.compact_type


def test_su2_basis_is_traceless_skew_hermitian():
    B = get_algebra("su2").basis
    for b in B:
        assert np.allclose(b.conj().T, -b)
        assert abs(np.trace(b)) < 1e-15


@pytest.mark.parametrize("name", ["so3", "su2", "so4", "so6"])
def test_json_round_trip(name):
    alg = get_algebra(name)
    text = alg.to_json()
    doc = json.loads(text)
    assert doc["dimension"] == alg.dim and doc["matrix_size"] == alg.matrix_size
    back = LieAlgebra.from_json(text)
    assert np.array_equal(back.structure_constants, alg.structure_constants)
    assert np.allclose(back.basis, alg.basis)


def test_json_rejects_inconsistent_constants():
    doc = json.loads(get_algebra("so3").to_json())
    doc["structure_constants"][0][3] = 5.0
    with pytest.raises(ValueError):
        LieAlgebra.from_json(json.dumps(doc))


def test_bracket_properties(rng):
    for name in ("so3", "su2", "so5"):
        alg = get_algebra(name)
        X, Y, Z = (random_algebra_element(alg, rng) for _ in range(3))
        assert np.allclose(bracket(X, Y).coords, -bracket(Y, X).coords)
        jac = bracket(X, bracket(Y, Z)) + bracket(Y, bracket(Z, X)) + bracket(Z, bracket(X, Y))
        assert np.abs(jac.coords).max() < 1e-12
        assert np.allclose(ad_matrix(X) @ Y.coords, bracket(X, Y).coords)


def test_killing_ad_invariance(rng):
    for name in ("so3", "su2", "so4"):
        alg = get_algebra(name)
        X, Y, Z = (random_algebra_element(alg, rng) for _ in range(3))
        # B([X, Y], Z) = -B(Y, [X, Z])
        assert np.isclose(killing_form(bracket(X, Y), Z), -killing_form(Y, bracket(X, Z)))
        g = random_element(name, rng)
        A = adjoint_rep(g, alg)
        K = alg.killing_gram
        assert np.allclose(A.T @ K @ A, K, atol=1e-12)


def test_adjoint_rep_rejects_non_group_matrix():
    with pytest.raises(NotInGroup):
        adjoint_rep(np.diag([2.0, 1.0, 0.5]), get_algebra("so3"))


def test_mixed_algebras_rejected():
    with pytest.raises(MixedAlgebras):
        bracket(get_algebra("so3").basis_element(0), get_algebra("su2").basis_element(0))


def test_registry():
    assert get_algebra("SO(3)") is get_algebra("so3")
    with pytest.raises(UnknownGroup):
        get_algebra("sp4")
    assert so_basis(4).shape == (6, 4, 4)
