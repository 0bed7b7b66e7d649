"""Matrix Lie algebras: brackets, structure constants, ad, Killing form.

Registered algebras and their frozen basis orders:

* ``so3``: (L_x, L_y, L_z), so that x*L_x + y*L_y + z*L_z is
  [[0,-z,y],[z,0,-x],[-y,x,0]].
* ``su2``: (B_x, B_y, B_z) with x*B_x + y*B_y + z*B_z =
  [[i x/2, (i z + y)/2], [(i z - y)/2, -i x/2]].
* ``so4`` .. ``so8``: e_ij for i < j in lexicographic order, where e_ij has
  +1 at (j, i) and -1 at (i, j). For so4 this is (e12, e13, e14, e23, e24,
  e34) and a..f coordinates map onto it in that order; with this sign the
  matrix commutator gives [e12, e13] = e23.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import MixedAlgebras, NotInGroup, UnknownGroup
from .linalg import commutator

__all__ = [
    "LieAlgebra",
    "AlgebraElement",
    "CertificationReport",
    "bracket",
    "ad_matrix",
    "killing_form",
    "certify_compact_semisimple",
    "adjoint_rep",
    "get_algebra",
    "registered_algebras",
    "so_basis",
]

INT_SNAP = 1e-9


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    name: str
    basis: np.ndarray  # (d, n, n)
    structure_constants: np.ndarray  # C[i, j, k]: [B_i, B_j] = sum_k C[i, j, k] B_k
    killing_gram: np.ndarray  # K[i, j] = tr(ad B_i ad B_j)
    reexpression_residual: float = 0.0
    _pinv: np.ndarray = field(repr=False, default=None)

    @classmethod
    def from_basis(cls, name: str, basis) -> "LieAlgebra":
        B = np.array(basis)
        if B.ndim != 3 or B.shape[1] != B.shape[2]:
            raise ValueError("basis must be a sequence of square matrices")
        d = B.shape[0]
        pinv = _coord_solver(B)
        C = np.zeros((d, d, d))
        resid = 0.0
        for i, j in itertools.product(range(d), repeat=2):
            coords, r = _solve_coords(pinv, B, commutator(B[i], B[j]))
            C[i, j] = coords
            resid = max(resid, r)
        snapped = np.round(C)
        close = np.abs(C - snapped) <= INT_SNAP
        C = np.where(close, snapped, C)
        C[C == 0] = 0.0  # no negative zeros
        ads = np.einsum("ijk->ikj", C)  # ads[i] = ad(B_i), columns are [B_i, B_j]
        K = np.einsum("ikl,jlk->ij", ads, ads)
        return cls(name, B, C, K, resid, pinv)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def matrix_size(self) -> int:
        return self.basis.shape[1]

    @property
    def is_complex(self) -> bool:
        return bool(np.iscomplexobj(self.basis) and np.any(self.basis.imag))

    def coords_of(self, M: np.ndarray) -> tuple[np.ndarray, float]:
        """Coordinates of a matrix in the basis and the re-expression residual."""
        return _solve_coords(self._pinv, self.basis, M)

    def element(self, coords) -> "AlgebraElement":
        return AlgebraElement(self, np.asarray(coords, dtype=float).reshape(self.dim))

    def from_matrix(self, M: np.ndarray, tol: float = 1e-10) -> "AlgebraElement":
        c, r = self.coords_of(M)
        if r > tol * max(1.0, float(np.abs(M).max())):
            raise ValueError(f"matrix is not in {self.name} (residual {r:.3e})")
        return AlgebraElement(self, c)

    def zero(self) -> "AlgebraElement":
        return self.element(np.zeros(self.dim))

    def basis_element(self, i: int) -> "AlgebraElement":
        c = np.zeros(self.dim)
        c[i] = 1.0
        return self.element(c)

    # JSON ---------------------------------------------------------------

    def to_json(self) -> str:
        from .serialize import dumps

        if self.is_complex:
            basis = [{"re": b.real.tolist(), "im": b.imag.tolist()} for b in self.basis]
        else:
            basis = [np.real(b).tolist() for b in self.basis]
        triples = [
            [i, j, k, float(self.structure_constants[i, j, k])]
            for i, j, k in itertools.product(range(self.dim), repeat=3)
            if i < j and self.structure_constants[i, j, k] != 0
        ]
        doc = {
            "name": self.name,
            "dimension": self.dim,
            "matrix_size": self.matrix_size,
            "field": "complex" if self.is_complex else "real",
            "basis": basis,
            "structure_constants": triples,
        }
        return dumps(doc)

    @classmethod
    def from_json(cls, text: str, tol: float = 1e-9) -> "LieAlgebra":
        doc = json.loads(text)
        mats = []
        for b in doc["basis"]:
            if isinstance(b, dict):
                mats.append(np.array(b["re"], dtype=float) + 1j * np.array(b["im"], dtype=float))
            else:
                mats.append(np.array(b, dtype=float))
        alg = cls.from_basis(doc["name"], mats)
        if alg.dim != doc["dimension"]:
            raise ValueError("dimension field disagrees with basis length")
        given = np.zeros_like(alg.structure_constants)
        for i, j, k, v in doc.get("structure_constants", []):
            given[i, j, k] = v
            given[j, i, k] = -v
        if np.abs(given - alg.structure_constants).max() > tol:
            raise ValueError("structure constants disagree with the basis matrices")
        return alg


def _coord_solver(B: np.ndarray) -> np.ndarray:
    d = B.shape[0]
    flat = B.reshape(d, -1).T
    stacked = np.vstack([flat.real, flat.imag]) if np.iscomplexobj(B) else flat.astype(float)
    return np.linalg.pinv(stacked)


def _solve_coords(pinv: np.ndarray, B: np.ndarray, M: np.ndarray) -> tuple[np.ndarray, float]:
    m = np.asarray(M).reshape(-1)
    if np.iscomplexobj(B):
        rhs = np.concatenate([m.real, m.imag])
    else:
        if np.iscomplexobj(m) and np.any(m.imag):
            rhs = None
        else:
            rhs = np.real(m)
    if rhs is None:
        # complex matrix against a real basis: imaginary part is all residual
        c = pinv @ m.real
        r = float(np.abs(np.tensordot(c, B, axes=1).reshape(-1) - m).max())
        return c, r
    c = pinv @ rhs
    r = float(np.abs(np.tensordot(c, B, axes=1).reshape(-1) - m).max())
    return c, r


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    algebra: LieAlgebra
    coords: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.tensordot(self.coords, self.algebra.basis, axes=1)

    def _same(self, other: "AlgebraElement") -> None:
        if other.algebra is not self.algebra and other.algebra.name != self.algebra.name:
            raise MixedAlgebras(f"{self.algebra.name} vs {other.algebra.name}")

    def __add__(self, other):
        self._same(other)
        return AlgebraElement(self.algebra, self.coords + other.coords)

    def __sub__(self, other):
        self._same(other)
        return AlgebraElement(self.algebra, self.coords - other.coords)

    def __neg__(self):
        return AlgebraElement(self.algebra, -self.coords)

    def __mul__(self, s):
        return AlgebraElement(self.algebra, float(s) * self.coords)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"AlgebraElement({self.algebra.name}, {self.coords.tolist()})"


def bracket(X: AlgebraElement, Y: AlgebraElement) -> AlgebraElement:
    """[X, Y] = XY - YX in basis coordinates.

    Coordinates come from the structure constants (exact for integer
    constants) and are checked against the matrix commutator.
    """
    X._same(Y)
    alg = X.algebra
    c = np.einsum("i,j,ijk->k", X.coords, Y.coords, alg.structure_constants)
    r = float(np.abs(np.tensordot(c, alg.basis, axes=1) - commutator(X.matrix, Y.matrix)).max())
    scale = max(1.0, float(np.abs(X.coords).max() * np.abs(Y.coords).max()))
    if r > 1e-12 * scale:
        raise ArithmeticError(f"commutator left the algebra (residual {r:.3e})")
    return AlgebraElement(alg, c)


def ad_matrix(X: AlgebraElement) -> np.ndarray:
    """Matrix of Y -> [X, Y] in the basis order of the algebra."""
    return np.einsum("i,ijk->kj", X.coords, X.algebra.structure_constants)


def killing_form(X: AlgebraElement, Y: AlgebraElement) -> float:
    X._same(Y)
    return float(X.coords @ X.algebra.killing_gram @ Y.coords)


@dataclass(frozen=True)
class CertificationReport:
    name: str
    jacobi_residual: float
    antisymmetry_residual: float
    killing_eigenvalue_min: float
    killing_eigenvalue_max: float
    semisimple: bool
    compact_type: bool


def certify_compact_semisimple(alg: LieAlgebra, rank_rtol: float = 1e-8) -> CertificationReport:
    B = alg.basis
    d = alg.dim
    jac = 0.0
    for i, j, k in itertools.product(range(d), repeat=3):
        J = (
            commutator(commutator(B[i], B[j]), B[k])
            + commutator(commutator(B[j], B[k]), B[i])
            + commutator(commutator(B[k], B[i]), B[j])
        )
        jac = max(jac, float(np.abs(J).max()))
    C = alg.structure_constants
    anti = float(np.abs(C + np.swapaxes(C, 0, 1)).max())
    ev = np.linalg.eigvalsh(alg.killing_gram)
    top = max(float(np.abs(ev).max()), np.finfo(float).tiny)
    semisimple = bool(np.abs(ev).min() > rank_rtol * top)
    compact = bool(semisimple and ev.max() < -rank_rtol * top)
    return CertificationReport(alg.name, jac, anti, float(ev.min()), float(ev.max()), semisimple, compact)


def adjoint_rep(g, alg: LieAlgebra, tol: float = 1e-9) -> np.ndarray:
    """Matrix of Y -> g Y g^-1 in the basis of ``alg``."""
    from .groups import membership_residual

    M = g.matrix if hasattr(g, "matrix") else np.asarray(g)
    group = getattr(g, "group", alg.name)
    r = membership_residual(M, group)
    if r >= tol:
        raise NotInGroup(f"membership residual {r:.3e} for {group}")
    ginv = np.linalg.inv(M)
    cols = [alg.coords_of(M @ b @ ginv)[0] for b in alg.basis]
    return np.array(cols).T


# --------------------------------------------------------------------------
# registry


def so_basis(n: int) -> np.ndarray:
    mats = []
    for i, j in itertools.combinations(range(n), 2):
        E = np.zeros((n, n))
        E[j, i] = 1.0
        E[i, j] = -1.0
        mats.append(E)
    return np.array(mats)


def _so3_basis() -> np.ndarray:
    Lx = np.array([[0, 0, 0], [0, 0, -1], [0, 1, 0]], dtype=float)
    Ly = np.array([[0, 0, 1], [0, 0, 0], [-1, 0, 0]], dtype=float)
    Lz = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]], dtype=float)
    return np.array([Lx, Ly, Lz])


def _su2_basis() -> np.ndarray:
    Bx = np.array([[0.5j, 0], [0, -0.5j]])
    By = np.array([[0, 0.5], [-0.5, 0]], dtype=complex)
    Bz = np.array([[0, 0.5j], [0.5j, 0]])
    return np.array([Bx, By, Bz])


_MAX_SO = 8


def registered_algebras() -> list[str]:
    return ["so3", "su2"] + [f"so{n}" for n in range(4, _MAX_SO + 1)]


def get_algebra(name: str) -> LieAlgebra:
    """Registered algebra by name; accepts ``so3``, ``SO(3)``, ``su2`` and so on."""
    return _build(name.lower().replace("(", "").replace(")", "").replace("_", ""))


@lru_cache(maxsize=None)
def _build(key: str) -> LieAlgebra:
    if key == "so3":
        return LieAlgebra.from_basis("so3", _so3_basis())
    if key == "su2":
        return LieAlgebra.from_basis("su2", _su2_basis())
    if key.startswith("so") and key[2:].isdigit():
        n = int(key[2:])
        if 4 <= n <= _MAX_SO:
            return LieAlgebra.from_basis(key, so_basis(n))
    raise UnknownGroup(f"unknown group {key!r}; registered: {', '.join(registered_algebras())}")
