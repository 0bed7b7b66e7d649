"""Compact matrix groups SO(n) and SU(2): membership, sampling, re-projection."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .algebra import LieAlgebra, get_algebra
from .errors import NotInGroup

log = logging.getLogger(__name__)

MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True)
class GroupSpec:
    name: str
    n: int
    complex: bool

    @property
    def algebra(self) -> LieAlgebra:
        return get_algebra(self.name)


def get_group(name: str) -> GroupSpec:
    alg = get_algebra(name)
    return GroupSpec(alg.name, alg.matrix_size, alg.name == "su2")


def membership_residual(M: np.ndarray, group: str) -> float:
    """max(||M M^H - I||_F, |det M - 1|), plus the imaginary part for SO(n)."""
    spec = get_group(group)
    M = np.asarray(M)
    if M.shape != (spec.n, spec.n):
        return float("inf")
    r = max(
        float(np.linalg.norm(M @ M.conj().T - np.eye(spec.n))),
        float(abs(np.linalg.det(M) - 1.0)),
    )
    if not spec.complex and np.iscomplexobj(M):
        r = max(r, float(np.abs(M.imag).max()))
    return r


@dataclass(frozen=True, eq=False)
class GroupElement:
    group: str
    matrix: np.ndarray
    membership_residual: float

    @classmethod
    def make(cls, group: str, M: np.ndarray, tol: float = MEMBERSHIP_TOL) -> "GroupElement":
        spec = get_group(group)
        M = np.array(M, dtype=complex if spec.complex else None)
        if not spec.complex and np.iscomplexobj(M):
            if np.abs(M.imag).max() > tol:
                raise NotInGroup(f"complex matrix is not in {spec.name}")
            M = M.real.copy()
        r = membership_residual(M, spec.name)
        if not r < tol:
            raise NotInGroup(f"membership residual {r:.3e} >= {tol:g} for {spec.name}")
        M.setflags(write=False)
        return cls(spec.name, M, r)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if other.group != self.group:
            from .errors import MixedGroups

            raise MixedGroups(f"{self.group} vs {other.group}")
        return GroupElement.make(self.group, self.matrix @ other.matrix)

    def inverse(self) -> "GroupElement":
        return GroupElement.make(self.group, self.matrix.conj().T)


def identity(group: str) -> GroupElement:
    spec = get_group(group)
    return GroupElement.make(spec.name, np.eye(spec.n, dtype=complex if spec.complex else float))


def minus_identity(group: str) -> GroupElement:
    """-I; central whenever it belongs to the group (n even, or SU(2))."""
    spec = get_group(group)
    return GroupElement.make(spec.name, -np.eye(spec.n, dtype=complex if spec.complex else float))


def random_element(group: str, rng) -> GroupElement:
    """Haar-distributed element drawn from an ``XorShift64Star`` stream."""
    spec = get_group(group)
    if spec.complex:
        q = rng.normals(4)
        q /= np.linalg.norm(q)
        a, b, c, d = q
        M = np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])
        return GroupElement.make(spec.name, M)
    A = rng.normals(spec.n, spec.n)
    Q, R = np.linalg.qr(A)
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return GroupElement.make(spec.name, Q)


def random_algebra_element(algebra: LieAlgebra, rng, scale: float = 1.0):
    return algebra.element(scale * rng.normals(algebra.dim))


def polar_project(M: np.ndarray, group: str, maxiter: int = 50) -> np.ndarray:
    """Nearest group element via Newton iteration on the unitary polar factor."""
    spec = get_group(group)
    U = np.array(M, dtype=complex if spec.complex else float)
    for _ in range(maxiter):
        Un = 0.5 * (U + np.linalg.inv(U).conj().T)
        done = np.abs(Un - U).max() <= 1e-15
        U = Un
        if done:
            break
    det = np.linalg.det(U)
    if spec.complex:
        U = U / det ** (1.0 / spec.n)
    elif det < 0:
        raise NotInGroup("polar factor has determinant -1")
    return U
