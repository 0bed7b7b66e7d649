"""Invariant flow exp(tX) g and linear flow exp(tX) g exp(-tX)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraElement
from .errors import MixedGroups, WrongAlgebra
from .groups import GroupElement, get_group, membership_residual, polar_project
from .linalg import mat_exp
from .serialize import csv_text

log = logging.getLogger(__name__)

METHODS = ("closed-form", "generic-exp", "ode-oracle")
FLOW_KINDS = ("linear", "invariant")
SMALL_NORM = 1e-8
REPROJECT_TOL = 1e-10


def _check_pair(X: AlgebraElement, g: GroupElement) -> None:
    if X.algebra.name != g.group:
        raise MixedGroups(f"generator in {X.algebra.name}, point in {g.group}")


def _closed_form_stack(X: AlgebraElement, ts: np.ndarray) -> np.ndarray:
    name = X.algebra.name
    A = X.matrix
    A2 = A @ A
    n = A.shape[0]
    ts = np.asarray(ts, dtype=float)
    nv = float(np.linalg.norm(X.coords))
    if name == "so3":
        if nv < SMALL_NORM:
            c1, c2 = ts, 0.5 * ts**2
        else:
            th = ts * nv
            c1, c2 = np.sin(th) / nv, (1.0 - np.cos(th)) / nv**2
        return np.eye(n) + c1[:, None, None] * A + c2[:, None, None] * A2
    if name == "su2":
        w = 0.5 * nv  # X^2 = -w^2 I
        if nv < SMALL_NORM:
            return np.eye(n) + ts[:, None, None] * A + (0.5 * ts**2)[:, None, None] * A2
        return np.cos(ts * w)[:, None, None] * np.eye(n) + (np.sin(ts * w) / w)[:, None, None] * A
    raise WrongAlgebra(f"no closed form for {name}")


def exp_stack(X: AlgebraElement, ts, method: str = "generic-exp") -> np.ndarray:
    """exp(t X) for every t in ``ts``; shape (len(ts), n, n)."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if method == "closed-form":
        return _closed_form_stack(X, ts)
    if method == "generic-exp":
        return mat_exp(ts[:, None, None] * X.matrix[None])
    if method == "ode-oracle":
        ident = np.eye(X.algebra.matrix_size, dtype=X.matrix.dtype)
        return np.array([rk4_flow(X, ident, t, "invariant") for t in ts])
    raise ValueError(f"unknown method {method!r}")


def so3_exp_closed(X: AlgebraElement, t: float) -> GroupElement:
    """Rodrigues form of exp(tX) on so(3); series limit for |X| < 1e-8."""
    if X.algebra.name != "so3":
        raise WrongAlgebra(f"expected so3, got {X.algebra.name}")
    return GroupElement.make("so3", _closed_form_stack(X, np.array([t]))[0])


def su2_exp_closed(X: AlgebraElement, t: float) -> GroupElement:
    if X.algebra.name != "su2":
        raise WrongAlgebra(f"expected su2, got {X.algebra.name}")
    return GroupElement.make("su2", _closed_form_stack(X, np.array([t]))[0])


def so3_exp_hyperbolic(X: AlgebraElement, t: float, sign: int = -1) -> np.ndarray:
    """exp(tX) on so(3) from the cosh/sinh expression, in complex arithmetic.

    lam = sign * sqrt(-(x^2 + y^2 + z^2)) is purely imaginary; sign=-1 is the
    root used for exp(tX), and either root gives the same matrix.
    """
    if X.algebra.name != "so3":
        raise WrongAlgebra(f"expected so3, got {X.algebra.name}")
    A = X.matrix.astype(complex)
    lam = sign * np.sqrt(complex(-float(X.coords @ X.coords)))
    if abs(lam) < SMALL_NORM:
        return (np.eye(3) + t * A + 0.5 * t * t * A @ A).real
    M = (np.cosh(t * lam) - 1.0) / lam**2 * (A @ A) + np.sinh(t * lam) / lam * A + np.eye(3)
    return M


def invariant_flow(X: AlgebraElement, g: GroupElement, t: float, method: str = "generic-exp") -> GroupElement:
    _check_pair(X, g)
    if method == "ode-oracle":
        return GroupElement.make(g.group, rk4_flow(X, g.matrix, t, "invariant"))
    E = exp_stack(X, [t], method)[0]
    return GroupElement.make(g.group, E @ g.matrix)


def linear_flow(X: AlgebraElement, g: GroupElement, t: float, method: str = "generic-exp") -> GroupElement:
    _check_pair(X, g)
    if method == "ode-oracle":
        return GroupElement.make(g.group, rk4_flow(X, g.matrix, t, "linear"))
    E = exp_stack(X, [t], method)[0]
    Einv = E.conj().T if method == "closed-form" else exp_stack(X, [-t], method)[0]
    return GroupElement.make(g.group, E @ g.matrix @ Einv)


def flow_matrices(X: AlgebraElement, g: np.ndarray, ts, flow_kind: str, method: str = "generic-exp") -> np.ndarray:
    """Stack of flow_t(g) matrices for all t in ``ts``."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if flow_kind not in FLOW_KINDS:
        raise ValueError(f"unknown flow kind {flow_kind!r}")
    if method == "ode-oracle":
        return np.array([rk4_flow(X, g, t, flow_kind) for t in ts])
    E = exp_stack(X, ts, method)
    if flow_kind == "invariant":
        return E @ g
    # exp(-tX) = exp(tX)^H on compact groups
    return E @ g @ np.conj(np.swapaxes(E, -1, -2))


def _rhs(A: np.ndarray, G: np.ndarray, kind: str) -> np.ndarray:
    return A @ G if kind == "invariant" else A @ G - G @ A


def rk4_flow(X: AlgebraElement, g: np.ndarray, t: float, flow_kind: str, step: float = 1e-4) -> np.ndarray:
    """Classical fixed-step RK4 for g' = X g (invariant) or g' = Xg - gX (linear)."""
    A = X.matrix
    G = np.array(g, dtype=np.result_type(A, g))
    if t == 0:
        return G
    nsteps = max(1, int(math.ceil(abs(t) / step - 1e-9)))
    h = t / nsteps
    for _ in range(nsteps):
        k1 = _rhs(A, G, flow_kind)
        k2 = _rhs(A, G + 0.5 * h * k1, flow_kind)
        k3 = _rhs(A, G + 0.5 * h * k2, flow_kind)
        k4 = _rhs(A, G + h * k3, flow_kind)
        G = G + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return G


@dataclass(frozen=True, eq=False)
class Trajectory:
    generator: AlgebraElement
    start: GroupElement
    times: np.ndarray
    points: list
    method: str
    flow_kind: str
    reprojections: int = 0
    residuals: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.times) != len(self.points):
            raise ValueError("times and points differ in length")

    @property
    def max_residual(self) -> float:
        return float(np.max([p.membership_residual for p in self.points]))

    def header(self) -> list[str]:
        n = self.start.matrix.shape[0]
        cols = ["t"]
        cplx = get_group(self.start.group).complex
        for i in range(n):
            for j in range(n):
                cols.extend([f"m{i}{j}_re", f"m{i}{j}_im"] if cplx else [f"m{i}{j}"])
        cols.append("membership_residual")
        return cols

    def to_csv(self) -> str:
        cplx = get_group(self.start.group).complex
        rows = []
        for t, p in zip(self.times, self.points):
            row = [float(t)]
            for z in p.matrix.reshape(-1):
                row.extend([float(z.real), float(z.imag)] if cplx else [float(np.real(z))])
            row.append(float(p.membership_residual))
            rows.append(row)
        return csv_text(self.header(), rows)


def sample_trajectory(
    X: AlgebraElement,
    g: GroupElement,
    t_max: float,
    n: int,
    flow_kind: str = "linear",
    method: str = "generic-exp",
) -> Trajectory:
    """n equally spaced samples of the flow on [0, t_max]."""
    _check_pair(X, g)
    if n < 2:
        raise ValueError("need at least two samples")
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    ts = np.linspace(0.0, t_max, n)
    if method == "ode-oracle":
        mats = [np.array(g.matrix)]
        for t0, t1 in zip(ts[:-1], ts[1:]):
            sub = rk4_flow(X, mats[-1], t1 - t0, flow_kind)
            mats.append(sub)
        mats = np.array(mats)
    else:
        mats = flow_matrices(X, g.matrix, ts, flow_kind, method)
    points = []
    reproj = 0
    for k, M in enumerate(mats):
        r = membership_residual(M, g.group)
        if r > REPROJECT_TOL:
            log.info("re-projecting sample %d (residual %.3e)", k, r)
            M = polar_project(M, g.group)
            reproj += 1
        points.append(GroupElement.make(g.group, M))
    if reproj:
        log.warning("trajectory needed %d re-projection(s)", reproj)
    return Trajectory(X, g, ts, points, method, flow_kind, reproj)
