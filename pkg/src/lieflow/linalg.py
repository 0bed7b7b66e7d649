"""Small dense matrix kernels: exponential, principal logarithm, eigenvalues.

All routines operate on numpy arrays. ``mat_exp`` and ``mat_log_principal``
accept stacks of shape ``(..., n, n)``; the eigensolver works on one matrix
at a time and is meant for n <= 16.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EigenvalueAtMinusOne, NoConvergence, NotSquareError

__all__ = [
    "Spectrum",
    "commutator",
    "mat_exp",
    "mat_log_principal",
    "sqrtm_db",
    "eigvals_qr",
    "eigen_decompose",
    "kernel_dim",
    "RANK_RTOL",
]

EPS = np.finfo(float).eps
RANK_RTOL = 1e-8
CLUSTER_RTOL = 1e-8

# Pade [13/13] numerator coefficients and the 1-norm bound below which no
# squaring is needed (double precision).
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
THETA13 = 5.371920351148152


def _check_square(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise NotSquareError(f"expected square matrix, got shape {A.shape}")
    if not (np.issubdtype(A.dtype, np.floating) or np.issubdtype(A.dtype, np.complexfloating)):
        A = A.astype(float)
    return A


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


def _norm1(A: np.ndarray) -> np.ndarray:
    return np.abs(A).sum(axis=-2).max(axis=-1)


def _pade13(A: np.ndarray) -> np.ndarray:
    b = _PADE13
    n = A.shape[-1]
    ident = np.broadcast_to(np.eye(n, dtype=A.dtype), A.shape)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (
        A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
        + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident
    )
    V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident
    # (V - U)^-1 (V + U) written as I + 2 (V - U)^-1 U, exact when A = 0
    return ident + 2.0 * np.linalg.solve(V - U, U)


def mat_exp(A: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a degree-13 Pade approximant.

    Stacks are handled by grouping elements with the same squaring count, so a
    small-norm member is never over-scaled because of a large one.
    """
    A = _check_square(A)
    if A.ndim == 2:
        return _mat_exp_stack(A[None])[0]
    flat = A.reshape((-1,) + A.shape[-2:])
    return _mat_exp_stack(flat).reshape(A.shape)


def _mat_exp_stack(A: np.ndarray) -> np.ndarray:
    norms = _norm1(A)
    s = np.zeros(len(A), dtype=int)
    big = norms > THETA13
    s[big] = np.ceil(np.log2(norms[big] / THETA13)).astype(int)
    out = np.empty_like(A)
    for sv in np.unique(s):
        idx = np.nonzero(s == sv)[0]
        E = _pade13(A[idx] / 2.0**sv)
        for _ in range(sv):
            E = E @ E
        out[idx] = E
    return out


def sqrtm_db(G: np.ndarray, maxiter: int = 100) -> np.ndarray:
    """Principal square root by the Denman-Beavers coupled iteration."""
    n = G.shape[-1]
    Y = G.copy()
    Z = np.broadcast_to(np.eye(n, dtype=G.dtype), G.shape).copy()
    for _ in range(maxiter):
        Yn = 0.5 * (Y + np.linalg.inv(Z))
        Zn = 0.5 * (Z + np.linalg.inv(Y))
        delta = np.abs(Yn - Y).max()
        Y, Z = Yn, Zn
        if delta <= 4 * n * EPS * max(1.0, np.abs(Y).max()):
            break
    else:
        raise NoConvergence("square-root iteration did not converge")
    return Y


def _log_near_identity(G: np.ndarray) -> np.ndarray:
    # log(G) = 2 atanh(Z) with Z = (G - I)(G + I)^-1, ||Z|| small here.
    n = G.shape[-1]
    ident = np.eye(n, dtype=G.dtype)
    Z = np.swapaxes(np.linalg.solve(np.swapaxes(G + ident, -1, -2), np.swapaxes(G - ident, -1, -2)), -1, -2)
    Z2 = Z @ Z
    term = Z
    acc = Z.copy()
    for m in range(1, 40):
        term = term @ Z2
        contrib = term / (2 * m + 1)
        acc = acc + contrib
        if np.abs(contrib).max() <= EPS * max(1e-300, np.abs(acc).max()) * 0.1:
            break
    return 2.0 * acc


def mat_log_principal(
    G: np.ndarray, *, unitary: bool = False, cut_tol: float = 1e-8, screen: bool = True
) -> np.ndarray:
    """Principal logarithm via inverse scaling and squaring.

    Raises EigenvalueAtMinusOne when -1 (more generally, the closed negative
    real axis) meets the spectrum within ``cut_tol``. With ``unitary=True`` the
    spectrum is assumed to sit on the unit circle, so the screen reduces to the
    smallest singular value of G + I and stacks are processed in one pass.
    ``screen=False`` skips the check for callers that have already done it.
    """
    G = _check_square(G)
    single = G.ndim == 2
    stack = G[None] if single else G.reshape((-1,) + G.shape[-2:])
    n = stack.shape[-1]
    scale = max(1.0, float(np.abs(stack).max()))

    if not screen:
        pass
    elif unitary:
        smin = np.linalg.svd(stack + np.eye(n), compute_uv=False)[..., -1]
        bad = np.nonzero(smin <= cut_tol * scale)[0]
        if len(bad):
            raise EigenvalueAtMinusOne(f"eigenvalue at -1 in {len(bad)} matrix(es), first index {bad[0]}")
    else:
        for M in stack:
            lam = eigvals_qr(M)
            on_cut = (np.abs(lam.imag) <= cut_tol * scale) & (lam.real <= cut_tol * scale)
            if np.any(on_cut):
                raise EigenvalueAtMinusOne("spectrum meets the closed negative real axis")

    if unitary:
        L = _log_unitary_stack(stack)
    else:
        work = stack.astype(complex) if not np.iscomplexobj(stack) else stack.copy()
        ident = np.eye(n)
        k = 0
        while _norm1(work - ident).max() > 0.25:
            work = sqrtm_db(work)
            k += 1
            if k > 64:
                raise NoConvergence("too many square roots in logarithm")
        L = _log_near_identity(work) * 2.0**k
    if not np.iscomplexobj(stack) and np.iscomplexobj(L):
        if np.abs(L.imag).max() <= 1e-12 * max(1.0, np.abs(L.real).max()):
            L = L.real
    return L[0] if single else L.reshape(G.shape[:-2] + L.shape[-2:])


def sqrtm_unitary(U: np.ndarray, maxiter: int = 100) -> np.ndarray:
    """Principal square root of unitary matrices: the unitary polar factor of I + U.

    Scaled Newton steps bring the iterate near the unitary group; once
    ||Y^H Y - I|| < 0.5 the inverse-free Newton-Schulz iteration finishes.
    """
    n = U.shape[-1]
    ident = np.eye(n)
    Y = 0.5 * (U + ident)
    for _ in range(maxiter):
        R = _dagger(Y) @ Y - ident
        if np.linalg.norm(R, axis=(-2, -1)).max() < 0.5:
            break
        Yi = _dagger(np.linalg.inv(Y))
        gam = np.sqrt(np.linalg.norm(Yi, axis=(-2, -1)) / np.linalg.norm(Y, axis=(-2, -1)))[..., None, None]
        Y = 0.5 * (gam * Y + Yi / gam)
    else:
        raise NoConvergence("polar iteration did not converge")
    for _ in range(maxiter):
        step = -0.5 * (Y @ R)
        Y = Y + step
        if np.abs(step).max() <= 4 * n * EPS:
            break
        R = _dagger(Y) @ Y - ident
    else:
        raise NoConvergence("polar iteration did not converge")
    return Y


def _dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def _log_unitary_stack(U: np.ndarray) -> np.ndarray:
    # Eigen-angles are halved by each square root until all lie within pi/4,
    # i.e. ||U - I||_2 <= 2 sin(pi/8); the Cayley/atanh series then converges
    # with ratio tan(pi/8)^2.
    n = U.shape[-1]
    bound = 2.0 * np.sin(np.pi / 8)
    # the Frobenius norm bounds the spectral norm; overestimating only costs
    # an extra root
    dev = np.linalg.norm(U - np.eye(n), axis=(-2, -1))
    k = np.zeros(len(U), dtype=int)
    k[dev > bound] = 1
    # angles in (pi/4, pi/2] need one root, angles in (pi/2, pi) need two
    k[dev > 2.0 * np.sin(np.pi / 4)] = 2
    out = np.empty(U.shape, dtype=np.result_type(U, float))
    work = U.copy()
    for level in range(int(k.max()) + 1):
        done = k == level
        if done.any():
            out[done] = _log_near_identity(work[done]) * 2.0**level
        todo = k > level
        if not todo.any():
            break
        work[todo] = sqrtm_unitary(work[todo])
    return out


# --------------------------------------------------------------------------
# eigenvalues


def _hessenberg(A: np.ndarray) -> np.ndarray:
    H = np.array(A, dtype=complex)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x.copy()
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[k + 1 :, k:] -= 2.0 * np.outer(v, v.conj() @ H[k + 1 :, k:])
        H[:, k + 1 :] -= 2.0 * np.outer(H[:, k + 1 :] @ v, v.conj())
        H[k + 2 :, k] = 0.0
    return H


def _wilkinson(a, b, c, d):
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    mu1 = 0.5 * (a + d) + disc
    mu2 = 0.5 * (a + d) - disc
    return mu1 if abs(mu1 - d) < abs(mu2 - d) else mu2


def _qr_step(B: np.ndarray, mu: complex) -> None:
    m = B.shape[0]
    B -= mu * np.eye(m)
    rots = []
    for k in range(m - 1):
        x, y = B[k, k], B[k + 1, k]
        r = np.hypot(abs(x), abs(y))
        if r == 0.0:
            G = np.eye(2, dtype=complex)
        else:
            c, s = x / r, y / r
            G = np.array([[c.conjugate(), s.conjugate()], [-s, c]])
        B[k : k + 2, k:] = G @ B[k : k + 2, k:]
        B[k + 1, k] = 0.0
        rots.append(G)
    for k, G in enumerate(rots):
        B[: k + 2, k : k + 2] = B[: k + 2, k : k + 2] @ G.conj().T
    B += mu * np.eye(m)


def eigvals_qr(A: np.ndarray, max_iter: int | None = None) -> np.ndarray:
    """Eigenvalues by Hessenberg reduction and Wilkinson-shifted complex QR.

    For real input the result is made exactly closed under conjugation.
    """
    A = _check_square(A)
    if A.ndim != 2:
        raise NotSquareError("eigvals_qr takes a single matrix")
    n = A.shape[0]
    if n == 0:
        return np.zeros(0, dtype=complex)
    H = _hessenberg(A)
    hnorm = max(np.abs(H).max(), np.finfo(float).tiny)
    budget = max_iter if max_iter is not None else 100 * n * n
    lam = np.zeros(n, dtype=complex)
    hi = n - 1
    total = 0
    since = 0
    while hi >= 0:
        if hi == 0:
            lam[0] = H[0, 0]
            break
        l = hi
        while l > 0:
            tol = EPS * max(abs(H[l, l]) + abs(H[l - 1, l - 1]), hnorm)
            if abs(H[l, l - 1]) <= tol:
                H[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            lam[hi] = H[hi, hi]
            hi -= 1
            since = 0
            continue
        total += 1
        since += 1
        if total > budget:
            raise NoConvergence(f"QR iteration exceeded {budget} steps")
        if since % 11 == 10:
            # exceptional shift to break cycles
            mu = H[hi, hi] + 0.75 * abs(H[hi, hi - 1]) * (1.0 + 0.5j)
        else:
            mu = _wilkinson(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
        block = H[l : hi + 1, l : hi + 1].copy()
        _qr_step(block, mu)
        H[l : hi + 1, l : hi + 1] = block
    if not np.iscomplexobj(A):
        lam = _pair_conjugates(lam, hnorm)
    return lam


def _pair_conjugates(lam: np.ndarray, scale: float) -> np.ndarray:
    """Force exact conjugate pairing; used for spectra of real matrices."""
    lam = lam.copy()
    real_tol = 1e-10 * scale
    out = []
    upper = [z for z in lam if z.imag > real_tol]
    lower = [z for z in lam if z.imag < -real_tol]
    reals = [complex(z.real, 0.0) for z in lam if abs(z.imag) <= real_tol]
    # greedy nearest-conjugate matching, biggest imaginary parts first
    upper.sort(key=lambda z: -z.imag)
    for z in upper:
        if not lower:
            reals.append(complex(z.real, 0.0))
            continue
        j = int(np.argmin([abs(z - w.conjugate()) for w in lower]))
        w = lower.pop(j)
        m = 0.5 * (z + w.conjugate())
        out.extend([m, m.conjugate()])
    reals.extend(complex(w.real, 0.0) for w in lower)
    out.extend(reals)
    return np.array(out, dtype=complex)


def kernel_dim(A: np.ndarray, tol: float) -> int:
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s <= tol))


@dataclass(frozen=True)
class Spectrum:
    """Distinct eigenvalues with algebraic and geometric multiplicities."""

    eigenvalues: tuple[complex, ...]
    algebraic: tuple[int, ...]
    geometric: tuple[int, ...]
    raw: np.ndarray = field(repr=False, compare=False)

    @property
    def diagonalizable(self) -> bool:
        return all(g == a for g, a in zip(self.geometric, self.algebraic))

    @property
    def dimension(self) -> int:
        return sum(self.algebraic)

    def all_values(self) -> np.ndarray:
        """Eigenvalues repeated by algebraic multiplicity."""
        return np.repeat(np.array(self.eigenvalues, dtype=complex), self.algebraic)


def _cluster(lam: np.ndarray, tol: float) -> list[list[int]]:
    n = len(lam)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(lam[i] - lam[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def eigen_decompose(A: np.ndarray) -> Spectrum:
    """Eigenvalues of A with multiplicities.

    Geometric multiplicity is the numerical nullity of A - lambda*I with rank
    tolerance ``RANK_RTOL`` times the largest row norm of A. For real input
    the eigenvalues come back in exact conjugate pairs.
    """
    A = _check_square(A)
    n = A.shape[0]
    real_input = not np.iscomplexobj(A) or not np.any(A.imag)
    lam = eigvals_qr(A)
    row_norm = float(np.abs(A).sum(axis=1).max()) if n else 0.0
    scale = max(1.0, row_norm)
    if real_input:
        lam = _pair_conjugates(lam, scale)
    groups = _cluster(lam, CLUSTER_RTOL * scale)
    # keep conjugate clusters adjacent and the order deterministic
    reps = []
    for g in groups:
        z = complex(np.mean(lam[g]))
        if real_input and abs(z.imag) <= 1e-10 * scale:
            z = complex(z.real, 0.0)
        reps.append((z, len(g)))
    if real_input:
        # symmetrize representatives so that conj pairing survives averaging
        fixed = []
        for z, m in reps:
            if z.imag > 0:
                fixed.append((z, m))
                fixed.append((z.conjugate(), m))
            elif z.imag == 0:
                fixed.append((z, m))
        reps = fixed
    reps.sort(key=lambda p: (round(p[0].real, 12), -p[0].imag))
    rank_tol = RANK_RTOL * max(row_norm, np.finfo(float).tiny)
    ident = np.eye(n)
    geo = []
    for z, m in reps:
        k = kernel_dim(A - z * ident, rank_tol) if n else 0
        geo.append(min(max(k, 1), m))
    return Spectrum(
        eigenvalues=tuple(z for z, _ in reps),
        algebraic=tuple(m for _, m in reps),
        geometric=tuple(geo),
        raw=lam,
    )
