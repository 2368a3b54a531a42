"""Dense real linear algebra kernels.

The thin SVD is a one-sided (Hestenes) Jacobi method with a round-robin
pair ordering, so that every round rotates ``n // 2`` disjoint column pairs
in one vectorized step.  Symmetric eigendecomposition defers to LAPACK
through :func:`numpy.linalg.eigh`.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "LinAlgError",
    "as_matrix",
    "as_vector",
    "svd",
    "sym_eig",
    "inv_sqrt_spd",
    "matmul",
    "transpose",
    "dot",
    "norm2",
]

SVD_MAX_SWEEPS = 60
SVD_TOL = 1e-14
SPD_RTOL = 1e-12
SYM_RTOL = 1e-10


class LinAlgError(ValueError):
    """Raised for shape errors, non-finite input and failed factorizations."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise LinAlgError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise LinAlgError(f"{name} contains non-finite entries")
    return a


def as_vector(v, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] < 1:
        raise LinAlgError(f"{name} must be a non-empty 1-D array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise LinAlgError(f"{name} contains non-finite entries")
    return v


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tournament schedule: ``n - 1`` rounds of disjoint pairs covering all pairs.

    Odd ``n`` gets a dummy player ``n`` whose pairs are dropped.
    """
    size = n + (n % 2)
    players = list(range(size))
    rounds = []
    for _ in range(size - 1):
        left = players[: size // 2]
        right = players[size // 2 :][::-1]
        pairs = [(min(x, y), max(x, y)) for x, y in zip(left, right) if max(x, y) < n]
        if pairs:
            p, q = np.array(pairs).T
            rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _fix_signs(v: np.ndarray, *others: np.ndarray) -> None:
    # largest-magnitude entry of each v column positive; argmax takes the lowest index on ties
    idx = np.argmax(np.abs(v), axis=0)
    flip = v[idx, np.arange(v.shape[1])] < 0
    for mat in (v, *others):
        mat[:, flip] *= -1.0


def svd(a, max_sweeps: int = SVD_MAX_SWEEPS, tol: float = SVD_TOL):
    """Thin singular value decomposition of an ``m x n`` matrix with ``m >= n``.

    Returns ``(u, delta, v)`` with ``a = u @ diag(delta) @ v.T``, ``delta``
    non-negative and non-increasing, ``u`` column-orthonormal (``m x n``)
    and ``v`` orthogonal (``n x n``).

    Columns of the working matrix are rotated until every pair satisfies
    ``|a_p . a_q| <= tol * |a_p| |a_q|``.  Raises :class:`LinAlgError` if that
    has not happened after ``max_sweeps`` sweeps.
    """
    a = as_matrix(a, "A")
    m, n = a.shape
    if m < n:
        raise LinAlgError(f"svd requires m >= n, got {m}x{n}")
    # rows of `work` are the columns of [A; V], so pair updates touch contiguous memory
    work = np.concatenate([a.T, np.eye(n)], axis=1)
    rounds = _round_robin(n)
    tiny = np.finfo(float).tiny
    # columns at round-off level are treated as converged null directions
    floor = (np.finfo(float).eps * np.linalg.norm(a)) ** 2

    converged = n == 1
    for _ in range(max_sweeps):
        if converged:
            break
        rotated = False
        for p, q in rounds:
            wp, wq = work[p, :m], work[q, :m]
            alpha = np.einsum("ij,ij->i", wp, wp)
            beta = np.einsum("ij,ij->i", wq, wq)
            gamma = np.einsum("ij,ij->i", wp, wq)
            active = (np.abs(gamma) > tol * np.sqrt(alpha * beta) + tiny) & (alpha > floor) & (beta > floor)
            if not active.any():
                continue
            rotated = True
            p, q = p[active], q[active]
            alpha, beta, gamma = alpha[active], beta[active], gamma[active]
            zeta = (beta - alpha) / (2.0 * gamma)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
            c = (1.0 / np.sqrt(1.0 + t * t))[:, None]
            s = c * t[:, None]
            rp, rq = work[p], work[q]
            work[p] = c * rp - s * rq
            work[q] = s * rp + c * rq
        converged = not rotated
    if not converged:
        raise LinAlgError(f"Jacobi SVD did not converge within {max_sweeps} sweeps")

    w = work[:, :m].T
    v = work[:, m:].T
    delta = np.sqrt(np.einsum("ij,ij->j", w, w))
    order = np.argsort(-delta, kind="stable")
    delta, w, v = delta[order], w[:, order], v[:, order]

    u = np.empty_like(w)
    scale = delta[0] if delta[0] > 0 else 1.0
    good = delta > n * np.finfo(float).eps * scale
    u[:, good] = w[:, good] / delta[good]
    if not np.all(good):
        # null directions: complete the orthonormal basis deterministically
        k = int(good.sum())
        basis = np.concatenate([u[:, :k], np.eye(m)], axis=1)
        q_full, _ = np.linalg.qr(basis)
        u[:, k:] = q_full[:, k:n]
    _fix_signs(v, u)
    return u, delta, v


def sym_eig(s, rtol: float = SYM_RTOL):
    """Eigendecomposition ``s = q @ diag(vals) @ q.T`` with ``vals`` descending."""
    s = as_matrix(s, "S")
    if s.shape[0] != s.shape[1]:
        raise LinAlgError(f"sym_eig requires a square matrix, got {s.shape}")
    scale = max(np.max(np.abs(s)), 1.0)
    if np.max(np.abs(s - s.T)) > rtol * scale:
        raise LinAlgError("matrix is not symmetric within tolerance")
    vals, q = np.linalg.eigh(0.5 * (s + s.T))
    vals, q = vals[::-1].copy(), q[:, ::-1].copy()
    _fix_signs(q)
    return q, vals


def inv_sqrt_spd(c, rtol: float = SPD_RTOL) -> np.ndarray:
    """Symmetric inverse square root of a positive definite matrix."""
    q, vals = sym_eig(c)
    if vals[-1] <= rtol * vals[0] or vals[0] <= 0:
        raise LinAlgError("covariance not positive definite")
    return (q / np.sqrt(vals)) @ q.T


def matmul(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape[-1] != b.shape[0]:
        raise LinAlgError(f"shape mismatch: {a.shape} @ {b.shape}")
    return a @ b


def transpose(a) -> np.ndarray:
    return as_matrix(a).T.copy()


def dot(x, y) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LinAlgError(f"shape mismatch: {x.shape} . {y.shape}")
    return float(x @ y)


def norm2(x) -> float:
    """Squared Euclidean norm."""
    x = np.asarray(x, dtype=float)
    return float(x @ x)
