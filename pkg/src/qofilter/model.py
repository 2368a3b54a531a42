"""Observation model, whitening and spectral refinement.

A general model ``y0 = H x0 + xi`` with noise mean ``a`` and covariance ``C``
is whitened by ``C^{-1/2}`` into ``z0 = A x0 + eta`` with unit noise, and the
thin SVD ``A = U diag(delta) V^T`` reduces the data to the length-``n``
refined image ``phi = U^T z0 = diag(delta) p0 + zeta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import LinAlgError, as_matrix, as_vector, inv_sqrt_spd, svd

__all__ = [
    "RANK_RTOL",
    "GeneralModel",
    "StandardModel",
    "RefinedModel",
    "RefinedImage",
    "whiten",
    "standardize",
    "decompose",
    "refine_image",
    "principal_components",
    "synthesize",
]

RANK_RTOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GeneralModel:
    """PSF ``H`` (m x n), noise mean ``a`` (m) and noise covariance ``C`` (m x m)."""

    H: np.ndarray
    a: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        H = as_matrix(self.H, "H")
        m, n = H.shape
        if m < n:
            raise LinAlgError(f"model requires m >= n, got H of shape {H.shape}")
        a = as_vector(self.a, "a")
        C = as_matrix(self.C, "C")
        if a.shape != (m,) or C.shape != (m, m):
            raise LinAlgError("noise mean/covariance do not match the rows of H")
        object.__setattr__(self, "H", _frozen(H))
        object.__setattr__(self, "a", _frozen(a))
        object.__setattr__(self, "C", _frozen(C))

    @classmethod
    def white(cls, H, sigma: float, mean: float = 0.0) -> "GeneralModel":
        m = np.shape(H)[0]
        if sigma <= 0:
            raise LinAlgError("white-noise sigma must be positive")
        return cls(H, np.full(m, float(mean)), sigma**2 * np.eye(m))

    @property
    def m(self) -> int:
        return self.H.shape[0]

    @property
    def n(self) -> int:
        return self.H.shape[1]


@dataclass(frozen=True)
class StandardModel:
    A: np.ndarray
    whitener: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class RefinedModel:
    U: np.ndarray
    delta: np.ndarray
    V: np.ndarray
    lam: np.ndarray

    @property
    def n(self) -> int:
        return self.delta.shape[0]

    @property
    def m(self) -> int:
        return self.U.shape[0]


@dataclass(frozen=True)
class RefinedImage:
    phi: np.ndarray

    @property
    def n(self) -> int:
        return self.phi.shape[0]


def whiten(gm: GeneralModel) -> StandardModel:
    """Whitened PSF ``A = C^{-1/2} H`` together with the whitening matrix."""
    # fast path: scaled identity covariance
    c0 = gm.C[0, 0]
    if c0 > 0 and np.array_equal(gm.C, c0 * np.eye(gm.m)):
        w = np.eye(gm.m) / np.sqrt(c0)
        return StandardModel(_frozen(gm.H / np.sqrt(c0)), _frozen(w))
    w = inv_sqrt_spd(gm.C)
    return StandardModel(_frozen(w @ gm.H), _frozen(w))


def standardize(gm: GeneralModel, y0) -> tuple[StandardModel, np.ndarray]:
    y0 = as_vector(y0, "y0")
    if y0.shape != (gm.m,):
        raise LinAlgError(f"image length {y0.shape[0]} does not match m={gm.m}")
    sm = whiten(gm)
    return sm, sm.whitener @ (y0 - gm.a)


def decompose(sm: StandardModel, rank_rtol: float = RANK_RTOL) -> RefinedModel:
    u, delta, v = svd(sm.A)
    if delta[0] <= 0 or delta[-1] < rank_rtol * delta[0]:
        ratio = delta[-1] / delta[0] if delta[0] > 0 else 0.0
        raise LinAlgError(
            f"rank-deficient model: delta_min/delta_max = {ratio:.3e} < {rank_rtol:g}"
        )
    return RefinedModel(_frozen(u), _frozen(delta), _frozen(v), _frozen(delta * delta))


def refine_image(rm: RefinedModel, z0) -> RefinedImage:
    z0 = as_vector(z0, "z0")
    if z0.shape != (rm.m,):
        raise LinAlgError(f"whitened image length {z0.shape[0]} does not match m={rm.m}")
    return RefinedImage(_frozen(rm.U.T @ z0))


def principal_components(rm: RefinedModel, x) -> np.ndarray:
    x = as_vector(x, "x")
    if x.shape != (rm.n,):
        raise LinAlgError(f"object length {x.shape[0]} does not match n={rm.n}")
    return rm.V.T @ x


def synthesize(rm: RefinedModel, p) -> np.ndarray:
    p = as_vector(p, "p")
    if p.shape != (rm.n,):
        raise LinAlgError(f"component vector length {p.shape[0]} does not match n={rm.n}")
    return rm.V @ p
