"""Least-squares estimate, misfit, feasible-region tests and linear filters.

Everything here works in principal-component coordinates ``p = V^T x`` and
uses only observed quantities.  Benchmarks that need the true object live in
:mod:`qofilter.oracle`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import LinAlgError, as_vector
from .model import RefinedImage, RefinedModel
from .stats import chi2_quantile, chi2_sf

__all__ = [
    "LseEstimate",
    "FeasibilitySpec",
    "lse",
    "misfit",
    "feasible",
    "implied_significance",
    "apply_filter",
    "wiener_weights",
    "weights_fr_residual",
    "fisher_matrix",
]


@dataclass(frozen=True)
class LseEstimate:
    p_star: np.ndarray
    x_star: np.ndarray


@dataclass(frozen=True)
class FeasibilitySpec:
    """Significance band ``0 <= alpha1 <= alpha2 <= 1`` for ``n`` degrees of freedom.

    A misfit ``theta`` is feasible when
    ``chi2_quantile(1 - alpha2, n) <= theta <= chi2_quantile(1 - alpha1, n)``.
    """

    alpha1: float
    alpha2: float
    n: int

    def __post_init__(self):
        if not 0.0 <= self.alpha1 <= self.alpha2 <= 1.0:
            raise ValueError(
                f"need 0 <= alpha1 <= alpha2 <= 1, got {self.alpha1}, {self.alpha2}"
            )
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"degrees of freedom must be a positive integer, got {self.n}")

    def bounds(self) -> tuple[float, float]:
        return _threshold(self.alpha2, self.n), _threshold(self.alpha1, self.n)


def _threshold(alpha: float, n: int) -> float:
    # t_{1-alpha}; the closed ends of the band are 0 and +inf
    if alpha >= 1.0:
        return 0.0
    if alpha <= 0.0:
        return np.inf
    return chi2_quantile(1.0 - alpha, n)


def _check(rm: RefinedModel, v, name: str) -> np.ndarray:
    v = as_vector(v, name)
    if v.shape != (rm.n,):
        raise LinAlgError(f"{name} has length {v.shape[0]}, expected {rm.n}")
    return v


def lse(rm: RefinedModel, img: RefinedImage) -> LseEstimate:
    """Least-squares estimate ``p* = phi / delta``, ``x* = V p*``."""
    phi = _check(rm, img.phi, "phi")
    if np.any(rm.delta <= 0):
        raise LinAlgError("least-squares estimate needs strictly positive singular values")
    p_star = phi / rm.delta
    return LseEstimate(p_star, rm.V @ p_star)


def misfit(rm: RefinedModel, img: RefinedImage, p) -> float:
    """``||phi - diag(delta) p||^2`` of a trial estimate with components ``p``."""
    r = img.phi - rm.delta * _check(rm, p, "p")
    return float(r @ r)


def feasible(theta: float, spec: FeasibilitySpec) -> bool:
    if not theta >= 0:
        raise ValueError(f"misfit must be non-negative, got {theta}")
    lo, hi = spec.bounds()
    return bool(lo <= theta <= hi)


def implied_significance(theta: float, n: int) -> float:
    """The level ``alpha`` at which ``theta`` sits on the boundary, ``1 - P_n(theta)``."""
    return chi2_sf(theta, n)


def apply_filter(rm: RefinedModel, w, est: LseEstimate) -> tuple[np.ndarray, np.ndarray]:
    p_w = _check(rm, w, "w") * est.p_star
    return p_w, rm.V @ p_w


def wiener_weights(lam, p) -> np.ndarray:
    """Wiener-form weights ``lam p^2 / (1 + lam p^2)``."""
    lam, p = np.asarray(lam, dtype=float), np.asarray(p, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("Fisher eigenvalues must be positive")
    s = lam * p * p
    return s / (1.0 + s)


def weights_fr_residual(img: RefinedImage, w) -> float:
    """``||(W - E) phi||^2``, the misfit of the filtered estimate ``W p*``."""
    w = as_vector(w, "w")
    if w.shape != img.phi.shape:
        raise LinAlgError("weights and refined image differ in length")
    r = (w - 1.0) * img.phi
    return float(r @ r)


def fisher_matrix(rm: RefinedModel) -> np.ndarray:
    return (rm.V * rm.lam) @ rm.V.T
