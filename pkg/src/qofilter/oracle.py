"""Benchmarks that require the true object's principal components.

Kept apart from :mod:`qofilter.estimators` so that no restoration path can
depend on the unknown object by accident.
"""

from __future__ import annotations

import numpy as np

from .estimators import LseEstimate, lse, wiener_weights
from .model import RefinedImage, RefinedModel

__all__ = ["filter_error_sq", "wiener_min_error_sq", "optimal_estimate"]


def filter_error_sq(lam, w, p0) -> float:
    """Expected squared error of the filtered estimate with weights ``w``.

    ``sum(w^2 / lam + (1 - w)^2 p0^2)``: variance plus squared bias.
    """
    lam, w, p0 = (np.asarray(v, dtype=float) for v in (lam, w, p0))
    if np.any(lam <= 0):
        raise ValueError("Fisher eigenvalues must be positive")
    return float(np.sum(w * w / lam + (1.0 - w) ** 2 * p0 * p0))


def wiener_min_error_sq(lam, p0) -> float:
    """Closed form of ``filter_error_sq`` at the Wiener weights: ``sum(p0^2 / (1 + lam p0^2))``."""
    lam, p0 = np.asarray(lam, dtype=float), np.asarray(p0, dtype=float)
    return float(np.sum(p0 * p0 / (1.0 + lam * p0 * p0)))


def optimal_estimate(
    rm: RefinedModel, img: RefinedImage, p0, est: LseEstimate | None = None
) -> tuple[np.ndarray, float]:
    """Wiener-filtered object built from the true components, and its expected error."""
    est = lse(rm, img) if est is None else est
    w = wiener_weights(rm.lam, p0)
    return rm.V @ (w * est.p_star), filter_error_sq(rm.lam, w, p0)
