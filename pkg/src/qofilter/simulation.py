"""PSF kernels, convolution matrices, the two bundled model cases and a Monte Carlo harness.

The harness runs three restorations on every noisy realization of a case:
the least-squares estimate, the Wiener filter built from the true object
(an unattainable benchmark), and the quasi-optimal filter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .estimators import FeasibilitySpec, feasible, implied_significance, lse, misfit, wiener_weights
from .linalg import LinAlgError, as_vector
from .model import GeneralModel, RefinedModel, decompose, principal_components, refine_image, whiten
from .quasiopt import QoConfig, SolverError, solve
from .stats import gaussian_vector

__all__ = [
    "PsfSpec",
    "NoiseSpec",
    "ModelCase",
    "McReport",
    "sinc2_psf",
    "gaussian_psf",
    "build_convolution_matrix",
    "case_model",
    "make_case",
    "model_case_low_freq",
    "model_case_sharp_smooth",
    "rms",
    "high_freq_fraction",
    "peaks_resolved",
    "monte_carlo",
]

CASES = ("lowfreq", "sharp-smooth")


def sinc2_psf(R: float, lag):
    """``sinc^2(lag / R) / R`` with ``sinc(t) = sin(pi t) / (pi t)``."""
    if not R > 0:
        raise ValueError(f"sinc^2 radius must be positive, got {R}")
    return np.sinc(np.asarray(lag, dtype=float) / R) ** 2 / R


def gaussian_psf(sigma: float, lag):
    """Unnormalized Gaussian ``exp(-lag^2 / (2 sigma^2))``."""
    if not sigma > 0:
        raise ValueError(f"Gaussian PSF sigma must be positive, got {sigma}")
    lag = np.asarray(lag, dtype=float)
    return np.exp(-0.5 * (lag / sigma) ** 2)


@dataclass(frozen=True)
class PsfSpec:
    """Space-invariant kernel description.

    ``support_halfwidth`` defaults to ``ceil(5 R)`` for sinc^2 and
    ``ceil(5 sigma)`` for Gaussian kernels.  For sinc^2 that window holds only
    about 98% of the mass (the tails fall off like 1/lag^2); the kernel is
    renormalized over whatever support is kept.  ``kernel`` is only used by
    ``kind="custom"``.
    """

    kind: str
    R: float | None = None
    sigma_psf: float | None = None
    support_halfwidth: int | None = None
    kernel: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind == "sinc2":
            if self.R is None or not self.R > 0:
                raise ValueError("sinc2 PSF needs R > 0")
            width = math.ceil(5 * self.R)
        elif self.kind == "gaussian":
            if self.sigma_psf is None or not self.sigma_psf > 0:
                raise ValueError("gaussian PSF needs sigma_psf > 0")
            width = math.ceil(5 * self.sigma_psf)
        elif self.kind == "custom":
            if self.kernel is None:
                raise ValueError("custom PSF needs a kernel callable")
            width = None
        else:
            raise ValueError(f"unknown PSF kind {self.kind!r}")
        if self.support_halfwidth is None:
            if width is None:
                raise ValueError("custom PSF needs an explicit support_halfwidth")
            object.__setattr__(self, "support_halfwidth", int(width))
        if int(self.support_halfwidth) != self.support_halfwidth or self.support_halfwidth < 0:
            raise ValueError("support_halfwidth must be a non-negative integer")

    def __call__(self, lag):
        if self.kind == "sinc2":
            return sinc2_psf(self.R, lag)
        if self.kind == "gaussian":
            return gaussian_psf(self.sigma_psf, lag)
        return np.asarray(self.kernel(np.asarray(lag, dtype=float)), dtype=float)


@dataclass(frozen=True)
class NoiseSpec:
    mean_a: float = 0.0
    sigma_g: float = 100.0

    def __post_init__(self):
        if not self.sigma_g >= 0:
            raise ValueError(f"sigma_g must be non-negative, got {self.sigma_g}")


@dataclass(frozen=True)
class ModelCase:
    """A known object, its observation model and noise level.

    ``peaks`` lists object indices that should survive restoration as local
    maxima; it is empty for cases without point sources.
    """

    name: str
    x0: np.ndarray
    gm: GeneralModel
    noise: NoiseSpec
    n: int
    m: int
    peaks: tuple = ()
    psf: PsfSpec | None = None

    def __post_init__(self):
        x0 = as_vector(self.x0, "x0")
        if x0.shape != (self.n,) or self.gm.n != self.n or self.gm.m != self.m:
            raise LinAlgError("case object and model dimensions disagree")

    def image(self, seed: int) -> np.ndarray:
        """One noisy observation ``H x0 + xi`` drawn from the case's noise stream."""
        noise = gaussian_vector(seed, self.m, mean=np.full(self.m, self.noise.mean_a), sigma=self.noise.sigma_g)
        return self.gm.H @ self.x0 + noise


def build_convolution_matrix(psf: PsfSpec, n: int, m: int, normalize: str = "rows") -> np.ndarray:
    """Discretize a space-invariant PSF into an ``m x n`` matrix.

    Row ``i`` sees the object through lags ``(i - c) - j`` with
    ``c = (m - n) // 2``, so for ``m = n + 2 h`` the image covers the full
    linear convolution over the support ``[-h, h]``.  Lags outside the
    support are zero.  ``normalize="rows"`` scales every row to unit sum;
    ``normalize="kernel"`` scales the sampled kernel to unit mass so edge rows
    keep only the part of the kernel that falls on the object.
    """
    if n < 1 or m < n:
        raise LinAlgError(f"convolution matrix needs m >= n >= 1, got m={m}, n={n}")
    h = int(psf.support_halfwidth)
    support = np.arange(-h, h + 1)
    samples = psf(support)
    if not np.any(samples != 0):
        raise LinAlgError("PSF has empty support")
    c = (m - n) // 2
    lag = (np.arange(m)[:, None] - c) - np.arange(n)[None, :]
    inside = np.abs(lag) <= h
    H = np.zeros((m, n))
    H[inside] = samples[lag[inside] + h]
    if normalize == "rows":
        sums = H.sum(axis=1, keepdims=True)
        if np.any(sums == 0):
            raise LinAlgError("a row of the convolution matrix has no support; use normalize='kernel'")
        return H / sums
    if normalize == "kernel":
        return H / samples.sum()
    raise ValueError(f"unknown normalization {normalize!r}")


def _case_model(psf: PsfSpec, n: int, noise: NoiseSpec) -> tuple[GeneralModel, int]:
    m = n + 2 * int(psf.support_halfwidth)
    # noise-free cases still need a whitening scale; unit covariance keeps A = H
    return case_model(psf, n, m, noise), m


def case_model(psf: PsfSpec, n: int, m: int, noise: NoiseSpec, normalize: str = "kernel") -> GeneralModel:
    """Rebuild a white-noise model from its PSF description (used when reading saved cases)."""
    H = build_convolution_matrix(psf, n, m, normalize=normalize)
    scale = noise.sigma_g if noise.sigma_g > 0 else 1.0
    return GeneralModel.white(H, scale, noise.mean_a)


def model_case_low_freq(n: int = 128, seed: int = 0, sigma_g: float = 100.0) -> ModelCase:
    """Half-period sine arch of amplitude 1000 blurred by a sinc^2 PSF with R = 9.

    ``seed`` is accepted for a uniform case signature; the case itself is
    deterministic and noise is drawn per trial.
    """
    if n < 32:
        raise ValueError("low-frequency case needs n >= 32")
    t = np.arange(n)
    x0 = 1000.0 * np.sin(np.pi * t / (n - 1))
    noise = NoiseSpec(0.0, sigma_g)
    psf = PsfSpec("sinc2", R=9.0)
    gm, m = _case_model(psf, n, noise)
    return ModelCase("lowfreq", x0, gm, noise, n, m, psf=psf)


def model_case_sharp_smooth(n: int = 128, seed: int = 0, sigma_g: float = 100.0) -> ModelCase:
    """Broad Gaussian bump plus two one-pixel spikes, blurred by a Gaussian PSF with sigma 3."""
    if n < 64:
        raise ValueError("sharp+smooth case needs n >= 64")
    t = np.arange(n)
    x0 = 800.0 * np.exp(-0.5 * ((t - n / 3) / (n / 8)) ** 2)
    peaks = (int(0.6 * n), int(0.7 * n))
    for k in peaks:
        x0[k] += 1000.0
    noise = NoiseSpec(0.0, sigma_g)
    psf = PsfSpec("gaussian", sigma_psf=3.0)
    gm, m = _case_model(psf, n, noise)
    return ModelCase("sharp-smooth", x0, gm, noise, n, m, peaks, psf)


def make_case(name: str, n: int = 128, seed: int = 0, sigma_g: float = 100.0) -> ModelCase:
    if name == "lowfreq":
        return model_case_low_freq(n, seed, sigma_g)
    if name == "sharp-smooth":
        return model_case_sharp_smooth(n, seed, sigma_g)
    raise ValueError(f"unknown case {name!r}; choose from {', '.join(CASES)}")


def rms(x, x0) -> float:
    d = np.asarray(x, dtype=float) - np.asarray(x0, dtype=float)
    return float(np.sqrt(np.mean(d * d)))


def high_freq_fraction(p) -> float:
    """Share of ``sum p_k^2`` carried by the last quarter of the components (smallest lambda)."""
    p = np.asarray(p, dtype=float)
    total = float(p @ p)
    if total == 0:
        return 0.0
    q = max(len(p) // 4, 1)
    tail = p[-q:]
    return float(tail @ tail) / total


def peaks_resolved(x, peaks) -> bool:
    """True when every index in ``peaks`` is a strict local maximum of ``x``."""
    x = np.asarray(x, dtype=float)
    for k in peaks:
        if k <= 0 or k >= len(x) - 1 or not (x[k] > x[k - 1] and x[k] > x[k + 1]):
            return False
    return True


@dataclass
class McReport:
    case: str
    trials: int
    seed: int
    alpha: float
    alpha_mode: str
    rms_lse: np.ndarray
    rms_wiener: np.ndarray
    rms_quasi: np.ndarray
    wiener_alpha: np.ndarray
    hf_fraction: np.ndarray
    fr_inside: np.ndarray
    peaks_quasi: np.ndarray
    peaks_wiener: np.ndarray
    degenerate: int = 0

    def summary(self, name: str) -> dict:
        v = getattr(self, f"rms_{name}")
        if v.size == 0:
            return {"mean": None, "median": None}
        return {"mean": float(np.mean(v)), "median": float(np.median(v))}

    def alpha_histogram(self, bins: int = 10) -> dict:
        counts, edges = np.histogram(self.wiener_alpha, bins=bins, range=(0.0, 1.0))
        return {"edges": edges.tolist(), "counts": counts.tolist()}

    def to_dict(self) -> dict:
        quasi = self.rms_quasi.size > 0
        return {
            "case": self.case,
            "trials": self.trials,
            "seed": self.seed,
            "alpha": self.alpha,
            "alpha_mode": self.alpha_mode,
            "rms": {
                "lse": self.summary("lse"),
                "wiener_oracle": self.summary("wiener"),
                "quasi_optimal": self.summary("quasi"),
            },
            "wiener_alpha": {
                "median": float(np.median(self.wiener_alpha)),
                "fraction_above_0.5": float(np.mean(self.wiener_alpha > 0.5)),
                "fraction_above_0.7": float(np.mean(self.wiener_alpha > 0.7)),
                "histogram": self.alpha_histogram(),
            },
            "fr_coverage": float(np.mean(self.fr_inside)) if quasi else None,
            "hf_fraction_max": float(np.max(self.hf_fraction)) if quasi else None,
            "peaks_kept": {
                "quasi": int(np.sum(self.peaks_quasi)) if quasi else None,
                "wiener": int(np.sum(self.peaks_wiener)),
            },
            "degenerate": self.degenerate,
        }


def monte_carlo(
    case: ModelCase,
    cfg: QoConfig = QoConfig(),
    trials: int = 100,
    seed: int = 0,
    alpha_mode: str = "fixed",
    quasi: bool = True,
    fr: FeasibilitySpec | None = None,
    refined: RefinedModel | None = None,
) -> McReport:
    """Repeat the three restorations over ``trials`` noise draws.

    Trial ``i`` uses the noise seed ``seed + i``.  With ``alpha_mode="fixed"``
    the quasi-optimal constraint sits at ``t_{1-cfg.alpha}``; with
    ``"matched"`` it is set to the oracle Wiener estimate's own misfit, so
    both filters work at the same significance level.  ``quasi=False`` skips
    the quasi-optimal solve (the Wiener diagnostics are cheap).
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if alpha_mode not in ("fixed", "matched"):
        raise ValueError(f"alpha_mode must be 'fixed' or 'matched', got {alpha_mode!r}")
    sm = whiten(case.gm)
    rm = decompose(sm) if refined is None else refined
    fr = FeasibilitySpec(0.05, 0.95, rm.n) if fr is None else fr
    p0 = principal_components(rm, case.x0)
    w_opt = wiener_weights(rm.lam, p0)

    out = {k: [] for k in ("lse", "wiener", "quasi", "alpha", "hf", "fr", "pk_q", "pk_w")}
    degenerate = 0
    for i in range(trials):
        y = case.image(seed + i)
        img = refine_image(rm, sm.whitener @ (y - case.gm.a))
        est = lse(rm, img)
        p_w = w_opt * est.p_star
        x_w = rm.V @ p_w
        out["lse"].append(rms(est.x_star, case.x0))
        out["wiener"].append(rms(x_w, case.x0))
        out["alpha"].append(implied_significance(misfit(rm, img, p_w), rm.n))
        out["pk_w"].append(peaks_resolved(x_w, case.peaks))
        if not quasi:
            continue
        target = misfit(rm, img, p_w) if alpha_mode == "matched" else None
        try:
            sol = solve(rm, img, est, cfg, target=target)
        except SolverError as exc:
            raise SolverError(f"trial {i} (seed {seed + i}): {exc}") from exc
        degenerate += sol.degenerate
        out["quasi"].append(rms(sol.x_tilde, case.x0))
        out["hf"].append(high_freq_fraction(sol.p_tilde))
        out["fr"].append(feasible(misfit(rm, img, sol.p_tilde), fr))
        out["pk_q"].append(peaks_resolved(sol.x_tilde, case.peaks))

    arr = {k: np.asarray(v, dtype=float) for k, v in out.items()}
    return McReport(
        case=case.name,
        trials=trials,
        seed=seed,
        alpha=cfg.alpha,
        alpha_mode=alpha_mode,
        rms_lse=arr["lse"],
        rms_wiener=arr["wiener"],
        rms_quasi=arr["quasi"],
        wiener_alpha=arr["alpha"],
        hf_fraction=arr["hf"],
        fr_inside=arr["fr"].astype(bool),
        peaks_quasi=arr["pk_q"].astype(bool),
        peaks_wiener=arr["pk_w"].astype(bool),
        degenerate=degenerate,
    )
