import math

import numpy as np
import pytest

from qofilter.linalg import LinAlgError
from qofilter.model import decompose, whiten
from qofilter.quasiopt import QoConfig, restore
from qofilter.simulation import (
    NoiseSpec,
    PsfSpec,
    build_convolution_matrix,
    gaussian_psf,
    high_freq_fraction,
    make_case,
    model_case_low_freq,
    model_case_sharp_smooth,
    monte_carlo,
    peaks_resolved,
    rms,
    sinc2_psf,
)


def test_sinc2_values():
    assert sinc2_psf(9.0, 0.0) == pytest.approx(1 / 9)
    assert abs(sinc2_psf(9.0, 9.0)) < 1e-32
    assert sinc2_psf(9.0, 4.5) == pytest.approx(4 / (math.pi**2 * 9))
    with pytest.raises(ValueError):
        sinc2_psf(0.0, 1.0)


def test_gaussian_values():
    assert gaussian_psf(3.0, 0.0) == 1.0
    assert gaussian_psf(3.0, 3.0) == pytest.approx(math.exp(-0.5))
    lags = np.linspace(-10, 10, 41)
    assert np.array_equal(gaussian_psf(2.5, lags), gaussian_psf(2.5, -lags))


def test_psf_spec_defaults_and_validation():
    assert PsfSpec("sinc2", R=9.0).support_halfwidth == 45
    assert PsfSpec("gaussian", sigma_psf=3.0).support_halfwidth == 15
    with pytest.raises(ValueError):
        PsfSpec("sinc2")
    with pytest.raises(ValueError):
        PsfSpec("airy", R=1.0)
    with pytest.raises(ValueError):
        PsfSpec("custom", kernel=lambda l: l)


def test_delta_psf_gives_identity():
    psf = PsfSpec("custom", kernel=lambda l: np.ones_like(l), support_halfwidth=0)
    assert np.array_equal(build_convolution_matrix(psf, 6, 6), np.eye(6))
    H = build_convolution_matrix(psf, 4, 8, normalize="kernel")
    assert np.array_equal(H[2:6], np.eye(4)) and not H[:2].any() and not H[6:].any()


def test_rows_sum_to_one():
    H = build_convolution_matrix(PsfSpec("sinc2", R=9.0), 64, 64)
    assert np.max(np.abs(H.sum(1) - 1)) < 1e-12


def test_rows_mode_needs_support_in_every_row():
    with pytest.raises(LinAlgError, match="no support"):
        build_convolution_matrix(PsfSpec("gaussian", sigma_psf=1.0, support_halfwidth=2), 4, 20)


def test_sinc2_matrix_against_kernel_sampling():
    n = m = 128
    H = build_convolution_matrix(PsfSpec("sinc2", R=9.0), n, m)
    kernel = np.array([np.sinc(l / 9) ** 2 / 9 for l in range(-45, 46)])
    row = H[64]
    assert np.argmax(row) == 64
    assert np.allclose(row[64 - 45 : 64 + 46], kernel / kernel.sum(), rtol=1e-12)
    # interior rows are shifts of one another
    assert np.allclose(H[60, 15:106], H[61, 16:107])


def test_kernel_normalized_matrix_is_full_convolution(rng):
    psf = PsfSpec("gaussian", sigma_psf=3.0)
    n = 40
    H = build_convolution_matrix(psf, n, n + 30, normalize="kernel")
    k = np.exp(-0.5 * (np.arange(-15, 16) / 3.0) ** 2)
    x = rng.normal(size=n)
    assert np.allclose(H @ x, np.convolve(x, k / k.sum(), mode="full"))


def test_empty_support_rejected():
    psf = PsfSpec("custom", kernel=lambda l: np.zeros_like(l), support_halfwidth=3)
    with pytest.raises(LinAlgError, match="empty support"):
        build_convolution_matrix(psf, 5, 5)


def test_square_row_normalized_sinc2_is_rank_deficient():
    # why the bundled cases use the full-convolution geometry instead
    H = build_convolution_matrix(PsfSpec("sinc2", R=9.0), 128, 128)
    from qofilter.model import GeneralModel

    with pytest.raises(LinAlgError, match="rank-deficient"):
        decompose(whiten(GeneralModel.white(H, 100.0)))


def test_low_freq_case():
    c = model_case_low_freq(129)
    assert c.x0.max() == pytest.approx(1000.0) and np.argmax(c.x0) == 64
    assert abs(c.x0[0]) < 1e-9 and abs(c.x0[-1]) < 1e-9
    c = model_case_low_freq()
    assert (c.n, c.m) == (128, 218)
    k = sinc2_psf(9.0, np.arange(-45, 46))
    blurred = np.convolve(c.x0, k / k.sum())
    assert np.allclose(c.gm.H @ c.x0, blurred)
    assert blurred.max() < 1000
    with pytest.raises(ValueError):
        model_case_low_freq(16)


def test_sharp_smooth_case():
    c = model_case_sharp_smooth()
    assert np.sum(c.x0 > 900) == 2
    assert c.peaks == (76, 89)
    smooth = c.x0.copy()
    smooth[list(c.peaks)] -= 1000
    assert np.max(np.abs(np.diff(smooth, 2))) <= 4 * 800 / (c.n / 8) ** 2
    image = c.gm.H @ c.x0
    off = (c.m - c.n) // 2
    for k in c.peaks:
        assert image[k + off] < c.x0[k]
    with pytest.raises(ValueError):
        model_case_sharp_smooth(32)
    with pytest.raises(ValueError):
        make_case("nope")


def test_case_images_are_seeded():
    c = make_case("lowfreq", 64)
    assert np.array_equal(c.image(3), c.image(3))
    assert not np.array_equal(c.image(3), c.image(4))


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(0.0, -1.0)


def test_helpers():
    assert rms([1.0, 3.0], [1.0, 1.0]) == pytest.approx(math.sqrt(2))
    assert high_freq_fraction(np.zeros(8)) == 0
    assert high_freq_fraction([1, 0, 0, 0, 0, 0, 0, 1]) == pytest.approx(0.5)
    assert peaks_resolved([0, 2, 0, 3, 1], (1, 3))
    assert not peaks_resolved([0, 2, 2, 3, 1], (1, 3))
    assert not peaks_resolved([5, 2, 0], (0,))


def test_noise_free_restore_recovers_object():
    c = model_case_low_freq(sigma_g=0.0)
    sol, _ = restore(c.gm, c.gm.H @ c.x0, QoConfig(alpha=0.999))
    assert rms(sol.x_tilde, c.x0) <= 0.01 * 1000


def test_monte_carlo_noise_free_lse():
    c = model_case_low_freq(64, sigma_g=0.0)
    r = monte_carlo(c, trials=1, seed=0)
    # the zero-noise LSE is limited only by the conditioning of H
    assert r.rms_lse[0] < 1e-3


def test_monte_carlo_report_is_reproducible():
    c = make_case("sharp-smooth", 64)
    a = monte_carlo(c, trials=3, seed=9).to_dict()
    b = monte_carlo(c, trials=3, seed=9).to_dict()
    assert a == b
    assert set(a["rms"]) == {"lse", "wiener_oracle", "quasi_optimal"}
    assert sum(a["wiener_alpha"]["histogram"]["counts"]) == 3


def test_monte_carlo_small_ordering():
    c = make_case("lowfreq", 64)
    r = monte_carlo(c, trials=5, seed=1, alpha_mode="matched")
    assert np.median(r.rms_quasi) < np.median(r.rms_lse)
    assert np.median(r.rms_wiener) < np.median(r.rms_lse)


def test_monte_carlo_without_quasi():
    r = monte_carlo(make_case("lowfreq", 64), trials=4, quasi=False)
    d = r.to_dict()
    assert r.rms_quasi.size == 0 and d["rms"]["quasi_optimal"]["median"] is None
    assert d["fr_coverage"] is None


def test_monte_carlo_argument_checks():
    c = make_case("lowfreq", 64)
    with pytest.raises(ValueError):
        monte_carlo(c, trials=0)
    with pytest.raises(ValueError):
        monte_carlo(c, trials=1, alpha_mode="adaptive")
