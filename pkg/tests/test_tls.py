import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlb.constants import HBAR, K_B
from qlb.errors import DatasetError, InvalidInputError
from qlb.tls import QPoint, TlsParams, fit_tls, photon_number, q_tls, rescale_q_tls0
from qlb.uncert import UValue

F0 = 5e9
TRUE = TlsParams(UValue(1.2e6), D=2.0e4, beta1=1.0, beta2=0.8, q_other=6.0e6, f0=F0)


def grid_points(params, noise=0.0, seed=0, temps=(0.010, 0.025, 0.050, 0.090),
                n_decades=(0.1, 1e5), n_per_temp=10):
    rng = np.random.default_rng(seed)
    pts = []
    for T in temps:
        for n in np.geomspace(*n_decades, n_per_temp):
            inv_q = 1.0 / q_tls(n, T, params) + 1.0 / params.q_other
            if noise:
                inv_q *= 1.0 + rng.normal(0.0, noise)
            q = 1.0 / inv_q
            pts.append(QPoint(n, T, UValue(q, max(noise, 1e-4) * q)))
    return pts


class TestModel:
    def test_unsaturated_limit_closed_form(self):
        # n_bar = 0: Q_TLS = Q_TLS0 / tanh(hbar w / 2 kB T) exactly
        for T in (0.010, 0.050, 0.100):
            th = math.tanh(HBAR * 2 * math.pi * F0 / (2 * K_B * T))
            assert q_tls(0.0, T, TRUE) == pytest.approx(
                TRUE.q_tls0.value / th, rel=1e-12
            )

    def test_low_temperature_limit(self):
        # tanh -> 1 as T -> 0, so Q_TLS(0, T) -> Q_TLS0
        assert q_tls(0.0, 1e-3, TRUE) == pytest.approx(TRUE.q_tls0.value, rel=1e-12)

    def test_monotone_in_photon_number(self):
        n = np.geomspace(1e-3, 1e7, 100)
        q = np.array([q_tls(x, 0.025, TRUE) for x in n])
        assert np.all(np.diff(q) > 0)

    @settings(max_examples=30)
    @given(st.floats(0.005, 0.11), st.floats(0.01, 1e6))
    def test_saturation_never_below_linear_limit(self, T, n):
        assert q_tls(n, T, TRUE) >= q_tls(0.0, T, TRUE) - 1e-9

    def test_input_validation(self):
        with pytest.raises(InvalidInputError):
            q_tls(1.0, -0.01, TRUE)
        with pytest.raises(InvalidInputError):
            q_tls(-1.0, 0.01, TRUE)
        with pytest.raises(InvalidInputError):
            TlsParams(UValue(-1e6), f0=F0)
        with pytest.raises(InvalidInputError):
            QPoint(1.0, 0.01, UValue(-1.0, 0.0))


class TestRescale:
    def test_relative_sigma_preserved(self):
        params = TlsParams(UValue(1.2e6, 0.1e6), D=2e4, beta1=1.0, beta2=0.8,
                           q_other=6e6, f0=F0)
        out = rescale_q_tls0(params, 1.0, 0.010)
        assert out.sigma / out.value == pytest.approx(
            params.q_tls0.sigma / params.q_tls0.value, rel=1e-12
        )
        assert out.value == pytest.approx(q_tls(1.0, 0.010, params), rel=1e-12)

    def test_rescale_at_linear_point_is_near_identity(self):
        params = TlsParams(UValue(1e6, 1e4), D=1e6, beta1=1.0, beta2=1.0,
                           q_other=1e9, f0=F0)
        out = rescale_q_tls0(params, 1e-6, 0.001)
        assert out.value == pytest.approx(1e6, rel=1e-6)


class TestFit:
    def test_noiseless_round_trip(self):
        params, cov = fit_tls(grid_points(TRUE), f0=F0)
        assert params.q_tls0.value == pytest.approx(TRUE.q_tls0.value, rel=1e-3)
        assert params.D == pytest.approx(TRUE.D, rel=1e-3)
        assert params.beta1 == pytest.approx(TRUE.beta1, rel=1e-3)
        assert params.beta2 == pytest.approx(TRUE.beta2, rel=1e-3)
        assert params.q_other == pytest.approx(TRUE.q_other, rel=1e-3)
        assert cov.shape == (5, 5)

    def test_quasiparticle_points_excluded(self):
        pts = grid_points(TRUE) + [
            # junk points in the quasiparticle regime must not bias the fit
            QPoint(n, 0.200, UValue(1e4, 100.0)) for n in (1.0, 10.0, 100.0)
        ]
        params, _ = fit_tls(pts, f0=F0)
        assert params.q_tls0.value == pytest.approx(TRUE.q_tls0.value, rel=1e-3)

    def test_too_few_cold_points(self):
        pts = [QPoint(10 ** k, 0.150, UValue(1e6, 1e4)) for k in range(6)]
        with pytest.raises(DatasetError):
            fit_tls(pts, f0=F0)

    def test_requires_two_decades(self):
        pts = [QPoint(1.0 + 0.1 * k, 0.010, UValue(1e6, 1e4)) for k in range(8)]
        with pytest.raises(DatasetError):
            fit_tls(pts, f0=F0)

    def test_noisy_fit_sigma_is_meaningful(self):
        params, _ = fit_tls(grid_points(TRUE, noise=0.01, seed=11), f0=F0)
        pull = abs(params.q_tls0.value - TRUE.q_tls0.value) / params.q_tls0.sigma
        assert params.q_tls0.sigma > 0
        assert pull < 5.0


def test_photon_number_closed_form():
    # n = 2 Ql^2 P / (Qc hbar w^2)
    omega = 2 * math.pi * F0
    expected = 2 * 1e5 ** 2 * 1e-15 / (2e5 * HBAR * omega ** 2)
    assert photon_number(1e-15, F0, 1e5, 2e5) == pytest.approx(expected, rel=1e-12)
