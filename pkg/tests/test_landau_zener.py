# tests/test_landau_zener.py

import math

import numpy as np
import pytest

from src.core.exceptions import InvalidParameterError
from src.domain.services.landau_zener import (
    adiabaticity,
    inversion_prob_coherent,
    landau_zener_pd,
    lz_point,
    lz_up_curve,
    sweep_time_for_up_prob,
)
from src.domain.services.units import nu1_from_b1

SPAN = 25e6


def test_half_inversion_point():
    assert inversion_prob_coherent(242e3, 3.333e12) == pytest.approx(0.500, abs=1e-3)


def test_fast_sweep_at_high_power_is_adiabatic():
    assert landau_zener_pd(839.1e3, SPAN / 6e-6) < 2e-3


def test_no_drive_means_no_inversion():
    assert inversion_prob_coherent(0.0, 1e12) == 0.0


def test_pd_decreases_with_drive():
    rate = 1e12
    values = [landau_zener_pd(nu1, rate) for nu1 in (50e3, 100e3, 200e3, 400e3)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_pd_increases_with_rate():
    values = [landau_zener_pd(300e3, rate) for rate in (1e11, 1e12, 1e13, 1e14)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_exponent():
    assert adiabaticity(1e5, 4 * math.pi ** 2 * 1e10) == pytest.approx(1.0)


def test_point_probabilities_sum_to_one():
    point = lz_point(300e3, 1e12)
    assert point.p_diabatic + point.p_up == pytest.approx(1.0)


@pytest.mark.parametrize("nu1, rate", [(1e5, 0.0), (1e5, -1e12), (-1.0, 1e12)])
def test_invalid_inputs(nu1, rate):
    with pytest.raises(InvalidParameterError):
        landau_zener_pd(nu1, rate)


class TestPiHalfSweep:
    def test_low_power(self):
        t = sweep_time_for_up_prob(0.5, nu1_from_b1(8.8e-6), SPAN)
        assert t == pytest.approx(7.25e-6, abs=0.05e-6)
        assert t == pytest.approx(7.5e-6, rel=0.15)

    def test_high_power(self):
        t = sweep_time_for_up_prob(0.5, nu1_from_b1(30e-6), SPAN)
        assert t == pytest.approx(0.623e-6, abs=0.002e-6)
        assert t == pytest.approx(0.6e-6, rel=0.15)

    def test_inverse_of_curve(self):
        nu1 = 400e3
        t = sweep_time_for_up_prob(0.9, nu1, SPAN)
        assert lz_up_curve(nu1, SPAN, [t])[0] == pytest.approx(0.9, abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 1.0, 1.5])
    def test_target_outside_open_interval(self, p):
        with pytest.raises(InvalidParameterError):
            sweep_time_for_up_prob(p, 400e3, SPAN)

    def test_needs_drive(self):
        with pytest.raises(InvalidParameterError):
            sweep_time_for_up_prob(0.5, 0.0, SPAN)


def test_curve_is_monotone_in_sweep_time():
    times = np.geomspace(1e-8, 5e-5, 50)
    curve = lz_up_curve(246.1e3, SPAN, times)
    assert np.all(np.diff(curve) > 0)
    assert curve[0] < 0.01
    assert curve[-1] > 0.99


def test_curve_matches_scalar_formula():
    times = [1e-6, 7.25e-6]
    expected = [inversion_prob_coherent(246.1e3, SPAN / t) for t in times]
    np.testing.assert_allclose(lz_up_curve(246.1e3, SPAN, times), expected, rtol=1e-12)
