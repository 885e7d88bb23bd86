# tests/test_units.py

import math

import pytest

from src.core.exceptions import InvalidParameterError
from src.domain.entities.spin_system import NuclearState, SpinSystemParams
from src.domain.services.resonance import esr_frequency
from src.domain.services.units import (
    b1_from_nu1,
    b1_from_power,
    calibrate_b1,
    dbm_to_mw,
    lab_frame_b1,
    mw_to_dbm,
    nu1_from_b1,
)
from src.domain.value_objects.power_setting import PowerSetting


class TestPowerConversion:
    def test_zero_dbm_is_one_milliwatt(self):
        assert dbm_to_mw(0.0) == 1.0

    def test_thirty_db_is_factor_thousand(self):
        assert dbm_to_mw(-30.0) == pytest.approx(1e-3, rel=1e-12)

    def test_mw_to_dbm_inverts(self):
        for dbm in (-34.0, -25.0, 0.0, 7.5):
            assert mw_to_dbm(dbm_to_mw(dbm)) == pytest.approx(dbm, abs=1e-12)

    def test_non_positive_power_is_minus_infinity(self):
        assert mw_to_dbm(0.0) == -math.inf

    def test_nan_rejected(self):
        with pytest.raises(InvalidParameterError):
            dbm_to_mw(float('nan'))

    def test_delivered_power_subtracts_attenuation(self):
        p = PowerSetting(p_mw_dbm=5.0, attenuation_db=30.0)
        assert p.delivered_dbm == -25.0
        assert p.delivered_mw == pytest.approx(10 ** -2.5)
        assert p.label() == "5dBm"
        assert PowerSetting(p_mw_dbm=-4.0).label() == "-4dBm"


class TestDriveAmplitude:
    def test_nu1_for_measured_amplitudes(self):
        assert nu1_from_b1(8.8e-6) == pytest.approx(246.1e3, abs=0.1e3)
        assert nu1_from_b1(30e-6) == pytest.approx(839.1e3, abs=0.1e3)

    def test_b1_nu1_inverse(self):
        assert b1_from_nu1(nu1_from_b1(12.3e-6)) == pytest.approx(12.3e-6, rel=1e-14)

    def test_negative_b1_rejected(self):
        with pytest.raises(InvalidParameterError):
            nu1_from_b1(-1e-6)

    def test_calibration_round_trip(self):
        p = PowerSetting(p_mw_dbm=5.0)
        cal = calibrate_b1(p, 30e-6)
        assert b1_from_power(p, cal) == pytest.approx(30e-6, rel=1e-14)

    def test_b1_scales_with_sqrt_power(self):
        cal = 1e-3
        low = b1_from_power(PowerSetting(p_mw_dbm=0.0), cal)
        high = b1_from_power(PowerSetting(p_mw_dbm=20.0), cal)
        assert high / low == pytest.approx(10.0)

    def test_non_positive_calibration_rejected(self):
        with pytest.raises(InvalidParameterError):
            b1_from_power(PowerSetting(p_mw_dbm=0.0), 0.0)

    def test_lab_frame_is_twice_rotating_frame(self):
        assert lab_frame_b1(30e-6) == pytest.approx(60e-6)


class TestResonance:
    def test_hyperfine_pair(self):
        down = esr_frequency(SpinSystemParams(nuclear_state=NuclearState.DOWN))
        up = esr_frequency(SpinSystemParams(nuclear_state=NuclearState.UP))
        assert down == pytest.approx(36.3038e9, abs=1e5)
        assert up == pytest.approx(36.4182e9, abs=1e5)
        assert up - down == pytest.approx(114.4e6)

    def test_no_hyperfine_is_zeeman(self):
        assert esr_frequency(SpinSystemParams(a_hf=0.0)) == pytest.approx(27.97e9 * 1.3)
