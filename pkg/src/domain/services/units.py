# src/domain/services/units.py
"""
Unit conversions and the microwave power -> drive amplitude chain.

    source dBm --(line attenuation)--> delivered mW --(cal * sqrt)--> B1 --(gamma_e)--> nu1
"""

import math

from src.core.constants import LINEAR_POLARIZATION_FACTOR
from src.core.exceptions import InvalidParameterError
from src.domain.value_objects.phys_constants import PhysConstants
from src.domain.value_objects.power_setting import PowerSetting


def dbm_to_mw(p_dbm: float) -> float:
    if math.isnan(p_dbm) or math.isinf(p_dbm) and p_dbm > 0:
        raise InvalidParameterError(f"power must be finite, got {p_dbm}")
    return 10.0 ** (p_dbm / 10.0)


def mw_to_dbm(p_mw: float) -> float:
    if p_mw <= 0:
        return -math.inf
    return 10.0 * math.log10(p_mw)


def b1_from_power(p: PowerSetting, cal: float) -> float:
    """
    Rotating-frame drive amplitude (T) for a source power.

    `cal` is in Tesla per sqrt(delivered milliwatt); B1 scales with the
    square root of the delivered power.
    """
    if not cal > 0:
        raise InvalidParameterError(f"calibration must be positive, got {cal}")
    return cal * math.sqrt(p.delivered_mw)


def calibrate_b1(p: PowerSetting, b1: float) -> float:
    """Calibration constant (T/sqrt(mW)) that maps `p` onto the measured `b1`"""
    if not b1 > 0:
        raise InvalidParameterError(f"b1 must be positive to calibrate, got {b1}")
    return b1 / math.sqrt(p.delivered_mw)


def nu1_from_b1(b1: float, c: PhysConstants = PhysConstants()) -> float:
    """Drive coupling nu1 (Hz); the Rabi frequency is 2*nu1"""
    if b1 < 0 or math.isnan(b1):
        raise InvalidParameterError(f"b1 must be non-negative, got {b1}")
    return c.gamma_e * b1


def b1_from_nu1(nu1: float, c: PhysConstants = PhysConstants()) -> float:
    if nu1 < 0 or math.isnan(nu1):
        raise InvalidParameterError(f"nu1 must be non-negative, got {nu1}")
    return nu1 / c.gamma_e


def lab_frame_b1(b1: float) -> float:
    """Amplitude of the linearly polarized lab-frame field carrying rotating component `b1`"""
    return LINEAR_POLARIZATION_FACTOR * b1
