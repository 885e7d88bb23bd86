# src/domain/services/fidelity.py
"""
Inversion fidelity of resonant pulses, for comparison with chirped sweeps.
"""

import math

import numpy as np
from scipy import stats

from src.core.constants import FWHM_PER_SIGMA
from src.core.exceptions import InvalidParameterError


def inversion_fidelity_from_angle_fidelity(f_c: float) -> float:
    """
    Inversion fidelity of a pi pulse whose rotation angle is right with
    angle-control fidelity f_c: F_I = cos((1 - F_C) pi) / 2 + 1/2.
    """
    if math.isnan(f_c) or not 0.0 <= f_c <= 1.0:
        raise InvalidParameterError(f"angle control fidelity must lie in [0, 1], got {f_c}")
    return 0.5 * math.cos((1.0 - f_c) * math.pi) + 0.5


def pi_pulse_duration(nu1: float) -> float:
    """Resonant pi pulse length; the Rabi frequency is 2*nu1"""
    if not nu1 > 0:
        raise InvalidParameterError(f"nu1 must be positive, got {nu1}")
    return 1.0 / (4.0 * nu1)


def rabi_pulse_pup(nu1: float, detuning, duration: float):
    """Spin-up probability after a rectangular pulse at `detuning` (Rabi formula, no dephasing)"""
    if nu1 < 0 or duration < 0:
        raise InvalidParameterError("nu1 and duration must be non-negative")
    detuning = np.asarray(detuning, dtype=float)
    rabi = 2.0 * nu1
    generalized = np.sqrt(detuning ** 2 + rabi ** 2)
    with np.errstate(invalid='ignore', divide='ignore'):
        value = np.where(generalized > 0, (rabi / generalized) ** 2 * np.sin(math.pi * generalized * duration) ** 2,
                         0.0)
    return float(value) if value.ndim == 0 else value


def ensemble_rabi_pup(nu1: float, duration: float, linewidth_fwhm: float, center_offset: float = 0.0) -> float:
    """rabi_pulse_pup averaged over a Gaussian distribution of resonance offsets"""
    if linewidth_fwhm < 0:
        raise InvalidParameterError(f"linewidth must be non-negative, got {linewidth_fwhm}")
    if linewidth_fwhm == 0:
        return float(rabi_pulse_pup(nu1, center_offset, duration))
    distribution = stats.norm(loc=center_offset, scale=linewidth_fwhm / FWHM_PER_SIGMA)
    return float(distribution.expect(lambda d: rabi_pulse_pup(nu1, d, duration), limit=200))
