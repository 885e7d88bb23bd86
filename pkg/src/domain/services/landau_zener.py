# src/domain/services/landau_zener.py
"""
Closed-form Landau-Zener results for a linear chirp through resonance.

P_D = exp(-4 pi^2 nu1^2 / rate) is the probability of a diabatic passage,
i.e. of the spin NOT following the instantaneous eigenstate. The chirp is
assumed infinitely long; finite-span effects are left to the dynamics
module.
"""

import math
from dataclasses import dataclass

import numpy as np

from src.core.exceptions import InvalidParameterError

FOUR_PI_SQUARED = 4.0 * math.pi ** 2


@dataclass(frozen=True)
class LzPoint:
    nu1: float  # Hz
    rate: float  # Hz/s
    p_diabatic: float

    def __post_init__(self):
        if not 0.0 <= self.p_diabatic <= 1.0:
            raise ValueError(f"p_diabatic must be a probability, got {self.p_diabatic}")

    @property
    def p_up(self) -> float:
        return 1.0 - self.p_diabatic


def _check(nu1: float, rate: float) -> None:
    if not rate > 0:
        raise InvalidParameterError(f"sweep rate must be positive, got {rate}")
    if nu1 < 0 or math.isnan(nu1):
        raise InvalidParameterError(f"nu1 must be non-negative, got {nu1}")


def adiabaticity(nu1: float, rate: float) -> float:
    """Exponent magnitude 4 pi^2 nu1^2 / rate"""
    _check(nu1, rate)
    return FOUR_PI_SQUARED * nu1 ** 2 / rate


def landau_zener_pd(nu1: float, rate: float) -> float:
    return math.exp(-adiabaticity(nu1, rate))


def inversion_prob_coherent(nu1: float, rate: float) -> float:
    return 1.0 - landau_zener_pd(nu1, rate)


def lz_point(nu1: float, rate: float) -> LzPoint:
    return LzPoint(nu1=nu1, rate=rate, p_diabatic=landau_zener_pd(nu1, rate))


def sweep_time_for_up_prob(p: float, nu1: float, span: float) -> float:
    """
    Sweep duration over `span` that leaves a |down> spin up with probability p.

    p = 0.5 gives the pi/2 sweep.
    """
    if not 0.0 < p < 1.0:
        raise InvalidParameterError(f"target probability must lie in (0, 1), got {p}")
    if not nu1 > 0:
        raise InvalidParameterError("nu1 must be positive: without coupling no sweep time inverts the spin")
    if not span > 0:
        raise InvalidParameterError(f"span must be positive, got {span}")
    return -span * math.log1p(-p) / (FOUR_PI_SQUARED * nu1 ** 2)


def lz_up_curve(nu1: float, span: float, sweep_times) -> np.ndarray:
    """1 - P_D for each sweep duration in `sweep_times` (vectorized)"""
    times = np.asarray(sweep_times, dtype=float)
    if np.any(times <= 0):
        raise InvalidParameterError("sweep times must be positive")
    if nu1 < 0:
        raise InvalidParameterError(f"nu1 must be non-negative, got {nu1}")
    rates = span / times
    return -np.expm1(-FOUR_PI_SQUARED * nu1 ** 2 / rates)
