# src/domain/services/readout.py
"""
Single-shot readout: ideal spin-up probability <-> measured spin-up fraction.

    R_up = F_up * [p + (1 - p) * P_upI]
"""

import math
from typing import NamedTuple

from src.core.exceptions import InvalidParameterError
from src.core.random import SeedLike, as_rng
from src.domain.entities.measurement import MeasuredPoint
from src.domain.entities.readout_model import ReadoutModel


class CorrectedFraction(NamedTuple):
    p_up: float
    clamped: bool


def _check_probability(name: str, value: float) -> None:
    if math.isnan(value) or not 0.0 <= value <= 1.0:
        raise InvalidParameterError(f"{name} must lie in [0, 1], got {value}")


def observe(p_up: float, m: ReadoutModel) -> float:
    """Expected measured fraction for an ideal spin-up probability"""
    _check_probability("p_up", p_up)
    return m.f_up * (p_up + (1.0 - p_up) * m.p_up_i)


def correct(r_up: float, m: ReadoutModel) -> CorrectedFraction:
    """Invert observe(); values outside the reachable range are clamped and flagged"""
    _check_probability("r_up", r_up)
    if m.f_up == 0.0 or m.p_up_i == 1.0:
        raise InvalidParameterError("readout model is degenerate (f_up = 0 or p_up_i = 1)")
    p_up = (r_up / m.f_up - m.p_up_i) / (1.0 - m.p_up_i)
    if p_up < 0.0:
        return CorrectedFraction(0.0, True)
    if p_up > 1.0:
        return CorrectedFraction(1.0, True)
    return CorrectedFraction(p_up, False)


def synthesize_shots(p_up: float, m: ReadoutModel, seed: SeedLike, sweep_time: float = 1e-6) -> MeasuredPoint:
    """Binomial draw of m.shots single-shot outcomes at the observed spin-up rate"""
    rng = as_rng(seed)
    counts = int(rng.binomial(m.shots, observe(p_up, m)))
    return MeasuredPoint(sweep_time=sweep_time, r_up=counts / m.shots, shots=m.shots)
