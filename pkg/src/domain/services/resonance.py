# src/domain/services/resonance.py
"""Spin resonance frequency and the instantaneous detuning of a chirp"""

from src.core.exceptions import InvalidParameterError
from src.domain.entities.spin_system import NuclearState, SpinSystemParams
from src.domain.entities.sweep_protocol import SweepDirection, SweepProtocol
from src.domain.value_objects.phys_constants import PhysConstants

# relative slack at the window edges for times produced by float arithmetic
_WINDOW_SLACK = 1e-12


def esr_frequency(p: SpinSystemParams, c: PhysConstants = PhysConstants()) -> float:
    """Electron resonance: gamma_e*B0 -/+ A/2 for nuclear state down/up"""
    zeeman = c.gamma_e * p.b0
    if p.nuclear_state == NuclearState.DOWN:
        return zeeman - 0.5 * p.a_hf
    return zeeman + 0.5 * p.a_hf


def sweep_detuning(t: float, span: float, rate: float, offset: float, up: bool) -> float:
    """Unchecked detuning; the chirp part is negated exactly for downward sweeps"""
    chirp = rate * t - 0.5 * span
    return (chirp if up else -chirp) + offset


def detuning_at(t: float, s: SweepProtocol) -> float:
    if t < -_WINDOW_SLACK * s.duration or t > s.duration * (1.0 + _WINDOW_SLACK):
        raise InvalidParameterError(f"t = {t:.6e} s outside the sweep window [0, {s.duration:.6e}]")
    return sweep_detuning(t, s.span, s.sweep_rate(), s.center_offset, s.direction == SweepDirection.UP)
