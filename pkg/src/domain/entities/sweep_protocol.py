# src/domain/entities/sweep_protocol.py

import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, PositiveFloat, field_validator


class SweepDirection(str, Enum):
    UP = "up"
    DOWN = "down"


class SweepProtocol(BaseModel):
    """
    Linear frequency chirp.

    Detuning (drive minus spin resonance) for an upward sweep:
        dnu(t) = -span/2 + (span/duration) * t + center_offset
    A downward sweep mirrors the chirp part around center_offset.
    """

    model_config = ConfigDict(frozen=True)

    span: PositiveFloat  # Hz
    duration: PositiveFloat  # s
    center_offset: float = 0.0  # Hz, sweep center minus resonance
    direction: SweepDirection = SweepDirection.UP

    @field_validator('span', 'duration', 'center_offset')
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("sweep parameters must be finite")
        return value

    def sweep_rate(self) -> float:
        """Magnitude of d(dnu)/dt in Hz/s"""
        return self.span / self.duration

    def with_duration(self, duration: float) -> 'SweepProtocol':
        return self.model_copy(update={'duration': duration})

    def reversed(self) -> 'SweepProtocol':
        direction = SweepDirection.DOWN if self.direction == SweepDirection.UP else SweepDirection.UP
        return self.model_copy(update={'direction': direction})
