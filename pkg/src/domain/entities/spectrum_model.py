# src/domain/entities/spectrum_model.py

from enum import Enum
from typing import Tuple

from pydantic import BaseModel, ConfigDict, NonNegativeFloat, PositiveFloat, field_validator, model_validator

from src.core.constants import DRIFT_CORRELATION_MIN


class GaussianPeak(BaseModel):
    """Gaussian line; value at `center` equals `amplitude`"""

    model_config = ConfigDict(frozen=True)

    amplitude: NonNegativeFloat
    center: float  # Hz
    fwhm: PositiveFloat  # Hz


class BimodalModel(BaseModel):
    """Two Gaussian lines of equal width on a constant baseline"""

    model_config = ConfigDict(frozen=True)

    peaks: Tuple[GaussianPeak, GaussianPeak]
    baseline: float = 0.0

    @model_validator(mode='after')
    def _shared_width(self) -> 'BimodalModel':
        first, second = self.peaks
        if abs(first.fwhm - second.fwhm) > 1e-9 * max(first.fwhm, second.fwhm):
            raise ValueError("bimodal peaks must share one fwhm")
        return self

    @classmethod
    def symmetric(cls, center: float, splitting: float, fwhm: float, amplitude: float,
                  baseline: float = 0.0) -> 'BimodalModel':
        half = 0.5 * splitting
        return cls(
            peaks=(
                GaussianPeak(amplitude=amplitude, center=center - half, fwhm=fwhm),
                GaussianPeak(amplitude=amplitude, center=center + half, fwhm=fwhm),
            ),
            baseline=baseline,
        )

    @property
    def fwhm(self) -> float:
        return self.peaks[0].fwhm

    @property
    def splitting(self) -> float:
        return abs(self.peaks[1].center - self.peaks[0].center)

    @property
    def center(self) -> float:
        return 0.5 * (self.peaks[0].center + self.peaks[1].center)

    def canonical(self) -> 'BimodalModel':
        """Same spectrum with the lower-frequency peak first"""
        first, second = self.peaks
        if first.center <= second.center:
            return self
        return self.model_copy(update={'peaks': (second, first)})

    def shifted(self, offset: float) -> 'BimodalModel':
        peaks = tuple(p.model_copy(update={'center': p.center + offset}) for p in self.peaks)
        return self.model_copy(update={'peaks': peaks})


class DriftKind(str, Enum):
    ORNSTEIN_UHLENBECK = "ornstein-uhlenbeck"


class DriftProcess(BaseModel):
    """Slow drift of the resonance (Overhauser field of the 29Si bath)"""

    model_config = ConfigDict(frozen=True)

    kind: DriftKind = DriftKind.ORNSTEIN_UHLENBECK
    stddev: NonNegativeFloat  # Hz
    correlation_time: PositiveFloat = DRIFT_CORRELATION_MIN * 60.0  # s
    seed: int = 0

    @field_validator('seed')
    @classmethod
    def _non_negative_seed(cls, value: int) -> int:
        if value < 0:
            raise ValueError("seed must be non-negative")
        return value
