# src/domain/entities/readout_model.py

from pydantic import BaseModel, ConfigDict, Field

from src.core.constants import BACKGROUND_FRACTION, F_UP, SHOTS_PER_POINT


class ReadoutModel(BaseModel):
    """
    Single-shot readout of the electron spin.

    f_up: probability that a spin-up electron is registered as up.
    p_up_i: probability of an up count without ESR excitation; the observable
        background (false-count) fraction is f_up * p_up_i.
    """

    model_config = ConfigDict(frozen=True)

    f_up: float = Field(default=F_UP, ge=0.0, le=1.0)
    p_up_i: float = Field(default=BACKGROUND_FRACTION / F_UP, ge=0.0, le=1.0)
    shots: int = Field(default=SHOTS_PER_POINT, ge=1)

    @classmethod
    def from_background(cls, f_up: float, background: float, shots: int = SHOTS_PER_POINT) -> 'ReadoutModel':
        """Build the model from the measured false-count fraction f_up * p_up_i"""
        if f_up <= 0:
            raise ValueError("f_up must be positive to derive p_up_i from the background")
        return cls(f_up=f_up, p_up_i=background / f_up, shots=shots)

    @property
    def background(self) -> float:
        return self.f_up * self.p_up_i
