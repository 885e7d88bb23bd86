# src/domain/entities/spin_system.py

import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, NonNegativeFloat, PositiveFloat, field_validator

from src.core.constants import A_HF_HZ, B0_T


class NuclearState(str, Enum):
    DOWN = "down"  # ⇓, lower ESR line
    UP = "up"  # ⇑, upper ESR line


class SpinSystemParams(BaseModel):
    """Static field, hyperfine coupling, drive strength and coherence time of the donor electron"""

    model_config = ConfigDict(frozen=True)

    b0: PositiveFloat = B0_T  # T
    a_hf: NonNegativeFloat = A_HF_HZ  # Hz
    nuclear_state: NuclearState = NuclearState.DOWN
    nu1: NonNegativeFloat = 0.0  # Hz, drive coupling (Rabi frequency is 2*nu1)
    t2: float = math.inf  # s, inf disables dephasing

    @field_validator('t2')
    @classmethod
    def _positive_t2(cls, value: float) -> float:
        if math.isnan(value) or value <= 0:
            raise ValueError(f"t2 must be positive or infinite, got {value}")
        return value

    @field_validator('nu1', 'a_hf', 'b0')
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("spin parameters must be finite")
        return value

    @property
    def coherent(self) -> bool:
        return math.isinf(self.t2)
