# src/domain/value_objects/phys_constants.py

from pydantic import BaseModel, ConfigDict, PositiveFloat

from src.core.constants import GAMMA_E_HZ_PER_T


class PhysConstants(BaseModel):
    """Physical constants that may be overridden from configuration"""

    model_config = ConfigDict(frozen=True)

    gamma_e: PositiveFloat = GAMMA_E_HZ_PER_T  # Hz/T
