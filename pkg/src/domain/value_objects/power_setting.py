# src/domain/value_objects/power_setting.py

import math

from pydantic import BaseModel, ConfigDict, NonNegativeFloat, field_validator

from src.core.constants import LINE_ATTENUATION_DB


class PowerSetting(BaseModel):
    """
    Microwave source power and the attenuation of the line to the device.

    The delivered power is what the B1 calibration refers to.
    """

    model_config = ConfigDict(frozen=True)

    p_mw_dbm: float
    attenuation_db: NonNegativeFloat = LINE_ATTENUATION_DB

    @field_validator('p_mw_dbm')
    @classmethod
    def _not_nan(cls, value: float) -> float:
        if math.isnan(value):
            raise ValueError("p_mw_dbm must not be NaN")
        return value

    @property
    def delivered_dbm(self) -> float:
        return self.p_mw_dbm - self.attenuation_db

    @property
    def delivered_mw(self) -> float:
        return 10.0 ** (self.delivered_dbm / 10.0)

    def label(self) -> str:
        return f"{self.p_mw_dbm:g}dBm"
