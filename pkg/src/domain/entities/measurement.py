# src/domain/entities/measurement.py

from typing import List

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator

from src.domain.value_objects.power_setting import PowerSetting

MIN_DATASET_POINTS = 5


class MeasuredPoint(BaseModel):
    """Spin-up fraction measured after one sweep duration"""

    model_config = ConfigDict(frozen=True)

    sweep_time: PositiveFloat  # s
    r_up: float = Field(ge=0.0, le=1.0)
    shots: int = Field(ge=1)

    @property
    def up_counts(self) -> int:
        return int(round(self.r_up * self.shots))


class SweepDataset(BaseModel):
    """R_up vs sweep time at one microwave power"""

    model_config = ConfigDict(frozen=True)

    power: PowerSetting
    points: List[MeasuredPoint]
    protocol_span: PositiveFloat  # Hz
    center_offset: float = 0.0  # Hz

    @model_validator(mode='after')
    def _enough_distinct_points(self) -> 'SweepDataset':
        if len(self.points) < MIN_DATASET_POINTS:
            raise ValueError(f"a sweep dataset needs at least {MIN_DATASET_POINTS} points, got {len(self.points)}")
        times = [p.sweep_time for p in self.points]
        if len(set(times)) != len(times):
            raise ValueError("sweep times within a dataset must be distinct")
        return self

    @property
    def sweep_times(self) -> List[float]:
        return [p.sweep_time for p in self.points]

    @property
    def r_up(self) -> List[float]:
        return [p.r_up for p in self.points]

    @property
    def shots(self) -> List[int]:
        return [p.shots for p in self.points]
