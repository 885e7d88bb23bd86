# src/domain/entities/evolution.py

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, PositiveFloat

from src.domain.value_objects.density_matrix import DensityMatrix2


class IntegrationMethod(str, Enum):
    ADAPTIVE = "adaptive"  # embedded RK with error control (scipy solve_ivp)
    FIXED = "fixed"  # Dormand-Prince 5(4) at a constant step of max_step


class DephasingConvention(str, Enum):
    DOUBLED = "paper"  # operator as written: coherences decay at 2/T2
    CONVENTIONAL = "conventional"  # coherences decay at 1/T2


class EvolutionSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: IntegrationMethod = IntegrationMethod.ADAPTIVE
    adaptive_scheme: str = "DOP853"
    rel_tol: PositiveFloat = 1e-8
    abs_tol: PositiveFloat = 1e-10
    max_step: Optional[PositiveFloat] = None  # s; None -> duration * max_step_fraction
    max_step_fraction: PositiveFloat = 1e-3
    store_trajectory: bool = False
    dephasing_convention: DephasingConvention = DephasingConvention.DOUBLED
    # invariant checks on integrated states; a breach is a NumericalInstabilityError
    trace_tol: PositiveFloat = 1e-9
    hermitian_tol: PositiveFloat = 1e-10
    positivity_tol: PositiveFloat = 1e-8

    def step_limit(self, duration: float) -> float:
        if self.max_step is not None:
            return min(self.max_step, duration)
        return duration * self.max_step_fraction


TRAJECTORY_COLUMNS = ['time_s', 'rho00_re', 'rho01_re', 'rho01_im', 'rho11_re', 'p_up']


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: List[DensityMatrix2]
    p_up: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.states) or len(self.times) != len(self.p_up):
            raise ValueError("trajectory arrays must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    @property
    def final(self) -> DensityMatrix2:
        return self.states[-1]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'time_s': self.times,
            'rho00_re': [s.entries[0, 0].real for s in self.states],
            'rho01_re': [s.entries[0, 1].real for s in self.states],
            'rho01_im': [s.entries[0, 1].imag for s in self.states],
            'rho11_re': [s.entries[1, 1].real for s in self.states],
            'p_up': self.p_up,
        }, columns=TRAJECTORY_COLUMNS)
