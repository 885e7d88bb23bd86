# src/core/config.py

import hashlib
import json
import math
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import numpy as np
from dotenv import dotenv_values
from pydantic import Field, PositiveFloat, PositiveInt, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.core import constants
from src.core.exceptions import ConfigurationError
from src.domain.entities.evolution import DephasingConvention, EvolutionSettings, IntegrationMethod
from src.domain.entities.readout_model import ReadoutModel
from src.domain.entities.spectrum_model import DriftProcess
from src.domain.entities.spin_system import SpinSystemParams
from src.domain.services.spectrum import drift_stddev_for_envelope, drift_window_factor
from src.domain.services.units import b1_from_power, calibrate_b1
from src.domain.value_objects.phys_constants import PhysConstants
from src.domain.value_objects.power_setting import PowerSetting

ENV_PREFIX = "ADINV_"
NON_RESULT_FIELDS = {'output_dir', 'debug', 'workers'}
DEFAULT_CALIBRATION = calibrate_b1(PowerSetting(p_mw_dbm=5.0), constants.B1_BY_POWER_DBM[5.0])


class Settings(BaseSettings):
    """
    Run configuration.

    Precedence: defaults < ADINV_* environment < --config file < CLI flags.
    """

    model_config = SettingsConfigDict(env_prefix=ENV_PREFIX, extra='forbid', validate_default=True)

    # Physics
    gamma_e: PositiveFloat = constants.GAMMA_E_HZ_PER_T
    b0: PositiveFloat = constants.B0_T
    a_hf: float = Field(default=constants.A_HF_HZ, ge=0.0)
    t2: PositiveFloat = constants.T2_S
    span: PositiveFloat = constants.SWEEP_SPAN_HZ
    attenuation_db: float = Field(default=constants.LINE_ATTENUATION_DB, ge=0.0)
    b1_calibration: PositiveFloat = DEFAULT_CALIBRATION  # T / sqrt(mW delivered)

    # Readout
    f_up: float = Field(default=constants.F_UP, gt=0.0, le=1.0)
    background: float = Field(default=constants.BACKGROUND_FRACTION, ge=0.0, lt=1.0)
    shots: PositiveInt = constants.SHOTS_PER_POINT

    # Integrator
    integrator: IntegrationMethod = IntegrationMethod.ADAPTIVE
    adaptive_scheme: str = "DOP853"
    rel_tol: PositiveFloat = 1e-8
    abs_tol: PositiveFloat = 1e-10
    max_step_fraction: PositiveFloat = 1e-3
    dephasing_convention: DephasingConvention = DephasingConvention.DOUBLED

    # Spectrum synthesis
    peak_fwhm: PositiveFloat = constants.PEAK_FWHM_HZ
    line_splitting: float = Field(default=constants.LINE_SPLITTING_HZ, ge=0.0)
    snapshot_fwhm: PositiveFloat = constants.SNAPSHOT_FWHM_HZ
    drift_correlation_min: PositiveFloat = constants.DRIFT_CORRELATION_MIN
    n_spectra: PositiveInt = constants.N_SPECTRA
    acquisition_minutes: PositiveFloat = constants.ACQUISITION_MINUTES
    freq_half_range: PositiveFloat = 25e6
    freq_points: int = Field(default=201, ge=8)

    # Fitting
    max_iterations: PositiveInt = 200
    workers: PositiveInt = 1

    # Application
    seed: int = Field(default=0, ge=0)
    output_dir: Path = Path("output")
    debug: bool = False

    def fingerprint(self) -> str:
        """SHA-256 of the canonical JSON form of every field that can change a result"""
        values = self.model_dump(mode='json', exclude=NON_RESULT_FIELDS)
        canonical = json.dumps(values, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def physical_constants(self) -> PhysConstants:
        return PhysConstants(gamma_e=self.gamma_e)

    def spin_params(self, nu1: float = 0.0, t2: Optional[float] = None) -> SpinSystemParams:
        return SpinSystemParams(b0=self.b0, a_hf=self.a_hf, nu1=nu1, t2=self.t2 if t2 is None else t2)

    def readout_model(self) -> ReadoutModel:
        return ReadoutModel.from_background(self.f_up, self.background, self.shots)

    def evolution_settings(self, store_trajectory: bool = False) -> EvolutionSettings:
        return EvolutionSettings(
            method=self.integrator,
            adaptive_scheme=self.adaptive_scheme,
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            max_step_fraction=self.max_step_fraction,
            dephasing_convention=self.dephasing_convention,
            store_trajectory=store_trajectory,
        )

    def power(self, p_mw_dbm: float) -> PowerSetting:
        return PowerSetting(p_mw_dbm=p_mw_dbm, attenuation_db=self.attenuation_db)

    def b1_for_power(self, p_mw_dbm: float) -> float:
        """Measured B1 where one is known for this source power, else the calibration law"""
        measured = constants.B1_BY_POWER_DBM.get(float(p_mw_dbm))
        if measured is not None and self.attenuation_db == constants.LINE_ATTENUATION_DB:
            return measured
        return b1_from_power(self.power(p_mw_dbm), self.b1_calibration)

    def drift_process(self) -> DriftProcess:
        """OU drift whose spread over the acquisition window matches the peak width"""
        correlation_time = self.drift_correlation_min * 60.0
        window = drift_window_factor(self.n_spectra, self.acquisition_minutes * 60.0 / self.n_spectra,
                                     correlation_time)
        return DriftProcess(
            stddev=drift_stddev_for_envelope(self.peak_fwhm, self.snapshot_fwhm) / math.sqrt(window),
            correlation_time=correlation_time,
            seed=self.seed,
        )

    def freq_grid(self) -> np.ndarray:
        return np.linspace(-self.freq_half_range, self.freq_half_range, self.freq_points)


def read_config_file(path: Path) -> Dict[str, str]:
    """Flat KEY=value file; keys are matched case-insensitively against Settings fields"""
    if not Path(path).is_file():
        raise ConfigurationError(f"config file not found: {path}")
    values = {key.strip().lower(): value for key, value in dotenv_values(path).items()}
    unknown = sorted(set(values) - set(Settings.model_fields))
    if unknown:
        raise ConfigurationError(f"unknown config keys in {path}: {', '.join(unknown)}")
    missing = [key for key, value in values.items() if value is None]
    if missing:
        raise ConfigurationError(f"config keys without value in {path}: {', '.join(missing)}")
    return values


def load_settings(config_path: Optional[Path] = None, overrides: Optional[Mapping[str, Any]] = None) -> Settings:
    values: Dict[str, Any] = {}
    if config_path is not None:
        values.update(read_config_file(config_path))
    values.update(overrides or {})
    try:
        return Settings(**values)
    except ValidationError as e:
        raise ConfigurationError(f"invalid configuration: {e}") from e
