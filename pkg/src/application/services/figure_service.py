# src/application/services/figure_service.py
"""
Tables behind the sweep figures: Landau-Zener curve, the three-model
comparison at one microwave power with synthetic shot data, and the
robustness of sweeps vs resonant pulses to line broadening.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Sequence

import numpy as np
import pandas as pd
import structlog

from src.application.services.estimation_service import compose_readout
from src.core.exceptions import InvalidParameterError
from src.core.random import make_rng
from src.domain.entities.evolution import DephasingConvention, EvolutionSettings
from src.domain.entities.readout_model import ReadoutModel
from src.domain.entities.spin_system import SpinSystemParams
from src.domain.entities.sweep_protocol import SweepProtocol
from src.domain.services.dynamics import ensemble_sweep_pup, optimal_sweep_time, simulate_sweep_series
from src.domain.services.fidelity import ensemble_rabi_pup, pi_pulse_duration
from src.domain.services.landau_zener import lz_up_curve, sweep_time_for_up_prob
from src.domain.services.readout import synthesize_shots
from src.domain.services.units import lab_frame_b1
from src.domain.value_objects.power_setting import PowerSetting

log = structlog.get_logger(__name__)

CURVE_COLUMNS = ['sweep_time_s', 'black', 'gray', 'red']
SHOT_COLUMNS = ['sweep_time_s', 'r_up', 'shots', 'power_dbm']
ROBUSTNESS_COLUMNS = ['linewidth_hz', 'sweep_p_up', 'pi_pulse_p_up']


@dataclass(frozen=True)
class SweepFigure:
    curves: pd.DataFrame
    shots: pd.DataFrame
    summary: Dict[str, float] = field(default_factory=dict)


def sweep_time_grid(t_min: float, t_max: float, points: int) -> np.ndarray:
    if not 0 < t_min < t_max or points < 2:
        raise InvalidParameterError("need 0 < t_min < t_max and at least two points")
    return np.geomspace(t_min, t_max, points)


def lz_curve_table(nu1: float, span: float, t_min: float, t_max: float, points: int) -> pd.DataFrame:
    times = sweep_time_grid(t_min, t_max, points)
    return pd.DataFrame({'sweep_time_s': times, 'p_up': lz_up_curve(nu1, span, times)})


def half_crossing_time(times: np.ndarray, values: np.ndarray, level: float) -> float:
    """First time `values` reaches `level`, linearly interpolated; NaN when never reached"""
    above = np.nonzero(values >= level)[0]
    if not above.size or above[0] == 0:
        return math.nan
    i = above[0]
    return float(times[i - 1] + (level - values[i - 1]) * (times[i] - times[i - 1]) / (values[i] - values[i - 1]))


def reproduce_sweep_figure(power: PowerSetting, b1: float, nu1: float, p: SpinSystemParams, span: float,
                           readout: ReadoutModel, seed: int, times: Sequence[float],
                           settings: EvolutionSettings = EvolutionSettings(),
                           shot_times: Sequence[float] = ()) -> SweepFigure:
    """
    Black: Landau-Zener. Gray: master equation with dephasing. Red: gray
    through the readout model. Synthetic points are binomial draws of the
    red model at `shot_times` (default: every fourth curve time).
    """
    times = np.asarray(times, dtype=float)
    drive = p.model_copy(update={'nu1': nu1})
    black = lz_up_curve(nu1, span, times)
    gray = simulate_sweep_series(times, span, drive, settings)
    red = compose_readout(gray, readout.f_up, readout.background)
    curves = pd.DataFrame({'sweep_time_s': times, 'black': black, 'gray': gray, 'red': red},
                          columns=CURVE_COLUMNS)

    shot_times = np.asarray(shot_times if len(shot_times) else times[::4], dtype=float)
    shot_p = simulate_sweep_series(shot_times, span, drive, settings)
    rng = make_rng(seed, "fig2-shots", power.label())
    points = [synthesize_shots(float(pu), readout, rng, sweep_time=float(t)) for t, pu in zip(shot_times, shot_p)]
    shots = pd.DataFrame([(pt.sweep_time, pt.r_up, pt.shots, power.p_mw_dbm) for pt in points],
                         columns=SHOT_COLUMNS)

    plateau = float(np.max(red))
    background = readout.background
    best_time, best_p = optimal_sweep_time(span, drive, float(times[0]), float(times[-1]), settings)
    other = (DephasingConvention.CONVENTIONAL if settings.dephasing_convention == DephasingConvention.DOUBLED
             else DephasingConvention.DOUBLED)
    at_optimum = simulate_sweep_series([best_time], span, drive, settings)
    other_at_optimum = simulate_sweep_series([best_time], span, drive,
                                             settings.model_copy(update={'dephasing_convention': other}))
    summary = {
        'power_dbm': power.p_mw_dbm,
        'b1_t': b1,
        'b1_lab_frame_t': lab_frame_b1(b1),
        'nu1_hz': nu1,
        'lz_pi_half_time_s': sweep_time_for_up_prob(0.5, nu1, span) if nu1 > 0 else math.inf,
        'red_half_crossing_s': half_crossing_time(times, red, 0.5 * (plateau + background)),
        'red_plateau': plateau,
        'red_at_shortest': float(red[0]),
        'optimal_sweep_time_s': best_time,
        'max_inversion_fidelity': best_p,
        'dephasing_convention': settings.dephasing_convention.value,
        'red_at_optimum': float(compose_readout(at_optimum, readout.f_up, readout.background)[0]),
        f'red_at_optimum_{other.value}': float(compose_readout(other_at_optimum, readout.f_up, readout.background)[0]),
    }
    log.info("sweep_figure", **{k: v for k, v in summary.items() if k != 'power_dbm'}, power=power.label())
    return SweepFigure(curves=curves, shots=shots, summary=summary)


def robustness_table(p: SpinSystemParams, protocol: SweepProtocol, linewidths: Sequence[float],
                     settings: EvolutionSettings = EvolutionSettings(), nodes: int = 21) -> pd.DataFrame:
    """Inversion of the chirped sweep and of a resonant pi pulse averaged over Gaussian resonance spreads"""
    pulse = pi_pulse_duration(p.nu1)
    rows = [
        (float(w), ensemble_sweep_pup(protocol, p, float(w), settings, nodes),
         ensemble_rabi_pup(p.nu1, pulse, float(w), protocol.center_offset))
        for w in linewidths
    ]
    return pd.DataFrame(rows, columns=ROBUSTNESS_COLUMNS)
