# src/application/services/estimation_service.py
"""
Parameter estimation from spin-up fraction vs sweep time data.

Per-power drive amplitudes B1 and the global F_up and T2 are fitted jointly
with Levenberg-Marquardt; the background product F_up * P_upI is fixed from
an off-resonant control measurement.
"""

import math
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import structlog
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat
from scipy.optimize import least_squares

from src.core.constants import BACKGROUND_FRACTION
from src.core.exceptions import ConvergenceError, InvalidParameterError
from src.domain.entities.evolution import EvolutionSettings
from src.domain.entities.measurement import SweepDataset
from src.domain.entities.readout_model import ReadoutModel
from src.domain.entities.spin_system import SpinSystemParams
from src.domain.entities.sweep_protocol import SweepDirection
from src.domain.services.dynamics import simulate_sweep_series
from src.domain.services.landau_zener import FOUR_PI_SQUARED
from src.domain.services.readout import correct
from src.domain.services.units import b1_from_nu1, nu1_from_b1
from src.domain.value_objects.phys_constants import PhysConstants
from src.domain.value_objects.power_setting import PowerSetting

log = structlog.get_logger(__name__)

MICRO = 1e-6
JACOBIAN_STEP = 1e-6
SINGULAR_TOL = 1e-10
FIT_TOL = 1e-10
CACHE_SIZE = 4096
BOUND_TOL = 1e-6
T2_BOUND_S = 1.0
RESIDUAL_COLUMNS = ['dataset', 'power_dbm', 'sweep_time_s', 'r_up', 'model', 'weighted_residual']

CacheKey = Tuple[float, float, float, float, Tuple[float, ...]]


class FitResult(BaseModel):
    """Fitted (or initial) parameters of the sweep model"""

    model_config = ConfigDict(frozen=True)

    b1_per_power: List[PositiveFloat]  # T, one per dataset
    f_up: float = Field(gt=0.0, le=1.0)
    t2: PositiveFloat  # s
    residual_norm: float = 0.0
    std_errors: Dict[str, float] = Field(default_factory=dict)
    converged: bool = False
    at_bound: List[str] = Field(default_factory=list)
    unidentifiable: List[str] = Field(default_factory=list)
    cost_history: List[float] = Field(default_factory=list)
    background: float = BACKGROUND_FRACTION

    @property
    def parameter_names(self) -> List[str]:
        return [f"b1[{i}]" for i in range(len(self.b1_per_power))] + ['f_up', 't2']


@dataclass(frozen=True)
class SqrtPowerFit:
    slope: float  # T / sqrt(mW delivered)
    r_squared: float
    max_relative_deviation: float
    n_points: int

    def predict(self, power: PowerSetting) -> float:
        return self.slope * math.sqrt(power.delivered_mw)


def _series(args: Tuple[float, float, float, float, Tuple[float, ...], EvolutionSettings, PhysConstants]):
    b1, t2, span, offset, times, settings, constants = args
    params = SpinSystemParams(nu1=nu1_from_b1(b1, constants), t2=t2)
    return simulate_sweep_series(times, span, params, settings, center_offset=offset,
                                 direction=SweepDirection.UP)


class ForwardModel:
    """
    Readout-composed sweep model with a bounded solve cache.

    Solves are keyed by (B1, T2, span, offset, sweep times); F_up only
    enters through the readout composition, so changing it never triggers
    a new integration. With workers > 1 missing solves run on a process
    pool that lives until close(); use the model as a context manager.
    """

    def __init__(self, settings: EvolutionSettings = EvolutionSettings(), constants: PhysConstants = PhysConstants(),
                 workers: int = 1, cache_size: int = CACHE_SIZE):
        self.settings = settings
        self.constants = constants
        self.workers = max(1, int(workers))
        self.cache_size = max(1, int(cache_size))
        self._cache: 'OrderedDict[CacheKey, np.ndarray]' = OrderedDict()
        self._pool: Optional[ProcessPoolExecutor] = None
        self.solves = 0

    def __enter__(self) -> 'ForwardModel':
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def spin_up(self, sweep_times: Sequence[float], b1: float, t2: float, span: float,
                offset: float = 0.0) -> np.ndarray:
        return self.spin_up_many([(b1, t2, span, offset, tuple(float(t) for t in sweep_times))])[0]

    def spin_up_many(self, requests: List[CacheKey]) -> List[np.ndarray]:
        """p_up series for several (B1, T2, span, offset, times) keys, solving the missing ones"""
        missing = list(dict.fromkeys(key for key in requests if key not in self._cache))
        solved = dict(zip(missing, self._solve(missing))) if missing else {}
        values = []
        for key in requests:
            if key in solved:
                values.append(solved[key])
            else:
                self._cache.move_to_end(key)
                values.append(self._cache[key])
        self._cache.update(solved)
        while len(self._cache) > self.cache_size:
            self._cache.popitem(last=False)
        return values

    def _solve(self, keys: List[CacheKey]) -> List[np.ndarray]:
        jobs = [key + (self.settings, self.constants) for key in keys]
        if self.workers > 1 and len(jobs) > 1:
            if self._pool is None:
                self._pool = ProcessPoolExecutor(max_workers=self.workers)
                log.debug("worker_pool_started", workers=self.workers)
            solved = list(self._pool.map(_series, jobs))
        else:
            solved = [_series(job) for job in jobs]
        self.solves += len(jobs)
        return solved

    @property
    def cached(self) -> int:
        return len(self._cache)

    def observed(self, sweep_times: Sequence[float], b1: float, f_up: float, t2: float, span: float,
                 offset: float = 0.0, background: float = BACKGROUND_FRACTION) -> np.ndarray:
        return compose_readout(self.spin_up(sweep_times, b1, t2, span, offset), f_up, background)


def compose_readout(p_up: np.ndarray, f_up: float, background: float) -> np.ndarray:
    """Vectorized observe() with P_upI = background / F_up"""
    if not 0.0 <= background <= f_up:
        raise InvalidParameterError(f"background {background} must lie in [0, f_up = {f_up}]")
    return f_up * p_up + background * (1.0 - p_up)


def forward_model(ts: Sequence[float], b1: float, f_up: float, t2: float, span: float, offset: float = 0.0,
                  background: float = BACKGROUND_FRACTION,
                  settings: EvolutionSettings = EvolutionSettings()) -> np.ndarray:
    """Expected spin-up fraction for each sweep time in `ts`"""
    if not b1 > 0 or not t2 > 0 or not 0.0 < f_up <= 1.0:
        raise InvalidParameterError("forward model needs b1 > 0, t2 > 0 and 0 < f_up <= 1")
    return ForwardModel(settings).observed(ts, b1, f_up, t2, span, offset, background)


def initial_b1_guess(dataset: SweepDataset, readout: ReadoutModel, c: PhysConstants = PhysConstants()) -> float:
    """
    B1 from the first time the readout-corrected data crosses 1/2, inverted
    through the Landau-Zener formula. Without a crossing the best point is
    inverted instead.
    """
    order = np.argsort(dataset.sweep_times)
    times = np.asarray(dataset.sweep_times, dtype=float)[order]
    p = np.array([correct(r, readout).p_up for r in np.asarray(dataset.r_up)[order]])

    above = np.nonzero(p >= 0.5)[0]
    if above.size and above[0] > 0:
        i = above[0]
        t_half = times[i - 1] + (0.5 - p[i - 1]) * (times[i] - times[i - 1]) / (p[i] - p[i - 1])
        exponent, t_ref = math.log(2.0), t_half
    else:
        i = int(np.argmax(p)) if not above.size else 0
        target = min(max(p[i], 1e-3), 0.999)
        exponent, t_ref = -math.log1p(-target), times[i]

    rate = dataset.protocol_span / t_ref
    nu1 = math.sqrt(exponent * rate / FOUR_PI_SQUARED)
    return b1_from_nu1(nu1, c)


class _Parameterization:
    """Unconstrained vector <-> physical parameters"""

    def __init__(self, n_datasets: int, background: float, log_t2: bool = True):
        self.n = n_datasets
        self.background = background
        self.log_t2 = log_t2

    def to_vector(self, b1: Sequence[float], f_up: float, t2: float) -> np.ndarray:
        share = (f_up - self.background) / (1.0 - self.background)
        share = min(max(share, 1e-9), 1.0 - 1e-9)
        t2_coordinate = math.log(t2 / MICRO) if self.log_t2 else t2 / MICRO
        return np.array([math.log(b / MICRO) for b in b1] + [math.log(share / (1.0 - share)), t2_coordinate])

    def b1(self, x: np.ndarray) -> np.ndarray:
        return MICRO * np.exp(x[:self.n])

    def f_up(self, x: np.ndarray) -> float:
        return self.background + (1.0 - self.background) / (1.0 + math.exp(-x[self.n]))

    def t2(self, x: np.ndarray) -> float:
        return MICRO * (math.exp(x[-1]) if self.log_t2 else abs(x[-1]))

    def derivatives(self, x: np.ndarray) -> np.ndarray:
        """d(physical)/d(coordinate) for each parameter"""
        share = 1.0 / (1.0 + math.exp(-x[self.n]))
        dt2 = self.t2(x) if self.log_t2 else MICRO
        return np.concatenate([self.b1(x), [(1.0 - self.background) * share * (1.0 - share), dt2]])


class GlobalSweepFit:
    """Objective, Jacobian and bookkeeping for one joint fit"""

    def __init__(self, datasets: Sequence[SweepDataset], background: float, model: ForwardModel, log_t2: bool = True):
        if not datasets:
            raise InvalidParameterError("need at least one dataset")
        self.datasets = list(datasets)
        self.background = background
        self.model = model
        self.param = _Parameterization(len(self.datasets), background, log_t2)
        self.times = [tuple(float(t) for t in d.sweep_times) for d in self.datasets]
        self.data = [np.asarray(d.r_up, dtype=float) for d in self.datasets]
        self.sigma = []
        for d, r in zip(self.datasets, self.data):
            shots = np.asarray(d.shots, dtype=float)
            self.sigma.append(np.sqrt(np.maximum(r * (1.0 - r), 1.0 / shots ** 2) / shots))
        self.cost_history: List[float] = []

    def _keys(self, x: np.ndarray) -> List[CacheKey]:
        b1 = self.param.b1(x)
        t2 = self.param.t2(x)
        return [(float(b), t2, d.protocol_span, d.center_offset, times)
                for b, d, times in zip(b1, self.datasets, self.times)]

    def predictions(self, x: np.ndarray) -> List[np.ndarray]:
        f_up = self.param.f_up(x)
        return [compose_readout(p, f_up, self.background) for p in self.model.spin_up_many(self._keys(x))]

    def residuals(self, x: np.ndarray) -> np.ndarray:
        return np.concatenate([(m - r) / s for m, r, s in zip(self.predictions(x), self.data, self.sigma)])

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        base = self.residuals(x)
        self.cost_history.append(0.5 * float(base @ base))
        steps = JACOBIAN_STEP * np.maximum(np.abs(x), 1.0)
        shifted = [x + step * unit for step, unit in zip(steps, np.eye(x.size))]
        # one batched request so missing solves can run concurrently
        self.model.spin_up_many([key for point in shifted for key in self._keys(point)])
        columns = [(self.residuals(point) - base) / step for point, step in zip(shifted, steps)]
        return np.column_stack(columns)


def _uncertainties(jacobian: np.ndarray, names: List[str], scale: np.ndarray,
                   values: np.ndarray) -> Tuple[Dict[str, float], List[str]]:
    """
    Standard errors (physical units) from the weighted Jacobian, plus the
    names of parameters whose error exceeds their value.
    """
    _, singular, vt = np.linalg.svd(jacobian, full_matrices=False)
    s_max = singular[0] if singular.size and singular[0] > 0 else 1.0
    keep = singular > SINGULAR_TOL * s_max
    variance = np.full(len(names), np.inf)
    if np.any(keep):
        covariance = (vt[keep].T / singular[keep] ** 2) @ vt[keep]
        variance = np.diag(covariance).copy()
        null = np.abs(vt[~keep]).max(axis=0) > 0.1 if np.any(~keep) else np.zeros(len(names), dtype=bool)
        variance[null] = np.inf
    errors = np.sqrt(np.abs(variance)) * scale
    unidentifiable = [name for name, err, value in zip(names, errors, values) if not err <= abs(value)]
    return dict(zip(names, errors)), unidentifiable


def fit_global(datasets: Sequence[SweepDataset], init: FitResult, fixed_background: float = BACKGROUND_FRACTION,
               model: Optional[ForwardModel] = None, max_iterations: int = 200, log_t2: bool = True) -> FitResult:
    """
    Joint weighted least squares over all datasets.

    B1 is per dataset, F_up and T2 are shared. Weights are binomial,
    max(R(1-R), 1/n^2)/n. Parameters are transformed (log B1, logistic F_up
    on (background, 1), log T2) so the optimizer is unconstrained.
    Stopping tolerances never go below the integrator's rel_tol, the noise
    floor of the objective. Raises ConvergenceError, carrying the last
    result, when the optimizer stops without meeting them.
    """
    if len(init.b1_per_power) != len(datasets):
        raise InvalidParameterError(f"init has {len(init.b1_per_power)} B1 values for {len(datasets)} datasets")
    if not 0.0 <= fixed_background < 1.0:
        raise InvalidParameterError(f"background must lie in [0, 1), got {fixed_background}")
    model = model or ForwardModel()
    problem = GlobalSweepFit(datasets, fixed_background, model, log_t2)
    x0 = problem.param.to_vector(init.b1_per_power, init.f_up, init.t2)

    tol = max(FIT_TOL, model.settings.rel_tol)
    solution = least_squares(problem.residuals, x0, jac=problem.jacobian, method='lm', xtol=tol, ftol=tol,
                             gtol=FIT_TOL, max_nfev=max_iterations)
    x = solution.x
    names = [f"b1[{i}]" for i in range(len(datasets))] + ['f_up', 't2']
    jacobian = problem.jacobian(x)
    f_up = problem.param.f_up(x)
    t2 = problem.param.t2(x)
    values = np.concatenate([problem.param.b1(x), [f_up, t2]])
    std_errors, unidentifiable = _uncertainties(jacobian, names, problem.param.derivatives(x), values)
    at_bound = []
    if f_up - fixed_background < BOUND_TOL or 1.0 - f_up < BOUND_TOL:
        at_bound.append('f_up')
    if t2 >= T2_BOUND_S:
        at_bound.append('t2')

    residual = problem.residuals(x)
    result = FitResult(
        b1_per_power=[float(b) for b in problem.param.b1(x)],
        f_up=f_up,
        t2=t2,
        residual_norm=float(np.linalg.norm(residual)),
        std_errors=std_errors,
        converged=solution.status > 0,
        at_bound=at_bound,
        unidentifiable=unidentifiable,
        cost_history=problem.cost_history[:-1],
        background=fixed_background,
    )
    log.info("global_fit", converged=result.converged, cost=solution.cost, nfev=solution.nfev,
             solves=model.solves, b1=result.b1_per_power, f_up=f_up, t2=t2, at_bound=at_bound,
             unidentifiable=unidentifiable)
    if not result.converged:
        raise ConvergenceError(f"global sweep fit did not converge: {solution.message}", result=result)
    return result


def residual_table(datasets: Sequence[SweepDataset], result: FitResult,
                   model: Optional[ForwardModel] = None) -> pd.DataFrame:
    model = model or ForwardModel()
    rows = []
    for index, (d, b1) in enumerate(zip(datasets, result.b1_per_power)):
        predicted = model.observed(d.sweep_times, b1, result.f_up, result.t2, d.protocol_span, d.center_offset,
                                   result.background)
        for point, value in zip(d.points, predicted):
            sigma = math.sqrt(max(point.r_up * (1.0 - point.r_up), 1.0 / point.shots ** 2) / point.shots)
            rows.append((index, d.power.p_mw_dbm, point.sweep_time, point.r_up, float(value),
                         (float(value) - point.r_up) / sigma))
    return pd.DataFrame(rows, columns=RESIDUAL_COLUMNS)


def fit_sqrtp_law(b1_values: Sequence[float], powers: Sequence[PowerSetting]) -> SqrtPowerFit:
    """
    Line through the origin of B1 against sqrt(delivered mW).

    Residuals are relative (weights 1/B1^2). R^2 is the uncentered
    coefficient for a zero-intercept model; a single point fits exactly.
    """
    if len(b1_values) != len(powers):
        raise InvalidParameterError("need one power per B1 value")
    if len(b1_values) == 0:
        raise InvalidParameterError("need at least one (power, B1) pair")
    b1 = np.asarray(b1_values, dtype=float)
    if np.any(b1 <= 0) or not np.all(np.isfinite(b1)):
        raise InvalidParameterError("B1 values must be positive and finite")
    root_power = np.sqrt([p.delivered_mw for p in powers])

    u = root_power / b1
    slope = float(np.sum(u) / np.sum(u ** 2))
    predicted = slope * root_power
    relative = (b1 - predicted) / b1
    if b1.size == 1:
        r_squared = 1.0
    else:
        r_squared = 1.0 - float(np.sum(relative ** 2) / b1.size)
    return SqrtPowerFit(slope=slope, r_squared=r_squared, max_relative_deviation=float(np.max(np.abs(relative))),
                        n_points=int(b1.size))
