# src/application/services/spectrum_service.py
"""
ESR spectra: drifting-line time series, averaging and bimodal fits.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd
import structlog
from scipy.optimize import least_squares
from scipy.signal import find_peaks

from src.core.constants import ACQUISITION_MINUTES, SATURATION_AMPLITUDE
from src.core.exceptions import ConvergenceError, InvalidParameterError, NoCrossingError, RankDeficientError
from src.core.random import make_rng
from src.domain.entities.readout_model import ReadoutModel
from src.domain.entities.spectrum_model import BimodalModel, DriftProcess, GaussianPeak
from src.domain.services.spectrum import FOUR_LN2, fwhm_numeric, spectrum_value

log = structlog.get_logger(__name__)

SPECTRUM_COLUMNS = ['freq_hz', 'r_up', 'shots', 'snapshot_index', 'wallclock_min']
PARAMETER_NAMES = ['baseline', 'amplitude_1', 'amplitude_2', 'center', 'splitting', 'fwhm']
MIN_FIT_POINTS = 8
MHZ = 1e6
SINGULAR_TOL = 1e-10


@dataclass(frozen=True)
class SpectrumSeries:
    """Snapshot spectra in long format plus the drift offsets that produced them"""

    frame: pd.DataFrame
    offsets: np.ndarray  # Hz, one per snapshot
    assumptions: Dict[str, str] = field(default_factory=dict)

    @property
    def n_spectra(self) -> int:
        return int(self.offsets.size)

    def snapshot(self, index: int) -> pd.DataFrame:
        return self.frame[self.frame['snapshot_index'] == index].reset_index(drop=True)


@dataclass(frozen=True)
class BimodalFit:
    model: BimodalModel
    std_errors: Dict[str, float]
    covariance: np.ndarray = field(repr=False)
    residual_sum: float
    rank_deficient: bool
    converged: bool
    nfev: int

    @property
    def envelope_fwhm(self) -> float:
        """Numeric FWHM of the fitted two-line sum"""
        reach = 2.0 * (self.model.splitting + self.model.fwhm)
        freqs = np.linspace(self.model.center - reach, self.model.center + reach, 4001)
        return fwhm_numeric(freqs, spectrum_value(freqs, self.model), baseline=self.model.baseline)


def simulate_drift(d: DriftProcess, times) -> np.ndarray:
    """
    Ornstein-Uhlenbeck offsets (Hz) at `times` (s), started from the
    stationary distribution and advanced with the exact Gaussian transition,
    so arbitrary spacing is allowed.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise InvalidParameterError("drift times must be a non-empty 1-d array")
    if np.any(np.diff(times) < 0):
        raise InvalidParameterError("drift times must be sorted")

    rng = make_rng(d.seed, "drift")
    noise = rng.standard_normal(times.size)
    offsets = np.empty(times.size)
    offsets[0] = d.stddev * noise[0]
    for i in range(1, times.size):
        decay = math.exp(-(times[i] - times[i - 1]) / d.correlation_time)
        offsets[i] = offsets[i - 1] * decay + d.stddev * math.sqrt(1.0 - decay ** 2) * noise[i]
    return offsets


def snapshot_times_min(n_spectra: int, acquisition_minutes: float = ACQUISITION_MINUTES) -> np.ndarray:
    """Start time of each snapshot; spectra are spread evenly over the acquisition"""
    return np.arange(n_spectra) * (acquisition_minutes / n_spectra)


def snapshot_line(splitting: float, snapshot_fwhm: float, amplitude: float = SATURATION_AMPLITUDE) -> BimodalModel:
    """
    Spin-up probability line of one snapshot.

    Each branch of the pair is present half of the time; on resonance the
    saturation pulse leaves the spin up with probability `amplitude`.
    """
    return BimodalModel.symmetric(center=0.0, splitting=splitting, fwhm=snapshot_fwhm, amplitude=0.5 * amplitude)


def synth_spectrum_series(m: BimodalModel, d: DriftProcess, n_spectra: int, freq_grid: Sequence[float],
                          readout: ReadoutModel, per_point_shots: Optional[int] = None,
                          acquisition_minutes: float = ACQUISITION_MINUTES) -> SpectrumSeries:
    """
    Shot-noise spectra of a line whose center follows the drift process.

    `m` is the spin-up probability line of a single snapshot (see
    snapshot_line); each snapshot is `m` shifted by the drift offset at its
    wall-clock time and passed through the readout model.
    """
    if n_spectra < 1:
        raise InvalidParameterError(f"n_spectra must be at least 1, got {n_spectra}")
    freqs = np.asarray(freq_grid, dtype=float)
    if freqs.ndim != 1 or freqs.size == 0 or np.any(np.diff(freqs) <= 0):
        raise InvalidParameterError("frequency grid must be a non-empty strictly increasing sequence")
    shots = readout.shots if per_point_shots is None else int(per_point_shots)
    if shots < 1:
        raise InvalidParameterError(f"shots per point must be at least 1, got {shots}")

    wallclock = snapshot_times_min(n_spectra, acquisition_minutes)
    offsets = simulate_drift(d, wallclock * 60.0)
    rng = make_rng(d.seed, "spectrum-shots")

    frames = []
    for index, (minute, offset) in enumerate(zip(wallclock, offsets)):
        p_up = np.clip(spectrum_value(freqs, m.shifted(offset)), 0.0, 1.0)
        expected = readout.f_up * (p_up + (1.0 - p_up) * readout.p_up_i)
        counts = rng.binomial(shots, expected)
        frames.append(pd.DataFrame({
            'freq_hz': freqs,
            'r_up': counts / shots,
            'shots': shots,
            'snapshot_index': index,
            'wallclock_min': minute,
        }, columns=SPECTRUM_COLUMNS))

    assumptions = {
        'snapshot_fwhm_hz': f"{m.fwhm:.6g} (assumed; individual spectra widths are not quantified)",
        'snapshot_interval_min': f"{acquisition_minutes / n_spectra:.6g} (assumed even spacing)",
        'drift': f"ornstein-uhlenbeck stddev_hz={d.stddev:.6g} correlation_s={d.correlation_time:.6g}",
        'branch_weights': "0.5,0.5 (assumed)",
    }
    log.info("spectra_synthesized", n_spectra=n_spectra, points=freqs.size, shots=shots,
             drift_sample_std=float(np.std(offsets)))
    return SpectrumSeries(frame=pd.concat(frames, ignore_index=True), offsets=offsets, assumptions=assumptions)


def average_spectrum(frame: pd.DataFrame) -> pd.DataFrame:
    """Pool all snapshots: total up counts over total shots per frequency"""
    counts = (frame['r_up'] * frame['shots']).round()
    pooled = pd.DataFrame({'freq_hz': frame['freq_hz'], 'up': counts, 'shots': frame['shots']})
    summed = pooled.groupby('freq_hz', sort=True).sum().reset_index()
    return pd.DataFrame({
        'freq_hz': summed['freq_hz'],
        'r_up': summed['up'] / summed['shots'],
        'shots': summed['shots'].astype(int),
    })


def _smooth(values: np.ndarray, width: int = 5) -> np.ndarray:
    padded = np.pad(values, width // 2, mode='edge')
    return np.convolve(padded, np.ones(width) / width, mode='valid')


def initial_guess(freqs, r_up) -> BimodalModel:
    """
    Starting model: centers at the two highest local maxima of the
    5-point-smoothed data, width half the numeric FWHM of the smoothed curve.
    With fewer than two prominent maxima the split is symmetric about the top.
    """
    freqs = np.asarray(freqs, dtype=float)
    smooth = _smooth(np.asarray(r_up, dtype=float))
    baseline = float(np.min(smooth))
    height = float(np.max(smooth)) - baseline
    top = int(np.argmax(smooth))

    try:
        width = fwhm_numeric(freqs, smooth, baseline=baseline) if freqs.size >= 100 else None
    except NoCrossingError:
        width = None
    if width is None:
        width = 0.25 * (freqs[-1] - freqs[0])

    peaks, _ = find_peaks(smooth, prominence=0.1 * height if height > 0 else None)
    if peaks.size >= 2:
        best = np.sort(peaks[np.argsort(smooth[peaks])[-2:]])
        centers = freqs[best]
        amplitudes = smooth[best] - baseline
        fwhm = max(0.5 * width, 0.5 * float(centers[1] - centers[0]))
    else:
        centers = np.array([freqs[top] - 0.25 * width, freqs[top] + 0.25 * width])
        amplitudes = np.full(2, 0.5 * height)
        fwhm = 0.5 * width

    amplitudes = np.maximum(amplitudes, 1e-3)
    return BimodalModel(
        peaks=(
            GaussianPeak(amplitude=float(amplitudes[0]), center=float(centers[0]), fwhm=fwhm),
            GaussianPeak(amplitude=float(amplitudes[1]), center=float(centers[1]), fwhm=fwhm),
        ),
        baseline=baseline,
    )


def _line_model(params: np.ndarray, f_mhz: np.ndarray) -> np.ndarray:
    baseline, a1, a2, mid, split, width = params
    first = np.exp(-FOUR_LN2 * (f_mhz - (mid - 0.5 * split)) ** 2 / width ** 2)
    second = np.exp(-FOUR_LN2 * (f_mhz - (mid + 0.5 * split)) ** 2 / width ** 2)
    return baseline + a1 * first + a2 * second


def binomial_sigma(r_up: np.ndarray, shots: np.ndarray) -> np.ndarray:
    """Per-point standard deviation sqrt(max(R(1-R), 1/n^2) / n)"""
    return np.sqrt(np.maximum(r_up * (1.0 - r_up), 1.0 / shots ** 2) / shots)


def fit_bimodal(freqs, r_up, shots=None, init: Optional[BimodalModel] = None, max_iterations: int = 2000,
                strict: bool = False) -> BimodalFit:
    """
    Levenberg-Marquardt fit of two equal-width Gaussians on a baseline.

    Points are weighted with binomial variances when `shots` is given, else
    uniformly. The result is canonical (lower-frequency peak first) and
    carries standard errors from the Jacobian at the optimum; an
    unresolvable parameter sets `rank_deficient` (or raises with strict).
    """
    freqs = np.asarray(freqs, dtype=float)
    r_up = np.asarray(r_up, dtype=float)
    if freqs.shape != r_up.shape or freqs.ndim != 1:
        raise InvalidParameterError("frequencies and fractions must be 1-d arrays of equal length")
    if freqs.size < MIN_FIT_POINTS:
        raise InvalidParameterError(f"need at least {MIN_FIT_POINTS} points, got {freqs.size}")
    if not np.all(np.isfinite(r_up)):
        raise InvalidParameterError("spectrum contains non-finite values")

    if shots is None:
        sigma = np.ones_like(r_up)
    else:
        sigma = binomial_sigma(r_up, np.broadcast_to(np.asarray(shots, dtype=float), r_up.shape))

    if init is None:
        init = initial_guess(freqs, r_up)
    first, second = init.canonical().peaks
    x0 = np.array([
        init.baseline,
        first.amplitude,
        second.amplitude,
        0.5 * (first.center + second.center) / MHZ,
        (second.center - first.center) / MHZ,
        init.fwhm / MHZ,
    ])
    f_mhz = freqs / MHZ

    def residuals(params: np.ndarray) -> np.ndarray:
        return (_line_model(params, f_mhz) - r_up) / sigma

    solution = least_squares(residuals, x0, method='lm', xtol=1e-12, ftol=1e-12, gtol=1e-12,
                             max_nfev=max_iterations)
    jacobian = solution.jac
    params = solution.x.copy()
    params[5] = abs(params[5])
    if params[4] < 0:
        params[4] = -params[4]
        params[1], params[2] = params[2], params[1]
        jacobian = jacobian[:, [0, 2, 1, 3, 4, 5]]
    _, singular, vt = np.linalg.svd(jacobian, full_matrices=False)
    keep = singular > SINGULAR_TOL * singular[0]
    rank_deficient = not bool(np.all(keep))
    covariance = (vt[keep].T / singular[keep] ** 2) @ vt[keep]
    if shots is None:
        dof = max(freqs.size - params.size, 1)
        covariance = covariance * (2.0 * solution.cost / dof)
    if rank_deficient:
        null = np.abs(vt[~keep]).max(axis=0) > 0.1
        covariance[null, :] = np.inf
        covariance[:, null] = np.inf
    errors = np.sqrt(np.abs(np.diag(covariance)))
    scale = np.array([1.0, 1.0, 1.0, MHZ, MHZ, MHZ])

    baseline, a1, a2, mid, split, width = params
    model = BimodalModel(
        peaks=(
            GaussianPeak(amplitude=max(a1, 0.0), center=(mid - 0.5 * split) * MHZ, fwhm=width * MHZ),
            GaussianPeak(amplitude=max(a2, 0.0), center=(mid + 0.5 * split) * MHZ, fwhm=width * MHZ),
        ),
        baseline=baseline,
    )
    fit = BimodalFit(
        model=model,
        std_errors=dict(zip(PARAMETER_NAMES, errors * scale)),
        covariance=covariance,
        residual_sum=float(2.0 * solution.cost),
        rank_deficient=rank_deficient,
        converged=solution.status > 0,
        nfev=int(solution.nfev),
    )
    log.info("bimodal_fit", splitting_mhz=split, fwhm_mhz=width, cost=solution.cost, nfev=solution.nfev,
             rank_deficient=rank_deficient)

    if not fit.converged:
        raise ConvergenceError(f"bimodal fit did not converge: {solution.message}", result=fit)
    if strict and rank_deficient:
        raise RankDeficientError("bimodal fit is rank deficient: splitting not resolvable", result=fit)
    return fit
