# src/domain/services/spectrum.py
"""Gaussian ESR line shapes and width extraction"""

import math

import numpy as np

from src.core.constants import FWHM_PER_SIGMA
from src.core.exceptions import InvalidParameterError, NoCrossingError
from src.domain.entities.spectrum_model import BimodalModel, GaussianPeak

FOUR_LN2 = 4.0 * math.log(2.0)
MIN_FWHM_SAMPLES = 100


def gaussian(f, peak: GaussianPeak):
    f = np.asarray(f, dtype=float)
    return peak.amplitude * np.exp(-FOUR_LN2 * (f - peak.center) ** 2 / peak.fwhm ** 2)


def spectrum_value(f, m: BimodalModel):
    """Baseline plus both lines; scalar in, scalar out"""
    value = m.baseline + gaussian(f, m.peaks[0]) + gaussian(f, m.peaks[1])
    return float(value) if np.ndim(value) == 0 else value


def fwhm_numeric(freqs, values, baseline: float = None) -> float:
    """
    Width between the outermost half-maximum crossings.

    Crossings are located by linear interpolation between neighbouring
    samples. `baseline` defaults to the smallest sample.
    """
    freqs = np.asarray(freqs, dtype=float)
    values = np.asarray(values, dtype=float)
    if freqs.shape != values.shape or freqs.ndim != 1:
        raise InvalidParameterError("frequencies and values must be 1-d arrays of equal length")
    if freqs.size < MIN_FWHM_SAMPLES:
        raise InvalidParameterError(f"need at least {MIN_FWHM_SAMPLES} samples, got {freqs.size}")
    if np.any(np.diff(freqs) <= 0):
        raise InvalidParameterError("frequencies must be strictly increasing")

    if baseline is None:
        baseline = float(np.min(values))
    peak = float(np.max(values))
    if not peak > baseline:
        raise NoCrossingError("curve is flat: no maximum above the baseline")
    half = baseline + 0.5 * (peak - baseline)

    above = np.nonzero(values >= half)[0]
    left, right = above[0], above[-1]
    if left == 0 or right == values.size - 1:
        raise NoCrossingError("curve does not fall below half maximum on both sides")

    def crossing(i_below: int, i_above: int) -> float:
        v0, v1 = values[i_below], values[i_above]
        f0, f1 = freqs[i_below], freqs[i_above]
        return f0 + (half - v0) * (f1 - f0) / (v1 - v0)

    return float(crossing(right + 1, right) - crossing(left - 1, left))


def drift_stddev_for_envelope(envelope_fwhm: float, snapshot_fwhm: float) -> float:
    """
    Drift stddev (Hz) that broadens a snapshot line of `snapshot_fwhm` into a
    Gaussian envelope of `envelope_fwhm`; the widths add in quadrature.
    """
    if not envelope_fwhm > 0 or not snapshot_fwhm > 0:
        raise InvalidParameterError("line widths must be positive")
    if snapshot_fwhm > envelope_fwhm:
        raise InvalidParameterError(
            f"snapshot width {snapshot_fwhm:.4g} Hz exceeds the target envelope {envelope_fwhm:.4g} Hz"
        )
    return math.sqrt(envelope_fwhm ** 2 - snapshot_fwhm ** 2) / FWHM_PER_SIGMA


def drift_window_factor(n_samples: int, spacing: float, correlation_time: float) -> float:
    """
    Expected variance of `n_samples` evenly spaced OU samples about their own
    mean, as a fraction of the stationary variance: 1 - mean(exp(-|ti - tj| / tau)).

    A window a few correlation times long sees less spread than the stationary
    process; dividing the stddev by sqrt of this factor restores it on average.
    """
    if n_samples < 2:
        return 1.0
    if not spacing > 0 or not correlation_time > 0:
        raise InvalidParameterError("spacing and correlation time must be positive")
    rho = math.exp(-spacing / correlation_time)
    lags = np.arange(1, n_samples)
    pair_sum = n_samples + 2.0 * float(np.sum((n_samples - lags) * rho ** lags))
    return 1.0 - pair_sum / n_samples ** 2
