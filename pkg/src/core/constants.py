# src/core/constants.py
"""
Physical constants and the measured device values used as defaults.

All values are SI: Hz, seconds, Tesla. Conversions to MHz / µs happen
only at the I/O boundary.
"""

import math

# Electron gyromagnetic ratio (Hz/T)
GAMMA_E_HZ_PER_T = 27.97e9

# Device
B0_T = 1.3
A_HF_HZ = 114.4e6
LINE_ATTENUATION_DB = 30.0

# Sweep experiment
SWEEP_SPAN_HZ = 25e6
T2_S = 44e-6
F_UP = 0.93
BACKGROUND_FRACTION = 0.022  # F_up * P_upI, from the off-resonant control
SHOTS_PER_POINT = 100

# Fitted drive amplitudes per source power (dBm -> Tesla)
B1_BY_POWER_DBM = {
    -4.0: 8.8e-6,
    5.0: 30e-6,
}

# Linear polarization: real B1 amplitude is twice the rotating-frame value
LINEAR_POLARIZATION_FACTOR = 2.0

# ESR spectra
PEAK_FWHM_HZ = 6.3e6
LINE_SPLITTING_HZ = 6.0e6
SNAPSHOT_FWHM_HZ = 1.5e6  # not quantified by the measurement, free parameter
N_SPECTRA = 75
ACQUISITION_MINUTES = 660.0
DRIFT_CORRELATION_MIN = 60.0
SATURATION_AMPLITUDE = 0.5

# Gaussian FWHM = FWHM_PER_SIGMA * standard deviation
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
