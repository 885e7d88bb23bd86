# src/domain/services/dynamics.py
"""
Time evolution of the electron spin under a linear chirp.

Rotating frame of the drive, frequency units (Hz):

    H(t) = 1/2 * dnu(t) * sigma_z + nu1 * sigma_x
    d(rho)/dt = -i 2 pi [H, rho] + L(rho)
    L(rho) = gamma/2 * (2 sigma_z rho sigma_z - sigma_z sigma_z rho - rho sigma_z sigma_z)

with gamma = 1/T2 for dephasing_convention "paper" (coherences decay at 2/T2) and
gamma = 1/(2 T2) for the "conventional" one (coherences decay at 1/T2).

The integrators work on the real vector (rho00, rho11, Re rho01, Im rho01).
rho10 is always rebuilt as conj(rho01), so every accepted step is Hermitian
by construction, and d(rho00)/dt = -d(rho11)/dt keeps the trace.
"""

import math
from typing import Callable, Sequence, Tuple

import numpy as np
import structlog
from numpy.polynomial.hermite_e import hermegauss
from scipy.integrate import RK45, solve_ivp
from scipy.optimize import minimize_scalar

from src.core.constants import FWHM_PER_SIGMA
from src.core.exceptions import IntegrationError, InvalidParameterError, NumericalInstabilityError
from src.domain.entities.evolution import DephasingConvention, EvolutionSettings, IntegrationMethod, Trajectory
from src.domain.entities.spin_system import SpinSystemParams
from src.domain.entities.sweep_protocol import SweepDirection, SweepProtocol
from src.domain.services.resonance import detuning_at, sweep_detuning
from src.domain.value_objects.density_matrix import DensityMatrix2

log = structlog.get_logger(__name__)

TWO_PI = 2.0 * math.pi

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

RhsFunction = Callable[[float, np.ndarray], np.ndarray]


def hamiltonian_at(t: float, s: SweepProtocol, nu1: float) -> np.ndarray:
    """H(t) in Hz; the gap at zero detuning is 2*nu1"""
    if nu1 < 0:
        raise InvalidParameterError(f"nu1 must be non-negative, got {nu1}")
    detuning = detuning_at(t, s)
    return 0.5 * detuning * SIGMA_Z + nu1 * SIGMA_X


def dephasing_rate(t2: float, convention: DephasingConvention = DephasingConvention.DOUBLED) -> float:
    """Decay rate (1/s) of the off-diagonal element; 0 for infinite T2"""
    if math.isnan(t2) or t2 <= 0:
        raise InvalidParameterError(f"t2 must be positive, got {t2}")
    if math.isinf(t2):
        return 0.0
    if convention == DephasingConvention.DOUBLED:
        return 2.0 / t2
    return 1.0 / t2


def lindblad_rhs(rho, h: np.ndarray, t2: float,
                 convention: DephasingConvention = DephasingConvention.DOUBLED) -> np.ndarray:
    """d(rho)/dt for density matrix `rho` (DensityMatrix2 or 2x2 array) under Hamiltonian `h` (Hz)"""
    entries = rho.entries if isinstance(rho, DensityMatrix2) else np.asarray(rho, dtype=complex)
    h = np.asarray(h, dtype=complex)
    derivative = -1j * TWO_PI * (h @ entries - entries @ h)

    kappa = dephasing_rate(t2, convention)
    if kappa > 0:
        # gamma/2 * (2 sz rho sz - 2 rho) decays coherences at 2*gamma = kappa
        gamma = 0.5 * kappa
        derivative = derivative + 0.5 * gamma * (
            2.0 * SIGMA_Z @ entries @ SIGMA_Z - SIGMA_Z @ SIGMA_Z @ entries - entries @ SIGMA_Z @ SIGMA_Z
        )
    return derivative


def _bloch_derivative(detuning, nu1: float, kappa: float, y: np.ndarray) -> np.ndarray:
    """lindblad_rhs written out on (rho00, rho11, Re rho01, Im rho01); y may carry a trailing batch axis"""
    p, q, x, im = y
    rot = TWO_PI * detuning
    drive = TWO_PI * nu1
    dp = -2.0 * drive * im
    dx = rot * im - kappa * x
    dim = -rot * x - drive * (q - p) - kappa * im
    return np.stack([dp, -dp, dx, dim])


def _to_vector(rho: DensityMatrix2) -> np.ndarray:
    c = rho.coherence
    return np.array([rho.p_up, rho.p_down, c.real, c.imag])


def _to_density(y: np.ndarray, opts: EvolutionSettings) -> DensityMatrix2:
    state = DensityMatrix2.unchecked(y[0], y[1], complex(y[2], y[3]))
    state.validate(hermitian_tol=opts.hermitian_tol, trace_tol=opts.trace_tol, positivity_tol=opts.positivity_tol)
    return state


def _check_batch(final: np.ndarray, opts: EvolutionSettings) -> None:
    """Trace and positivity of final states; Hermiticity holds by construction of the vector form"""
    p, q, x, im = final
    trace_error = np.max(np.abs(p + q - 1.0))
    min_eigenvalue = np.min(0.5 * ((p + q) - np.sqrt((p - q) ** 2 + 4.0 * (x ** 2 + im ** 2))))
    if not np.isfinite(trace_error) or trace_error > opts.trace_tol:
        raise NumericalInstabilityError(f"trace drifted by {trace_error:.3e}")
    if min_eigenvalue < -opts.positivity_tol:
        raise NumericalInstabilityError(f"state lost positivity (eigenvalue {min_eigenvalue:.3e})")


def _integrate_fixed(fun: RhsFunction, t0: float, t1: float, y0: np.ndarray, step: float,
                     store: bool) -> Tuple[np.ndarray, np.ndarray]:
    """Dormand-Prince 5(4) at constant step; the embedded estimate is only logged"""
    n_steps = max(1, int(math.ceil((t1 - t0) / step)))
    grid = np.linspace(t0, t1, n_steps + 1)
    a, b, c, e = RK45.A, RK45.B, RK45.C, RK45.E
    n_stages = RK45.n_stages

    y = np.array(y0, dtype=float)
    k = np.empty((n_stages + 1, y.size))
    stored = [y.copy()] if store else []
    worst_error = 0.0
    for i in range(n_steps):
        t, h = grid[i], grid[i + 1] - grid[i]
        k[0] = fun(t, y)
        for stage in range(1, n_stages):
            dy = h * (k[:stage].T @ a[stage, :stage])
            k[stage] = fun(t + c[stage] * h, y + dy)
        y_new = y + h * (k[:-1].T @ b)
        k[-1] = fun(grid[i + 1], y_new)
        worst_error = max(worst_error, float(np.max(np.abs(h * (k.T @ e)))))
        y = y_new
        if store:
            stored.append(y.copy())

    log.debug("fixed_step_done", steps=n_steps, max_local_error=worst_error)
    if store:
        return grid, np.array(stored).T
    return np.array([t0, t1]), np.stack([np.asarray(y0, dtype=float), y], axis=1)


def _integrate(fun: RhsFunction, t1: float, y0: np.ndarray, opts: EvolutionSettings, max_step: float,
               store: bool, tol_scale: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    if opts.method == IntegrationMethod.FIXED:
        return _integrate_fixed(fun, 0.0, t1, y0, max_step, store)

    solution = solve_ivp(
        fun,
        (0.0, t1),
        y0,
        method=opts.adaptive_scheme,
        rtol=opts.rel_tol * tol_scale,
        atol=opts.abs_tol * tol_scale,
        max_step=max_step,
    )
    if solution.status < 0:
        failed_at = float(solution.t[-1]) if solution.t.size else 0.0
        raise IntegrationError(f"integrator failed: {solution.message}", failed_at)

    log.debug("adaptive_done", scheme=opts.adaptive_scheme, steps=int(solution.t.size - 1), nfev=solution.nfev)
    if store:
        return solution.t, solution.y
    return solution.t[[0, -1]], solution.y[:, [0, -1]]


def evolve(rho0: DensityMatrix2, s: SweepProtocol, p: SpinSystemParams,
           opts: EvolutionSettings = EvolutionSettings()) -> Trajectory:
    """Integrate the master equation over the whole sweep window [0, duration]"""
    kappa = dephasing_rate(p.t2, opts.dephasing_convention)
    rate = s.sweep_rate()
    up = s.direction == SweepDirection.UP
    nu1 = p.nu1

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return _bloch_derivative(sweep_detuning(t, s.span, rate, s.center_offset, up), nu1, kappa, y)

    times, ys = _integrate(rhs, s.duration, _to_vector(rho0), opts, opts.step_limit(s.duration),
                           opts.store_trajectory)
    states = [_to_density(y, opts) for y in ys.T]
    return Trajectory(times=np.asarray(times, dtype=float), states=states,
                      p_up=np.array([state.p_up for state in states]))


def simulate_sweep_pup(s: SweepProtocol, p: SpinSystemParams,
                       opts: EvolutionSettings = EvolutionSettings()) -> float:
    """Spin-up probability after the sweep for an electron loaded in |down>, before readout"""
    trajectory = evolve(DensityMatrix2.spin_down(), s, p, opts.model_copy(update={'store_trajectory': False}))
    return float(min(1.0, max(0.0, trajectory.final.p_up)))


def simulate_sweep_series(sweep_times: Sequence[float], span: float, p: SpinSystemParams,
                          opts: EvolutionSettings = EvolutionSettings(), center_offset: float = 0.0,
                          direction: SweepDirection = SweepDirection.UP) -> np.ndarray:
    """
    simulate_sweep_pup for many sweep durations in one integration.

    In normalized time u = t/T_S the detuning no longer depends on T_S, so
    all durations share one right-hand side; each component is scaled by its
    own T_S. Durations are integrated in ascending order regardless of the
    input order, and the tolerance is tightened by sqrt(N) because the
    error norm is an RMS over all components.
    """
    durations = np.asarray(sweep_times, dtype=float)
    if durations.ndim != 1 or durations.size == 0:
        raise InvalidParameterError("sweep_times must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(durations)) or np.any(durations <= 0):
        raise InvalidParameterError("sweep times must be positive and finite")
    if not span > 0:
        raise InvalidParameterError(f"span must be positive, got {span}")

    order = np.argsort(durations, kind='stable')
    scale = durations[order]
    n = scale.size
    kappa = dephasing_rate(p.t2, opts.dephasing_convention)
    up = direction == SweepDirection.UP
    nu1 = p.nu1

    y0 = np.zeros((4, n))
    y0[1] = 1.0

    def rhs(u: float, flat: np.ndarray) -> np.ndarray:
        detuning = sweep_detuning(u, span, span, center_offset, up)
        return (_bloch_derivative(detuning, nu1, kappa, flat.reshape(4, n)) * scale).ravel()

    if opts.max_step is not None:
        max_step = min(1.0, opts.max_step / float(scale[-1]))
    else:
        max_step = opts.max_step_fraction
    _, ys = _integrate(rhs, 1.0, y0.ravel(), opts, max_step, store=False, tol_scale=1.0 / math.sqrt(n))

    final = ys[:, -1].reshape(4, n)
    _check_batch(final, opts)
    p_up = np.empty(n)
    p_up[order] = np.clip(final[0], 0.0, 1.0)
    return p_up


def _eigenstate_closest_to(h: np.ndarray, basis_index: int) -> np.ndarray:
    _, vectors = np.linalg.eigh(h)
    return vectors[:, int(np.argmax(np.abs(vectors[basis_index, :])))]


def adiabatic_transfer_probability(s: SweepProtocol, p: SpinSystemParams,
                                   opts: EvolutionSettings = EvolutionSettings()) -> float:
    """
    Probability of following the instantaneous eigenstate through the sweep.

    Starts in the eigenstate of H(0) that connects to |down> and reads the
    population of the eigenstate of H(T) that connects to |up>. Unlike the
    diabatic p_up this has no first-order ripple from the finite span, so it
    converges to 1 - P_D of the Landau-Zener formula quickly as the span
    grows.
    """
    start = _eigenstate_closest_to(hamiltonian_at(0.0, s, p.nu1), basis_index=1)
    end = _eigenstate_closest_to(hamiltonian_at(s.duration, s, p.nu1), basis_index=0)
    trajectory = evolve(DensityMatrix2.from_state_vector(start), s, p,
                        opts.model_copy(update={'store_trajectory': False}))
    final = trajectory.final.entries
    return float(np.real(end.conj() @ final @ end))


def ensemble_sweep_pup(s: SweepProtocol, p: SpinSystemParams, linewidth_fwhm: float,
                       opts: EvolutionSettings = EvolutionSettings(), nodes: int = 21) -> float:
    """p_up averaged over a Gaussian distribution of resonance offsets (Gauss-Hermite quadrature)"""
    if linewidth_fwhm < 0:
        raise InvalidParameterError(f"linewidth must be non-negative, got {linewidth_fwhm}")
    if linewidth_fwhm == 0:
        return simulate_sweep_pup(s, p, opts)
    x, w = hermegauss(nodes)
    sigma = linewidth_fwhm / FWHM_PER_SIGMA
    values = [
        simulate_sweep_pup(s.model_copy(update={'center_offset': s.center_offset + sigma * xi}), p, opts)
        for xi in x
    ]
    return float(np.dot(w, values) / np.sum(w))


def optimal_sweep_time(span: float, p: SpinSystemParams, t_min: float, t_max: float,
                       opts: EvolutionSettings = EvolutionSettings(),
                       center_offset: float = 0.0) -> Tuple[float, float]:
    """
    Sweep duration in [t_min, t_max] that maximizes the inversion, and that maximum.

    With finite T2 the inversion first rises (adiabaticity) and then falls
    (dephasing during the crossing), so a single interior maximum exists.
    """
    if not 0 < t_min < t_max:
        raise InvalidParameterError(f"need 0 < t_min < t_max, got {t_min}, {t_max}")

    def negative_pup(log_t: float) -> float:
        protocol = SweepProtocol(span=span, duration=math.exp(log_t), center_offset=center_offset)
        return -simulate_sweep_pup(protocol, p, opts)

    result = minimize_scalar(negative_pup, bounds=(math.log(t_min), math.log(t_max)), method='bounded',
                             options={'xatol': 1e-3})
    best_time = math.exp(result.x)
    log.info("optimal_sweep_time", sweep_time=best_time, p_up=-result.fun, evaluations=result.nfev)
    return best_time, float(-result.fun)

