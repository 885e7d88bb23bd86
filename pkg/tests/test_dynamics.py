# tests/test_dynamics.py

import math
from types import SimpleNamespace

import numpy as np
import pytest

from src.core.exceptions import IntegrationError, InvalidParameterError, NumericalInstabilityError
from src.domain.entities.evolution import DephasingConvention, EvolutionSettings, IntegrationMethod
from src.domain.entities.spin_system import SpinSystemParams
from src.domain.entities.sweep_protocol import SweepDirection, SweepProtocol
from src.domain.services import dynamics
from src.domain.services.dynamics import (
    adiabatic_transfer_probability,
    dephasing_rate,
    ensemble_sweep_pup,
    evolve,
    hamiltonian_at,
    lindblad_rhs,
    optimal_sweep_time,
    simulate_sweep_pup,
    simulate_sweep_series,
)
from src.domain.services.fidelity import ensemble_rabi_pup, pi_pulse_duration
from src.domain.services.landau_zener import inversion_prob_coherent, landau_zener_pd
from src.domain.value_objects.density_matrix import DensityMatrix2

SPAN = 25e6
NU1_HIGH = 839.1e3  # 30 uT
NU1_LOW = 246.1e3  # 8.8 uT
T2 = 44e-6


def _params(nu1, t2=math.inf):
    return SpinSystemParams(nu1=nu1, t2=t2)


class TestMasterEquation:
    def test_drive_builds_coherence_from_spin_down(self):
        h = 1e5 * dynamics.SIGMA_X
        derivative = lindblad_rhs(DensityMatrix2.spin_down(), h, math.inf)
        assert derivative[0, 1] == pytest.approx(-1j * 2 * math.pi * 1e5)
        assert derivative[0, 0] == 0.0

    def test_coherence_decay_rate(self):
        rho = DensityMatrix2.from_state_vector([1.0, 1.0])
        doubled = lindblad_rhs(rho, np.zeros((2, 2)), T2)
        conventional = lindblad_rhs(rho, np.zeros((2, 2)), T2, DephasingConvention.CONVENTIONAL)
        assert doubled[0, 1] == pytest.approx(-(2.0 / T2) * 0.5)
        assert conventional[0, 1] == pytest.approx(-(1.0 / T2) * 0.5)
        assert doubled[0, 0] == 0.0

    def test_derivative_is_hermitian_and_traceless(self):
        rho = DensityMatrix2.from_components(0.3, 0.7, 0.2 + 0.1j)
        s = SweepProtocol(span=SPAN, duration=1e-6)
        derivative = lindblad_rhs(rho, hamiltonian_at(0.2e-6, s, NU1_HIGH), T2)
        np.testing.assert_allclose(derivative, derivative.conj().T, atol=1e-6)
        assert abs(np.trace(derivative)) < 1e-6

    def test_hamiltonian_gap_at_resonance(self):
        s = SweepProtocol(span=SPAN, duration=1e-6)
        energies = np.linalg.eigvalsh(hamiltonian_at(0.5e-6, s, NU1_HIGH))
        assert energies[1] - energies[0] == pytest.approx(2 * NU1_HIGH, rel=1e-9)

    def test_dephasing_rate(self):
        assert dephasing_rate(math.inf) == 0.0
        assert dephasing_rate(T2) == pytest.approx(2.0 / T2)
        with pytest.raises(InvalidParameterError):
            dephasing_rate(0.0)


class TestSweep:
    def test_high_power_inversion(self):
        p = simulate_sweep_pup(SweepProtocol(span=SPAN, duration=6e-6), _params(NU1_HIGH, T2))
        assert 0.95 <= p <= 0.99

    def test_pi_half_sweep_without_dephasing(self):
        p = simulate_sweep_pup(SweepProtocol(span=SPAN, duration=7.25e-6), _params(NU1_LOW))
        assert p == pytest.approx(0.5, abs=0.05)

    def test_low_power_long_sweep_is_dephasing_limited(self):
        p = simulate_sweep_pup(SweepProtocol(span=SPAN, duration=50e-6), _params(NU1_LOW, T2))
        assert 0.8 < p < 0.95

    def test_off_resonant_sweep_does_not_invert(self):
        s = SweepProtocol(span=SPAN, duration=2e-6, center_offset=114.4e6)
        assert simulate_sweep_pup(s, _params(NU1_HIGH, T2)) < 0.01

    def test_no_drive(self):
        assert simulate_sweep_pup(SweepProtocol(span=SPAN, duration=1e-6), _params(0.0, T2)) == 0.0

    def test_direction_symmetry(self):
        s = SweepProtocol(span=SPAN, duration=3e-6)
        p = _params(NU1_LOW, T2)
        up = simulate_sweep_pup(s, p)
        down = simulate_sweep_pup(s.reversed(), p)
        assert abs(up - down) < 1e-9

    def test_dephasing_lowers_inversion(self):
        s = SweepProtocol(span=SPAN, duration=6e-6)
        values = [simulate_sweep_pup(s, _params(NU1_HIGH, t2)) for t2 in (math.inf, 200e-6, T2, 10e-6)]
        assert all(a >= b - 1e-9 for a, b in zip(values, values[1:]))
        assert values[-1] < values[0]

    def test_conventional_dephasing_is_weaker(self):
        s = SweepProtocol(span=SPAN, duration=20e-6)
        p = _params(NU1_HIGH, T2)
        doubled = simulate_sweep_pup(s, p)
        conventional = simulate_sweep_pup(s, p, EvolutionSettings(dephasing_convention=DephasingConvention.CONVENTIONAL))
        assert conventional > doubled

    def test_fixed_step_agrees_with_adaptive(self):
        s = SweepProtocol(span=SPAN, duration=2e-6)
        p = _params(NU1_HIGH, T2)
        adaptive = simulate_sweep_pup(s, p)
        fixed = simulate_sweep_pup(s, p, EvolutionSettings(method=IntegrationMethod.FIXED, max_step_fraction=5e-4))
        assert fixed == pytest.approx(adaptive, abs=1e-4)


class TestTrajectory:
    def test_invariants_along_dephased_sweep(self):
        s = SweepProtocol(span=SPAN, duration=6e-6)
        trajectory = evolve(DensityMatrix2.spin_down(), s, _params(NU1_HIGH, T2),
                            EvolutionSettings(store_trajectory=True))
        assert trajectory.times[0] == 0.0
        assert trajectory.times[-1] == pytest.approx(6e-6)
        for state in trajectory.states:
            assert abs(state.trace - 1.0) < 1e-9
            assert state.hermiticity_error == 0.0
            assert state.min_eigenvalue >= -1e-8

    def test_purity_conserved_without_dephasing(self):
        s = SweepProtocol(span=SPAN, duration=3e-6)
        trajectory = evolve(DensityMatrix2.spin_down(), s, _params(NU1_LOW), EvolutionSettings(store_trajectory=True))
        purities = np.array([state.purity for state in trajectory.states])
        assert np.max(np.abs(purities - 1.0)) < 1e-6

    def test_frame_columns(self):
        s = SweepProtocol(span=SPAN, duration=1e-6)
        trajectory = evolve(DensityMatrix2.spin_down(), s, _params(NU1_HIGH), EvolutionSettings(store_trajectory=True))
        frame = trajectory.to_frame()
        assert list(frame.columns) == ['time_s', 'rho00_re', 'rho01_re', 'rho01_im', 'rho11_re', 'p_up']
        assert len(frame) == len(trajectory.times)
        np.testing.assert_allclose(frame['rho00_re'] + frame['rho11_re'], 1.0, atol=1e-9)

    def test_integrator_failure_reports_time(self, monkeypatch):
        def failing_solver(*args, **kwargs):
            return SimpleNamespace(status=-1, message="step size underflow", t=np.array([0.0, 1.5e-7]))

        monkeypatch.setattr(dynamics, "solve_ivp", failing_solver)
        with pytest.raises(IntegrationError) as excinfo:
            simulate_sweep_pup(SweepProtocol(span=SPAN, duration=1e-6), _params(NU1_HIGH))
        assert excinfo.value.time == 1.5e-7
        assert excinfo.value.exit_code == 4


class TestInvariantChecks:
    @staticmethod
    def _final_state(monkeypatch, final):
        def integrate(fun, t1, y0, opts, max_step, store, tol_scale=1.0):
            return np.array([0.0, t1]), np.column_stack([y0, final])

        monkeypatch.setattr(dynamics, "_integrate", integrate)

    @pytest.mark.parametrize("final", [
        [0.3, 0.7 + 1e-7, 0.0, 0.0],  # trace off by 1e-7
        [0.5, 0.5, 0.5 + 1e-7, 0.0],  # eigenvalue -1e-7
    ])
    def test_breach_is_numerical_instability(self, monkeypatch, final):
        self._final_state(monkeypatch, final)
        s = SweepProtocol(span=SPAN, duration=1e-6)
        with pytest.raises(NumericalInstabilityError) as excinfo:
            simulate_sweep_pup(s, _params(NU1_HIGH))
        assert excinfo.value.exit_code == 4
        with pytest.raises(NumericalInstabilityError):
            simulate_sweep_series([1e-6], SPAN, _params(NU1_HIGH))

    def test_rounding_level_deviation_passes(self, monkeypatch):
        self._final_state(monkeypatch, [0.3, 0.7 + 1e-10, 0.0, 0.0])
        assert simulate_sweep_pup(SweepProtocol(span=SPAN, duration=1e-6), _params(NU1_HIGH)) == pytest.approx(0.3)
        assert simulate_sweep_series([1e-6], SPAN, _params(NU1_HIGH))[0] == pytest.approx(0.3)

    def test_default_tolerances(self):
        opts = EvolutionSettings()
        assert (opts.trace_tol, opts.hermitian_tol, opts.positivity_tol) == (1e-9, 1e-10, 1e-8)


class TestSweepSeries:
    TIMES = [4e-6, 0.5e-6, 2e-6, 1e-6, 8e-6]

    def test_matches_single_sweeps(self):
        p = _params(NU1_LOW, T2)
        series = simulate_sweep_series(self.TIMES, SPAN, p)
        single = [simulate_sweep_pup(SweepProtocol(span=SPAN, duration=t), p) for t in self.TIMES]
        np.testing.assert_allclose(series, single, atol=1e-6)

    def test_independent_of_input_order(self):
        p = _params(NU1_LOW, T2)
        forward = simulate_sweep_series(self.TIMES, SPAN, p)
        order = [2, 4, 0, 3, 1]
        shuffled = simulate_sweep_series([self.TIMES[i] for i in order], SPAN, p)
        np.testing.assert_array_equal(shuffled, forward[order])

    def test_down_sweeps(self):
        p = _params(NU1_LOW, T2)
        up = simulate_sweep_series(self.TIMES, SPAN, p)
        down = simulate_sweep_series(self.TIMES, SPAN, p, direction=SweepDirection.DOWN)
        np.testing.assert_allclose(up, down, atol=1e-9)

    @pytest.mark.parametrize("times", [[], [1e-6, -1e-6], [1e-6, math.nan]])
    def test_invalid_times(self, times):
        with pytest.raises(InvalidParameterError):
            simulate_sweep_series(times, SPAN, _params(NU1_LOW))


def _oracle_span(nu1, rate):
    return 50.0 * math.sqrt(rate) + 20.0 * nu1


def _diabatic_oracle_span(nu1, rate, budget=8e-4):
    """
    Span at which the diabatic p_up sits within `budget` of the
    infinite-span Landau-Zener value.

    A finite window leaves the drive mixing angle 4*nu1/span at both ends:
    the interference ripple is bounded by 8*nu1*sqrt(P_D*(1-P_D))/span and
    the end projection by 16*nu1**2/span**2.
    """
    p_d = landau_zener_pd(nu1, rate)
    s = math.sqrt(p_d * (1.0 - p_d))
    ratio = (-8.0 * s + math.sqrt(64.0 * s ** 2 + 64.0 * budget)) / 32.0  # nu1 / span
    return max(_oracle_span(nu1, rate), nu1 / ratio)


@pytest.mark.parametrize("nu1, rate", [(150e3, 1e13), (1e6, 1e12)])
def test_sweep_follows_landau_zener(nu1, rate):
    span = _diabatic_oracle_span(nu1, rate)
    s = SweepProtocol(span=span, duration=span / rate)
    assert simulate_sweep_pup(s, _params(nu1)) == pytest.approx(inversion_prob_coherent(nu1, rate), abs=1e-3)


def test_short_window_ripple_exceeds_oracle_tolerance():
    nu1, rate = 300e3, 1e12
    span = _oracle_span(nu1, rate)
    s = SweepProtocol(span=span, duration=span / rate)
    ideal = inversion_prob_coherent(nu1, rate)
    assert abs(adiabatic_transfer_probability(s, _params(nu1)) - ideal) < 1e-3
    p_d = landau_zener_pd(nu1, rate)
    bound = 8 * nu1 * math.sqrt(p_d * (1 - p_d)) / span + 16 * (nu1 / span) ** 2
    assert 1e-3 < abs(simulate_sweep_pup(s, _params(nu1)) - ideal) < bound


@pytest.mark.parametrize("nu1, rate", [(300e3, 1e12), (100e3, 1e11)])
def test_adiabatic_transfer_follows_landau_zener(nu1, rate):
    span = _oracle_span(nu1, rate)
    s = SweepProtocol(span=span, duration=span / rate)
    p = adiabatic_transfer_probability(s, _params(nu1))
    assert p == pytest.approx(inversion_prob_coherent(nu1, rate), abs=1e-3)


@pytest.mark.slow
@pytest.mark.parametrize("nu1", [50e3, 150e3, 300e3, 600e3, 1e6])
@pytest.mark.parametrize("rate", [1e11, 1e12, 1e13, 1e14])
def test_landau_zener_grid(nu1, rate):
    span = _diabatic_oracle_span(nu1, rate)
    s = SweepProtocol(span=span, duration=span / rate)
    opts = EvolutionSettings(rel_tol=1e-10, abs_tol=1e-12)
    assert simulate_sweep_pup(s, _params(nu1), opts) == pytest.approx(inversion_prob_coherent(nu1, rate), abs=1e-3)


@pytest.mark.slow
@pytest.mark.parametrize("nu1", [50e3, 150e3, 300e3, 600e3, 1e6])
@pytest.mark.parametrize("rate", [1e11, 1e12, 1e13, 1e14])
def test_adiabatic_landau_zener_grid(nu1, rate):
    span = _oracle_span(nu1, rate)
    s = SweepProtocol(span=span, duration=span / rate)
    p = adiabatic_transfer_probability(s, _params(nu1))
    assert p == pytest.approx(inversion_prob_coherent(nu1, rate), abs=1e-3)


class TestRobustness:
    def test_sweep_tolerates_line_broadening(self):
        s = SweepProtocol(span=SPAN, duration=6e-6)
        p = _params(NU1_HIGH)
        assert ensemble_sweep_pup(s, p, 5e6) > 0.9

    def test_pi_pulse_degrades_with_line_broadening(self):
        duration = pi_pulse_duration(NU1_HIGH)
        assert ensemble_rabi_pup(NU1_HIGH, duration, 0.0) == pytest.approx(1.0)
        assert ensemble_rabi_pup(NU1_HIGH, duration, 5e6) < 0.8

    def test_zero_linewidth_is_single_sweep(self):
        s = SweepProtocol(span=SPAN, duration=2e-6)
        p = _params(NU1_HIGH, T2)
        assert ensemble_sweep_pup(s, p, 0.0) == simulate_sweep_pup(s, p)


def test_optimal_sweep_time_with_dephasing():
    best_time, best_p = optimal_sweep_time(SPAN, _params(NU1_HIGH, T2), 0.5e-6, 30e-6)
    assert 2e-6 <= best_time <= 10e-6
    assert 0.95 <= best_p <= 0.99


def test_optimal_sweep_time_bounds():
    with pytest.raises(InvalidParameterError):
        optimal_sweep_time(SPAN, _params(NU1_HIGH, T2), 5e-6, 1e-6)
