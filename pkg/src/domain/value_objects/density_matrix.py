# src/domain/value_objects/density_matrix.py
"""
2x2 density matrix of the electron spin in the basis (|up>, |down>).

|up> is the +1 eigenstate of sigma_z. A freshly loaded electron is |down>,
i.e. diag(0, 1).
"""

from dataclasses import dataclass, field

import numpy as np

from src.core.exceptions import NumericalInstabilityError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-8


@dataclass(frozen=True)
class DensityMatrix2:
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.shape != (2, 2):
            raise ValueError(f"density matrix must be 2x2, got shape {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)
        self.validate()

    @classmethod
    def spin_down(cls) -> 'DensityMatrix2':
        return cls(np.diag([0.0, 1.0]))

    @classmethod
    def spin_up(cls) -> 'DensityMatrix2':
        return cls(np.diag([1.0, 0.0]))

    @classmethod
    def from_components(cls, rho00: float, rho11: float, rho01: complex) -> 'DensityMatrix2':
        return cls(np.array([[rho00, rho01], [np.conj(rho01), rho11]], dtype=complex))

    @classmethod
    def unchecked(cls, rho00: float, rho11: float, rho01: complex) -> 'DensityMatrix2':
        """Build without validation; callers check with their own tolerances via validate()"""
        entries = np.array([[rho00, rho01], [np.conj(rho01), rho11]], dtype=complex)
        entries.setflags(write=False)
        state = object.__new__(cls)
        object.__setattr__(state, 'entries', entries)
        return state

    @classmethod
    def from_state_vector(cls, psi) -> 'DensityMatrix2':
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    def validate(self, hermitian_tol: float = HERMITIAN_TOL, trace_tol: float = TRACE_TOL,
                 positivity_tol: float = POSITIVITY_TOL) -> None:
        """Raise NumericalInstabilityError when any invariant is broken"""
        if not np.all(np.isfinite(self.entries)):
            raise NumericalInstabilityError("density matrix has non-finite entries")
        deviation = self.hermiticity_error
        if deviation > hermitian_tol:
            raise NumericalInstabilityError(f"density matrix not Hermitian (max deviation {deviation:.3e})")
        trace_error = abs(self.trace - 1.0)
        if trace_error > trace_tol:
            raise NumericalInstabilityError(f"density matrix trace off by {trace_error:.3e}")
        if self.min_eigenvalue < -positivity_tol:
            raise NumericalInstabilityError(f"density matrix not positive (eigenvalue {self.min_eigenvalue:.3e})")

    @property
    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    @property
    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.entries)))

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    @property
    def p_up(self) -> float:
        return float(np.real(self.entries[0, 0]))

    @property
    def p_down(self) -> float:
        return float(np.real(self.entries[1, 1]))

    @property
    def coherence(self) -> complex:
        return complex(self.entries[0, 1])

    def bloch_vector(self) -> np.ndarray:
        c = self.coherence
        return np.array([2.0 * c.real, -2.0 * c.imag, self.p_up - self.p_down])
