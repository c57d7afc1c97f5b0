"""States, Hamiltonians, and the thermodynamic functionals E, S, F.

Entropies are in nats (natural logs throughout); energies follow whatever
units the Hamiltonian carries.  Boltzmann's constant defaults to 1 and is a
plain scalar parameter everywhere it appears, so the package works in natural
units unless a caller says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidStateError,
    NonPositiveTemperatureError,
    NotADistributionError,
    NotHermitianError,
)
from .linalg import HERMITICITY_TOL, dagger, eig_hermitian, hermitize, is_hermitian, max_abs

STATE_TOL = 1e-10  # Hermiticity / trace / eigenvalue-floor tolerance for states


def _freeze(m: np.ndarray) -> np.ndarray:
    m = np.ascontiguousarray(m, dtype=complex)
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class Hamiltonian:
    """Hermitian operator carrying the system's energy units."""

    matrix: np.ndarray

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Hamiltonian":
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"Hamiltonian must be square, got {m.shape}")
        if not is_hermitian(m, HERMITICITY_TOL):
            raise NotHermitianError("Hamiltonian is not Hermitian within 1e-10")
        return cls(matrix=_freeze(hermitize(m)))

    @classmethod
    def diagonal(cls, energies) -> "Hamiltonian":
        return cls.from_matrix(np.diag(np.asarray(energies, dtype=float)))

    @classmethod
    def zero(cls, dim: int) -> "Hamiltonian":
        return cls.from_matrix(np.zeros((dim, dim)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def shifted(self, offset: float) -> "Hamiltonian":
        """H + offset·I."""
        return Hamiltonian.from_matrix(self.matrix + offset * np.eye(self.dim))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, unit-trace state ρ.

    Construction goes through :meth:`from_matrix`, which tolerates (and
    repairs) eigenvalues down to -1e-10: such drift is clamped to zero, the
    spectrum renormalized, and the ``clamped`` flag set so ledgers can report
    it.  Anything worse raises :class:`InvalidStateError`.
    """

    matrix: np.ndarray
    clamped: bool = False

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, where: str = "state") -> "DensityMatrix":
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"{where}: must be square, got {m.shape}")
        if not is_hermitian(m, STATE_TOL):
            raise InvalidStateError(
                f"{where}: not Hermitian within {STATE_TOL:g} "
                f"(residual {max_abs(m - dagger(m)):.3e})"
            )
        m = hermitize(m)
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > STATE_TOL:
            raise InvalidStateError(f"{where}: trace {tr!r} is not 1 within {STATE_TOL:g}")
        m = m / tr
        dec = eig_hermitian(m)
        lam_min = float(dec.eigenvalues[-1])
        if lam_min < -STATE_TOL:
            raise InvalidStateError(
                f"{where}: minimum eigenvalue {lam_min:.3e} below -{STATE_TOL:g}"
            )
        if lam_min < 0.0:
            lam = np.clip(dec.eigenvalues, 0.0, None)
            lam = lam / lam.sum()
            v = dec.eigenvectors
            m = hermitize(v @ np.diag(lam.astype(complex)) @ dagger(v))
            return cls(matrix=_freeze(m), clamped=True)
        return cls(matrix=_freeze(m), clamped=False)

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "DensityMatrix":
        """Pure state |ψ⟩⟨ψ| from a (not necessarily normalized) vector."""
        v = np.asarray(vector, dtype=complex).reshape(-1)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise InvalidStateError("cannot build a state from the zero vector")
        v = v / norm
        return cls(matrix=_freeze(np.outer(v, v.conj())), clamped=False)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(matrix=_freeze(np.eye(dim, dtype=complex) / dim), clamped=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def spectrum(self) -> np.ndarray:
        """Eigenvalues, descending."""
        return eig_hermitian(self.matrix).eigenvalues


@dataclass(frozen=True)
class ThermoReading:
    """Snapshot of E, S, and F for one state; T recorded only when the state
    is declared thermal at that temperature."""

    energy: float
    entropy: float
    free_energy: float
    temperature: float | None = None


def thermal_state(h: Hamiltonian, temperature: float, k: float = 1.0) -> DensityMatrix:
    """Gibbs state exp(-H/(kT)) / Z.

    The spectrum is shifted by the ground energy before exponentiating, which
    cancels in the normalization and avoids overflow at small T.
    """
    if temperature <= 0.0:
        raise NonPositiveTemperatureError(f"temperature must be > 0, got {temperature!r}")
    if k <= 0.0:
        raise ValueError(f"Boltzmann constant must be > 0, got {k!r}")
    dec = eig_hermitian(h.matrix)
    energies = dec.eigenvalues
    weights = np.exp(-(energies - energies.min()) / (k * temperature))
    weights = weights / weights.sum()
    v = dec.eigenvectors
    m = hermitize(v @ np.diag(weights.astype(complex)) @ dagger(v))
    return DensityMatrix.from_matrix(m, where="thermal state")


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S = -Tr[ρ ln ρ] in nats, with the 0·ln 0 = 0 convention."""
    lam = eig_hermitian(rho.matrix).eigenvalues
    if lam[-1] < -STATE_TOL:
        raise InvalidStateError(f"eigenvalue {lam[-1]:.3e} below -{STATE_TOL:g}")
    lam = np.clip(lam, 0.0, None)
    s = 0.0
    for p in lam:
        if p > 0.0:
            s -= p * math.log(p)
    return max(s, 0.0)


def average_energy(rho: DensityMatrix, h: Hamiltonian) -> float:
    """E = Tr[Hρ]."""
    if rho.dim != h.dim:
        raise DimensionMismatchError(f"state dim {rho.dim} != Hamiltonian dim {h.dim}")
    value = complex(np.trace(h.matrix @ rho.matrix))
    assert abs(value.imag) < 1e-10, f"Tr[Hρ] has imaginary part {value.imag:.3e}"
    return value.real


def free_energy(rho: DensityMatrix, h: Hamiltonian, temperature: float, k: float = 1.0) -> float:
    """Helmholtz free energy F = E - kT·S (S in nats)."""
    return average_energy(rho, h) - k * temperature * von_neumann_entropy(rho)


def thermo_reading(
    rho: DensityMatrix,
    h: Hamiltonian,
    temperature: float,
    k: float = 1.0,
    thermal: bool = False,
) -> ThermoReading:
    """E, S, F of a state at a reference temperature."""
    e = average_energy(rho, h)
    s = von_neumann_entropy(rho)
    return ThermoReading(
        energy=e,
        entropy=s,
        free_energy=e - k * temperature * s,
        temperature=temperature if thermal else None,
    )


def shannon_entropy(p) -> float:
    """-Σ p ln p in nats for a probability vector; clamps tiny negatives."""
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size and float(p.min()) < -1e-12:
        raise NotADistributionError(f"negative entry {p.min()!r}")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-9:
        raise NotADistributionError(f"entries sum to {total!r}, not 1 within 1e-9")
    p = np.clip(p, 0.0, None) / total
    s = 0.0
    for q in p:
        if q > 0.0:
            s -= q * math.log(q)
    return max(s, 0.0)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """½ Σ |eigenvalues of ρ - σ|; lies in [0, 1]."""
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(f"dims differ: {rho.dim} vs {sigma.dim}")
    lam = eig_hermitian(rho.matrix - sigma.matrix).eigenvalues
    return 0.5 * float(np.abs(lam).sum())
