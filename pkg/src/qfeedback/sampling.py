"""Seeded random matrices, states, and measurement models.

Everything takes an explicit ``numpy.random.Generator`` so ensembles are
reproducible from a single 64-bit seed and nothing touches global RNG state.
Measurement models come from Ginibre draws: form M_n = G_n†G_n, then
conjugate by (Σ M_n)^{-1/2} so the family resolves the identity.
"""

from __future__ import annotations

import math

import numpy as np

from .linalg import dagger, hermitize, matrix_function
from .measurement import MeasurementModel
from .thermo import DensityMatrix, Hamiltonian


def ginibre(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Square matrix of iid standard complex Gaussians."""
    return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    return hermitize(ginibre(dim, rng)) * scale


def random_hamiltonian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> Hamiltonian:
    return Hamiltonian.from_matrix(random_hermitian(dim, rng, scale))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish unitary: QR of a Ginibre draw with the R diagonal phased out."""
    q, r = np.linalg.qr(ginibre(dim, rng))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density_matrix(dim: int, rng: np.random.Generator) -> DensityMatrix:
    g = ginibre(dim, rng)
    m = g @ dagger(g)
    return DensityMatrix.from_matrix(m / np.trace(m).real)


def _positive_parts(dim: int, n_parts: int, rng: np.random.Generator) -> list[np.ndarray]:
    """PSD matrices M_n with Σ M_n = I, via inverse-square-root normalization."""
    parts = [dagger(g) @ g for g in (ginibre(dim, rng) for _ in range(n_parts))]
    total = hermitize(sum(parts))
    inv_sqrt = matrix_function(total, lambda x: 1.0 / math.sqrt(x))
    return [hermitize(inv_sqrt @ m @ inv_sqrt) for m in parts]


def random_bare_model(dim: int, n_outcomes: int, rng: np.random.Generator) -> MeasurementModel:
    """Positive operators P_n with Σ P_n² = I."""
    parts = _positive_parts(dim, n_outcomes, rng)
    ops = [matrix_function(m, lambda x: math.sqrt(max(x, 0.0))) for m in parts]
    return MeasurementModel.bare(ops)


def random_efficient_model(dim: int, n_outcomes: int, rng: np.random.Generator) -> MeasurementModel:
    """General operators A_n = G_n (Σ G†G)^{-1/2}; nontrivial polar parts."""
    gs = [ginibre(dim, rng) for _ in range(n_outcomes)]
    total = hermitize(sum(dagger(g) @ g for g in gs))
    inv_sqrt = matrix_function(total, lambda x: 1.0 / math.sqrt(x))
    return MeasurementModel.efficient([g @ inv_sqrt for g in gs])


def random_inefficient_model(
    dim: int,
    n_outcomes: int,
    rng: np.random.Generator,
    ops_per_outcome: int = 2,
) -> MeasurementModel:
    """Outcome groups of several Kraus operators each (information discarded)."""
    gs = [ginibre(dim, rng) for _ in range(n_outcomes * ops_per_outcome)]
    total = hermitize(sum(dagger(g) @ g for g in gs))
    inv_sqrt = matrix_function(total, lambda x: 1.0 / math.sqrt(x))
    normalized = [g @ inv_sqrt for g in gs]
    groups = [
        normalized[i * ops_per_outcome : (i + 1) * ops_per_outcome] for i in range(n_outcomes)
    ]
    return MeasurementModel.inefficient(groups)
