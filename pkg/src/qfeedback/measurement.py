"""Measurement models and their application to states.

Four model kinds share one internal form, a tuple of Kraus-operator groups
indexed by outcome:

* bare        - one positive operator P_n per outcome, Σ P_n² = I
* efficient   - one general operator A_n per outcome, Σ A_n†A_n = I
* inefficient - several operators A_nj per outcome (information discarded)
* weak        - two-outcome family P_± = sqrt((I ± εB)/2) built from a
                Hermitian generator B with ||B|| ≤ 1 and strength ε

Applying a model to a state yields per-outcome records carrying probability,
post-measurement state, entropy, and average energy; the average entropy drop
and the average energy added by the measurement derive from those records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionMismatchError, InvalidModelError, NotHermitianError
from .linalg import (
    PolarFactors,
    dagger,
    eig_hermitian,
    hermitize,
    is_hermitian,
    matrix_function,
    max_abs,
    polar_decompose,
)
from .thermo import DensityMatrix, Hamiltonian, average_energy, von_neumann_entropy

COMPLETENESS_TOL = 1e-10
DEFAULT_P_FLOOR = 1e-14


class ModelKind(str, Enum):
    BARE = "bare"
    EFFICIENT = "efficient"
    INEFFICIENT = "inefficient"
    WEAK = "weak"


@dataclass(frozen=True)
class MeasurementModel:
    """Tagged family of measurement operators, grouped by outcome."""

    kind: ModelKind
    groups: tuple[tuple[np.ndarray, ...], ...]
    generator: np.ndarray | None = None  # weak models only
    strength: float | None = None  # weak models only

    @classmethod
    def bare(cls, operators: Sequence[np.ndarray]) -> "MeasurementModel":
        ops = tuple(np.asarray(p, dtype=complex) for p in operators)
        return cls(kind=ModelKind.BARE, groups=tuple((p,) for p in ops))

    @classmethod
    def efficient(cls, operators: Sequence[np.ndarray]) -> "MeasurementModel":
        ops = tuple(np.asarray(a, dtype=complex) for a in operators)
        return cls(kind=ModelKind.EFFICIENT, groups=tuple((a,) for a in ops))

    @classmethod
    def inefficient(cls, groups: Sequence[Sequence[np.ndarray]]) -> "MeasurementModel":
        packed = tuple(tuple(np.asarray(a, dtype=complex) for a in g) for g in groups)
        if any(len(g) == 0 for g in packed):
            raise InvalidModelError("every outcome needs at least one operator")
        return cls(kind=ModelKind.INEFFICIENT, groups=packed)

    @classmethod
    def weak(cls, generator: np.ndarray, strength: float) -> "MeasurementModel":
        """Two-outcome weak model P_± = sqrt((I ± εB)/2)."""
        b = np.asarray(generator, dtype=complex)
        if not is_hermitian(b):
            raise NotHermitianError("weak-measurement generator must be Hermitian")
        norm = float(np.abs(eig_hermitian(b).eigenvalues).max()) if b.size else 0.0
        if norm > 1.0 + 1e-12:
            raise InvalidModelError(f"generator norm {norm!r} exceeds 1")
        if not 0.0 < strength < 1.0:
            raise InvalidModelError(f"weak strength must lie in (0, 1), got {strength!r}")
        eye = np.eye(b.shape[0], dtype=complex)
        sqrt = lambda x: math.sqrt(max(x, 0.0))
        p_plus = matrix_function((eye + strength * b) / 2.0, sqrt)
        p_minus = matrix_function((eye - strength * b) / 2.0, sqrt)
        return cls(
            kind=ModelKind.WEAK,
            groups=((p_plus,), (p_minus,)),
            generator=b,
            strength=float(strength),
        )

    @property
    def dim(self) -> int:
        return self.groups[0][0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.groups)

    def completeness_residual(self) -> float:
        """Max-abs entry of Σ A†A - I."""
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for group in self.groups:
            for a in group:
                total += dagger(a) @ a
        return max_abs(total - np.eye(self.dim))


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of model validation; never raised, always returned."""

    ok: bool
    completeness_residual: float
    # (outcome index, min eigenvalue or hermiticity residual) for bad bare ops
    non_positive: tuple[tuple[int, float], ...] = ()

    def describe(self) -> str:
        lines = [f"completeness residual: {self.completeness_residual:.3e}"]
        for idx, value in self.non_positive:
            lines.append(f"operator {idx}: not positive (worst value {value:.3e})")
        lines.append("ok" if self.ok else "INVALID")
        return "\n".join(lines)


def validate(model: MeasurementModel) -> ValidationReport:
    """Check completeness and, for bare operators, positivity."""
    residual = model.completeness_residual()
    bad: list[tuple[int, float]] = []
    if model.kind in (ModelKind.BARE, ModelKind.WEAK):
        for n, group in enumerate(model.groups):
            p = group[0]
            if not is_hermitian(p):
                bad.append((n, max_abs(p - dagger(p))))
                continue
            lam_min = float(eig_hermitian(p).eigenvalues[-1])
            if lam_min < -COMPLETENESS_TOL:
                bad.append((n, lam_min))
    ok = residual <= COMPLETENESS_TOL and not bad
    return ValidationReport(ok=ok, completeness_residual=residual, non_positive=tuple(bad))


@dataclass(frozen=True)
class OutcomeRecord:
    """One measurement branch: index n, probability p_n, post-state ρ_n,
    entropy S_n (nats), and average energy E_n."""

    n: int
    probability: float
    state: DensityMatrix
    entropy: float
    energy: float


@dataclass(frozen=True)
class MeasurementOutcomes(Sequence):
    """The branches produced by one measurement, plus drop bookkeeping.

    Behaves as a sequence of :class:`OutcomeRecord`; ``dropped`` lists the
    outcome indices whose probability fell below the floor and were removed,
    with the remaining probabilities renormalized.
    """

    records: tuple[OutcomeRecord, ...]
    dropped: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def __iter__(self) -> Iterator[OutcomeRecord]:
        return iter(self.records)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([r.probability for r in self.records])


def bare_part(a: np.ndarray) -> PolarFactors:
    """Split a measurement operator A = U P into its feedback-absorbable
    unitary U and the bare (positive) part P that does the information
    extraction."""
    return polar_decompose(a)


def apply(
    model: MeasurementModel,
    rho: DensityMatrix,
    h: Hamiltonian,
    p_floor: float = DEFAULT_P_FLOOR,
) -> MeasurementOutcomes:
    """Apply a measurement to ρ: branch n gets Σ_j A_nj ρ A_nj† / p_n with
    p_n = Σ_j Tr[A_nj† A_nj ρ].

    Outcomes with p_n < ``p_floor`` are dropped (their conditional state is
    undefined) and the surviving probabilities renormalized proportionally.
    """
    if model.dim != rho.dim:
        raise DimensionMismatchError(f"model dim {model.dim} != state dim {rho.dim}")
    if rho.dim != h.dim:
        raise DimensionMismatchError(f"state dim {rho.dim} != Hamiltonian dim {h.dim}")
    report = validate(model)
    if not report.ok:
        raise InvalidModelError(f"model failed validation:\n{report.describe()}")

    raw: list[tuple[int, float, np.ndarray]] = []
    dropped: list[int] = []
    for n, group in enumerate(model.groups):
        numerator = np.zeros((rho.dim, rho.dim), dtype=complex)
        for a in group:
            numerator += a @ rho.matrix @ dagger(a)
        p = float(np.trace(numerator).real)
        if p < p_floor:
            dropped.append(n)
            continue
        raw.append((n, p, numerator))

    total = sum(p for _, p, _ in raw)
    records = []
    for n, p, numerator in raw:
        state = DensityMatrix.from_matrix(numerator / p, where=f"outcome {n}")
        records.append(
            OutcomeRecord(
                n=n,
                probability=p / total,
                state=state,
                entropy=von_neumann_entropy(state),
                energy=average_energy(state, h),
            )
        )
    return MeasurementOutcomes(records=tuple(records), dropped=tuple(dropped))


def average_post_state(records: Sequence[OutcomeRecord]) -> DensityMatrix:
    """ρ_after = Σ p_n ρ_n."""
    acc = np.zeros_like(records[0].state.matrix)
    for r in records:
        acc = acc + r.probability * r.state.matrix
    return DensityMatrix.from_matrix(acc, where="average post-measurement state")


def measurement_energy_cost(records: Sequence[OutcomeRecord], e_initial: float) -> float:
    """Average energy the measurement pumped into the system:
    ΔE_meas = Σ p_n E_n - E."""
    return sum(r.probability * r.energy for r in records) - e_initial


def entropy_reduction(records: Sequence[OutcomeRecord], s_initial: float) -> float:
    """Average entropy reduction ΔS_meas = S - Σ p_n S_n.  Can be negative
    for inefficient measurements."""
    return s_initial - sum(r.probability * r.entropy for r in records)
