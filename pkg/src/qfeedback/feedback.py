"""The work-extraction protocol: per-outcome feedback, isothermal expansion,
and the per-cycle ledgers that carry the second-law accounting.

Per outcome, the controller (i) rotates the post-measurement state into the
energy eigenbasis, (ii) orders populations so they fall with rising energy,
(iii) retunes the level spacings so those populations are exactly thermal at
the bath temperature, and (iv) shifts all levels to restore the original
average energy.  Steps (i)-(iv) extract E_n - E of work; the closing
isothermal expansion back to the original Hamiltonian extracts kT(S - S_n)
more and leaves the system in its initial thermal state.

Energy bookkeeping convention: unitary steps change Tr[Hρ] at fixed H and
count as work; Hamiltonian retunings at fixed ρ contribute work Tr[ΔH ρ];
the isothermal stage draws heat kT·(S - S_n) from the bath.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateStateError,
    NonPositiveTemperatureError,
    PlanMismatchError,
)
from .linalg import dagger, eig_hermitian, hermitize
from .measurement import (
    DEFAULT_P_FLOOR,
    MeasurementModel,
    MeasurementOutcomes,
    OutcomeRecord,
    apply,
)
from .thermo import (
    DensityMatrix,
    Hamiltonian,
    average_energy,
    shannon_entropy,
    thermal_state,
    trace_distance,
    von_neumann_entropy,
)

DEFAULT_LAMBDA_FLOOR = 1e-12


@dataclass(frozen=True)
class FeedbackPlan:
    """Reversible operations for one measurement outcome.

    ``basis_unitary`` implements steps (i)+(ii): it maps the state's
    eigenbasis onto the energy eigenbasis with populations sorted against
    energy.  ``target_hamiltonian`` holds the retuned levels of step (iii),
    ε_j = -kT ln λ_j, and ``shift`` is the uniform offset of step (iv) that
    restores the initial average energy.
    """

    outcome: int
    basis_unitary: np.ndarray
    target_hamiltonian: Hamiltonian
    shift: float
    populations: np.ndarray  # clamped spectrum, descending
    clamped: bool

    @property
    def final_hamiltonian(self) -> Hamiltonian:
        """H_n + c_n·I, the Hamiltonian in force after step (iv)."""
        return self.target_hamiltonian.shifted(self.shift)


@dataclass(frozen=True)
class OutcomeLedger:
    """Per-outcome slice of the cycle ledger."""

    n: int
    probability: float
    entropy: float  # S_n
    energy: float  # E_n
    delta_e: float  # E_n - E
    work: float  # ΔW_n = step work + isothermal work


@dataclass(frozen=True)
class CycleLedger:
    """Everything one feedback cycle did, with the second-law bottom line.

    ``work_total`` is the average work extracted over the whole cycle
    including the recovery of measurement work; ``work_fb`` nets out the
    energy the measurement itself injected, and for a closed cycle equals
    kT·ΔS_meas.  ``delta_s_tot`` = S({p_n}) - ΔS_meas is the entropy change
    of the universe once the controller's record is reset.
    """

    energy_initial: float
    entropy_initial: float
    temperature: float
    k: float
    outcomes: tuple[OutcomeLedger, ...]
    delta_e_meas: float
    delta_s_meas: float
    shannon_outcomes: float
    work_total: float
    work_fb: float
    delta_s_tot: float
    heat_from_bath: float
    closure_distance: float
    clamp_flag: bool
    dropped_outcomes: tuple[int, ...]


@dataclass(frozen=True)
class TransformResult:
    """Cycle ledger for a run that ends on a different Hamiltonian, plus the
    free-energy drop ΔF = F₁ - F₂ the controller banked on top of kT·ΔS_meas."""

    delta_f: float
    free_energy_initial: float
    free_energy_final: float
    work_fb: float
    ledger: CycleLedger


@dataclass(frozen=True)
class ContinuousResult:
    """Repeated weak-measurement cycles plus the ε²-scaling readout."""

    epsilon: float
    n_steps: int
    per_cycle: CycleLedger
    cumulative_work_total: float
    cumulative_work_fb: float
    delta_s_meas_per_step: float
    scaling_ratio: float  # ΔS_meas(ε) / ε²


def plan_feedback(
    record: OutcomeRecord,
    h: Hamiltonian,
    temperature: float,
    k: float = 1.0,
    e_initial: float = 0.0,
    lambda_floor: float = DEFAULT_LAMBDA_FLOOR,
) -> FeedbackPlan:
    """Build the steps (i)-(iv) plan for one outcome.

    Populations below ``lambda_floor`` are clamped to the floor and the
    spectrum renormalized before taking ε_j = -kT ln λ_j, so the retuned
    levels stay finite even for pure outcomes.
    """
    if temperature <= 0.0:
        raise NonPositiveTemperatureError(f"temperature must be > 0, got {temperature!r}")
    dec_state = eig_hermitian(record.state.matrix)
    lam_raw = dec_state.eigenvalues
    if float(lam_raw.max()) < lambda_floor:
        raise DegenerateStateError("entire spectrum below the clamping floor")
    clamped = bool(lam_raw.min() < lambda_floor)
    lam = np.maximum(lam_raw, lambda_floor)
    lam = lam / lam.sum()

    dec_h = eig_hermitian(h.matrix)
    # ascending energies, so the descending populations land on them in order
    energy_basis = dec_h.eigenvectors[:, ::-1]
    basis_unitary = energy_basis @ dagger(dec_state.eigenvectors)

    levels = -k * temperature * np.log(lam)
    target = Hamiltonian.from_matrix(
        energy_basis @ np.diag(levels.astype(complex)) @ dagger(energy_basis)
    )
    shift = e_initial - float(np.dot(lam, levels))
    return FeedbackPlan(
        outcome=record.n,
        basis_unitary=basis_unitary,
        target_hamiltonian=target,
        shift=shift,
        populations=lam,
        clamped=clamped,
    )


def execute_plan(
    record: OutcomeRecord,
    plan: FeedbackPlan,
    h: Hamiltonian,
    temperature: float,
    k: float = 1.0,
    tol: float = 1e-9,
) -> tuple[DensityMatrix, float]:
    """Run steps (i)-(iv), returning the resulting thermal state and the work
    extracted, summed from per-step bookkeeping.

    Raises :class:`PlanMismatchError` if the landed state is not thermal for
    the plan's final Hamiltonian, or if the rotation failed to preserve the
    outcome's entropy.
    """
    u = plan.basis_unitary
    rotated = DensityMatrix.from_matrix(
        hermitize(u @ record.state.matrix @ dagger(u)), where="rotated outcome state"
    )
    # unitary stage: energy change at fixed H is work on/off the system
    work_unitary = average_energy(record.state, h) - average_energy(rotated, h)
    # Hamiltonian stage: retune levels at fixed state, work = -Tr[ΔH ρ]
    h_final = plan.final_hamiltonian
    work_retune = -float(np.trace((h_final.matrix - h.matrix) @ rotated.matrix).real)

    expected = thermal_state(h_final, temperature, k)
    deviation = trace_distance(rotated, expected)
    if deviation > tol:
        raise PlanMismatchError(
            f"outcome {plan.outcome}: landed state is {deviation:.3e} from thermal "
            f"(tolerance {tol:g})"
        )
    entropy_drift = abs(von_neumann_entropy(rotated) - record.entropy)
    if entropy_drift > tol:
        raise PlanMismatchError(
            f"outcome {plan.outcome}: entropy drifted by {entropy_drift:.3e}"
        )
    return rotated, work_unitary + work_retune


def isothermal_work(s_target: float, s_n: float, temperature: float, k: float = 1.0) -> float:
    """Work extracted by quasi-static isothermal expansion, kT·(S_target - S_n)."""
    return k * temperature * (s_target - s_n)


def quasi_static_work(
    h_start: Hamiltonian,
    h_end: Hamiltonian,
    temperature: float,
    n_steps: int,
    k: float = 1.0,
) -> float:
    """Numerically integrate the isothermal work along the linear Hamiltonian
    path H(s) = (1-s)·H_start + s·H_end, re-thermalizing at every step.

    Converges to F(H_start, T) - F(H_end, T) with O(1/N) error; this is the
    independent validator for :func:`isothermal_work`.
    """
    if temperature <= 0.0:
        raise NonPositiveTemperatureError(f"temperature must be > 0, got {temperature!r}")
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps!r}")
    a = h_start.matrix
    b = h_end.matrix
    work_out = 0.0
    for j in range(n_steps):
        s0 = j / n_steps
        s1 = (j + 1) / n_steps
        h_here = Hamiltonian.from_matrix((1.0 - s0) * a + s0 * b)
        rho_here = thermal_state(h_here, temperature, k)
        dh = (s1 - s0) * (b - a)
        work_out -= float(np.trace(dh @ rho_here.matrix).real)
    return work_out


@dataclass(frozen=True)
class _BranchResult:
    ledger: OutcomeLedger
    endpoint: DensityMatrix
    clamped: bool


def _run_branches(
    outcomes: MeasurementOutcomes,
    h_start: Hamiltonian,
    h_end: Hamiltonian,
    temperature: float,
    k: float,
    e_initial: float,
    target_energy: float,
    target_entropy: float,
    lambda_floor: float,
) -> list[_BranchResult]:
    branches = []
    for record in outcomes:
        plan = plan_feedback(
            record, h_start, temperature, k=k, e_initial=e_initial, lambda_floor=lambda_floor
        )
        state, work_steps = execute_plan(record, plan, h_start, temperature, k=k)
        # isothermal stage from the branch Hamiltonian to h_end: work equals
        # the free-energy drop at fixed T; state tracks the instantaneous
        # thermal state, so the endpoint is thermal for h_end exactly.
        work_iso = (e_initial - target_energy) + isothermal_work(
            target_entropy, record.entropy, temperature, k
        )
        endpoint = thermal_state(h_end, temperature, k)
        branches.append(
            _BranchResult(
                ledger=OutcomeLedger(
                    n=record.n,
                    probability=record.probability,
                    entropy=record.entropy,
                    energy=record.energy,
                    delta_e=record.energy - e_initial,
                    work=work_steps + work_iso,
                ),
                endpoint=endpoint,
                clamped=plan.clamped or state.clamped,
            )
        )
    return branches


def _run(
    h1: Hamiltonian,
    h2: Hamiltonian,
    temperature: float,
    model: MeasurementModel,
    k: float,
    lambda_floor: float,
    p_floor: float,
) -> tuple[CycleLedger, float, float]:
    rho_initial = thermal_state(h1, temperature, k)
    e_initial = average_energy(rho_initial, h1)
    s_initial = von_neumann_entropy(rho_initial)
    f_initial = e_initial - k * temperature * s_initial

    rho_target = thermal_state(h2, temperature, k)
    e_target = average_energy(rho_target, h2)
    s_target = von_neumann_entropy(rho_target)
    f_target = e_target - k * temperature * s_target

    outcomes = apply(model, rho_initial, h1, p_floor=p_floor)
    branches = _run_branches(
        outcomes,
        h1,
        h2,
        temperature,
        k,
        e_initial,
        e_target,
        s_target,
        lambda_floor,
    )

    p = np.array([b.ledger.probability for b in branches])
    delta_e_meas = float(sum(b.ledger.probability * b.ledger.energy for b in branches)) - e_initial
    delta_s_meas = s_initial - float(
        sum(b.ledger.probability * b.ledger.entropy for b in branches)
    )
    work_total = float(sum(b.ledger.probability * b.ledger.work for b in branches))
    work_fb = work_total - delta_e_meas

    final = DensityMatrix.from_matrix(
        sum(b.ledger.probability * b.endpoint.matrix for b in branches),
        where="cycle endpoint",
    )
    closure = trace_distance(final, rho_target)

    shannon = shannon_entropy(p)
    ledger = CycleLedger(
        energy_initial=e_initial,
        entropy_initial=s_initial,
        temperature=temperature,
        k=k,
        outcomes=tuple(b.ledger for b in branches),
        delta_e_meas=delta_e_meas,
        delta_s_meas=delta_s_meas,
        shannon_outcomes=shannon,
        work_total=work_total,
        work_fb=work_fb,
        delta_s_tot=shannon - delta_s_meas,
        heat_from_bath=k * temperature * delta_s_meas,
        closure_distance=closure,
        clamp_flag=bool(
            rho_initial.clamped or final.clamped or any(b.clamped for b in branches)
        ),
        dropped_outcomes=outcomes.dropped,
    )
    return ledger, f_initial, f_target


def run_cycle(
    h: Hamiltonian,
    temperature: float,
    model: MeasurementModel,
    k: float = 1.0,
    lambda_floor: float = DEFAULT_LAMBDA_FLOOR,
    p_floor: float = DEFAULT_P_FLOOR,
) -> CycleLedger:
    """One closed cycle: thermal start, measure, feed back per outcome, expand
    isothermally home.  The ledger's ``work_fb`` equals kT·ΔS_meas up to
    numerical error."""
    ledger, _, _ = _run(h, h, temperature, model, k, lambda_floor, p_floor)
    return ledger


def run_transform(
    h1: Hamiltonian,
    h2: Hamiltonian,
    temperature: float,
    model: MeasurementModel,
    k: float = 1.0,
    lambda_floor: float = DEFAULT_LAMBDA_FLOOR,
    p_floor: float = DEFAULT_P_FLOOR,
) -> TransformResult:
    """Like :func:`run_cycle` but the closing expansion targets the thermal
    state of ``h2``; the net work picks up the free-energy drop ΔF."""
    ledger, f1, f2 = _run(h1, h2, temperature, model, k, lambda_floor, p_floor)
    return TransformResult(
        delta_f=f1 - f2,
        free_energy_initial=f1,
        free_energy_final=f2,
        work_fb=ledger.work_fb,
        ledger=ledger,
    )


def run_continuous(
    h: Hamiltonian,
    temperature: float,
    generator: np.ndarray,
    epsilon: float,
    n_steps: int,
    k: float = 1.0,
    lambda_floor: float = DEFAULT_LAMBDA_FLOOR,
    p_floor: float = DEFAULT_P_FLOOR,
) -> ContinuousResult:
    """Drive repeated weak-measurement cycles, one per time step.

    Each cycle returns the system to its thermal state, so the steps are
    independent and identically ledgered; the result reports the cumulative
    work and the per-step ΔS_meas(ε)/ε² ratio that exposes the quadratic
    weak-measurement scaling.
    """
    if not 1e-6 <= epsilon <= 0.5:
        raise ValueError(f"epsilon must lie in [1e-6, 0.5], got {epsilon!r}")
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps!r}")
    model = MeasurementModel.weak(generator, epsilon)
    ledgers = [
        run_cycle(h, temperature, model, k=k, lambda_floor=lambda_floor, p_floor=p_floor)
        for _ in range(n_steps)
    ]
    first = ledgers[0]
    return ContinuousResult(
        epsilon=epsilon,
        n_steps=n_steps,
        per_cycle=first,
        cumulative_work_total=float(sum(l.work_total for l in ledgers)),
        cumulative_work_fb=float(sum(l.work_fb for l in ledgers)),
        delta_s_meas_per_step=first.delta_s_meas,
        scaling_ratio=first.delta_s_meas / epsilon**2,
    )
