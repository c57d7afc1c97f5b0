"""Work extraction from measured quantum systems under feedback control.

The package simulates one control cycle at a time: a system thermalized at
temperature T is measured (projectively, weakly, or inefficiently), a
per-outcome feedback protocol extracts work, and an isothermal stage closes
the loop.  Ledgers track energy, entropy, and the second-law balance
S({p_n}) - ΔS_meas ≥ 0 across system, controller, and bath.
"""

from .errors import (
    BranchMismatchError,
    ConfigError,
    DegenerateStateError,
    DimensionMismatchError,
    DomainError,
    IncompleteModelError,
    InvalidModelError,
    InvalidStateError,
    IoError,
    NoConvergenceError,
    NonPositiveTemperatureError,
    NonUnitaryBlockError,
    NotADistributionError,
    NotHermitianError,
    ParseError,
    PlanMismatchError,
    QFeedbackError,
    UnknownParameterError,
    ValidationError,
)
from .linalg import (
    EigenDecomposition,
    PolarFactors,
    dagger,
    dephase_blocks,
    eig_hermitian,
    hermitize,
    matrix_function,
    partial_trace,
    polar_decompose,
    tensor,
)
from .thermo import (
    DensityMatrix,
    Hamiltonian,
    ThermoReading,
    average_energy,
    free_energy,
    shannon_entropy,
    thermal_state,
    thermo_reading,
    trace_distance,
    von_neumann_entropy,
)
from .measurement import (
    MeasurementModel,
    MeasurementOutcomes,
    ModelKind,
    OutcomeRecord,
    ValidationReport,
    apply,
    average_post_state,
    bare_part,
    entropy_reduction,
    measurement_energy_cost,
    validate,
)
from .feedback import (
    ContinuousResult,
    CycleLedger,
    FeedbackPlan,
    OutcomeLedger,
    TransformResult,
    execute_plan,
    isothermal_work,
    plan_feedback,
    quasi_static_work,
    run_continuous,
    run_cycle,
    run_transform,
)
from .controller import (
    BathLedger,
    ControllerCycleResult,
    JointState,
    SecondLawReport,
    apply_joint_unitary,
    correlate,
    decohere_controller,
    decohere_via_ancilla,
    feedback_unitary,
    finalize_branches,
    reset_controller,
    run_controller_cycle,
    second_law_verdict,
    total_entropy,
    total_entropy_assembled,
)
from .config import ScenarioConfig, parse_config, with_value
from .ledger import (
    LedgerRow,
    emit,
    emit_csv,
    emit_json,
    parse_csv,
    parse_json,
    row_from_controller,
    row_from_continuous,
    row_from_cycle,
    row_from_transform,
)

__version__ = "0.1.0"
