"""Exact simulation and classical Monte Carlo for two-qubit entanglement
distillation: dense bipartite states, local filtering channels, Bell-basis
diagnostics, recurrence purification, and hashing-protocol yield analysis."""

from .bell import (
    BellProbs,
    ProjectionWitness,
    TwoQubitDiagnostics,
    bell_probs_from_density,
    bell_state,
    density_from_bell_probs,
    fully_entangled_fraction,
    project_to_qubits,
    search_projection_witness,
    twirl,
    twirl_unitaries,
    two_qubit_diagnostics,
    werner,
    werner_probs,
)
from .errors import DistilleryError
from .hashing import (
    BellIndexVector,
    FailureBound,
    HashingTrialResult,
    MissEstimate,
    SourceDist,
    YieldPlan,
    failure_bound,
    is_typical,
    net_rate,
    parity,
    plan_yield,
    round_update,
    run_hashing_trial,
    shannon_entropy,
    typicality_miss_estimate,
)
from .locc import (
    CarveReport,
    KrausChannel,
    LocalFilter,
    SelectiveOutcome,
    apply_channel,
    apply_selective,
    carve_pairs,
    postselect_compose,
    support_projector,
)
from .qstate import (
    DensityOperator,
    PureState,
    UnnormalizedOperator,
    fidelity_pure,
    max_entangled,
    partial_trace,
    partial_transpose,
    state_from_json,
    state_to_json,
    tensor_product,
    trace_norm_distance,
    von_neumann_entropy,
)
from .recurrence import (
    RecurrenceTrace,
    distill_two_qubit,
    iterate_to_target,
    purified_fidelity,
    purify_step_exact,
    step_success_prob,
)

__version__ = "0.1.0"

__all__ = [
    "BellIndexVector",
    "BellProbs",
    "CarveReport",
    "DensityOperator",
    "DistilleryError",
    "FailureBound",
    "HashingTrialResult",
    "KrausChannel",
    "LocalFilter",
    "MissEstimate",
    "ProjectionWitness",
    "PureState",
    "RecurrenceTrace",
    "SelectiveOutcome",
    "SourceDist",
    "TwoQubitDiagnostics",
    "UnnormalizedOperator",
    "YieldPlan",
    "apply_channel",
    "apply_selective",
    "bell_probs_from_density",
    "bell_state",
    "carve_pairs",
    "density_from_bell_probs",
    "distill_two_qubit",
    "failure_bound",
    "fidelity_pure",
    "fully_entangled_fraction",
    "is_typical",
    "iterate_to_target",
    "max_entangled",
    "net_rate",
    "parity",
    "partial_trace",
    "partial_transpose",
    "plan_yield",
    "postselect_compose",
    "project_to_qubits",
    "purified_fidelity",
    "purify_step_exact",
    "round_update",
    "run_hashing_trial",
    "search_projection_witness",
    "shannon_entropy",
    "state_from_json",
    "state_to_json",
    "step_success_prob",
    "support_projector",
    "tensor_product",
    "trace_norm_distance",
    "twirl",
    "twirl_unitaries",
    "two_qubit_diagnostics",
    "typicality_miss_estimate",
    "von_neumann_entropy",
    "werner",
    "werner_probs",
]
