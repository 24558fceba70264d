"""Two-layer entanglement lottery: network models, deterministic quota
rounding, closed-form delivery metrics, Monte-Carlo sampling, baselines
and a sparse verifier for the measurement-based selection state."""

from .analytics import (
    LATENCY_MODES,
    MetricsRecord,
    ModelParams,
    ancilla_bits,
    ecdf,
    evaluate_point,
    jain_index,
    latency_b2,
    latency_dheac,
    required_pairs,
    success_b2,
    success_bounds,
    throughput,
)
from .baselines import BaselineResult, b1_evaluate, b2_evaluate
from .errors import CapacityError, InvariantViolationError, ResourceShortageError
from .lottery import (
    BatchStats,
    FairnessReport,
    TrialOutcome,
    estimate_fairness,
    exact_node_probs,
    run_trial,
    sample_inner,
    sample_outer,
    simulate_batch,
    trial_rng,
)
from .netgen import NetworkConfig, Request, demand_to_kreq, generate_network
from .partition import (
    Allocation,
    PartitionSet,
    count_partitions,
    enum_partitions,
    quota_round,
    safe_select_k,
)
from .qverify import (
    SparseState,
    VerificationReport,
    build_dicke,
    build_embedded,
    conditional_inner,
    marginal_outer,
    measure,
    measure_many,
    node_win_probs,
    verify_state,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "BaselineResult",
    "BatchStats",
    "CapacityError",
    "FairnessReport",
    "InvariantViolationError",
    "LATENCY_MODES",
    "MetricsRecord",
    "ModelParams",
    "NetworkConfig",
    "PartitionSet",
    "Request",
    "ResourceShortageError",
    "SparseState",
    "TrialOutcome",
    "VerificationReport",
    "ancilla_bits",
    "b1_evaluate",
    "b2_evaluate",
    "build_dicke",
    "build_embedded",
    "conditional_inner",
    "count_partitions",
    "demand_to_kreq",
    "ecdf",
    "enum_partitions",
    "estimate_fairness",
    "evaluate_point",
    "exact_node_probs",
    "generate_network",
    "jain_index",
    "latency_b2",
    "latency_dheac",
    "marginal_outer",
    "measure",
    "measure_many",
    "node_win_probs",
    "quota_round",
    "required_pairs",
    "run_trial",
    "safe_select_k",
    "sample_inner",
    "sample_outer",
    "simulate_batch",
    "success_b2",
    "success_bounds",
    "throughput",
    "trial_rng",
    "verify_state",
]
