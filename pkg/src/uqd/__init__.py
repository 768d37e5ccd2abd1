"""Discriminating Boolean-memory bias classes through a Universal QRAM query."""

from .boolean_functions import (
    BiasHypothesis,
    TruthTable,
    complement,
    enumerate_weight_class,
    phase_bias,
    sample_uniform,
)
from .caps import CapExceededError
from .discrimination import (
    ChernoffResult,
    CountStatistic,
    DegenerateHypothesesWarning,
    DiscriminationReport,
    LRTRule,
    MultiQueryReport,
    Outcome,
    chernoff_bound,
    chernoff_information,
    decide_single_copy,
    exact_bayes_error,
    lrt_threshold,
    multi_query_counts,
    queries_needed,
    run_multi_query_experiment,
    run_single_copy_experiment,
    single_query_trial,
)
from .ensemble import (
    TwoEigenspaceState,
    check_density_operator,
    collective_trace_distance,
    densify,
    ensemble_brute_force,
    ensemble_closed_form,
    helstrom_success,
    t_copy_ensemble_brute,
    trace_distance_closed,
    trace_distance_dense,
)
from .statevector import (
    AddressState,
    RegisterState,
    address_state,
    apply_phase_oracle,
    apply_uqram,
    hadamard_transform,
    plus_overlap,
    probe_and_query,
    superposed_memory_query,
)

__version__ = "0.1.0"
