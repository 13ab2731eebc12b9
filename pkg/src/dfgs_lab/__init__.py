"""Statevector laboratory for depth-first Grover search with amplitude interception."""

from .depth_first import (
    STRATEGIES,
    BudgetExhausted,
    RecursionFrame,
    SearchOutcome,
    SearchParams,
    classical_scan,
    dfgs,
    dfgs_recurse,
    failure_budget,
    repeated_grover_intercepted,
    repeated_grover_naive,
)
from .encoder import EncoderConfig, EncoderError, encode, extend_prefix, retract_prefix
from .grover import (
    IterationSchedule,
    block_grover_search,
    grover_iterate,
    optimal_iterations,
    partial_grover_search,
    partial_query_budget,
    success_probability,
)
from .metrics import (
    QueryLog,
    expected_active_blocks,
    fit_power_law,
    max_depth,
    merge,
    predicted_cost,
)
from .oracle import (
    Database,
    FoundSet,
    InterceptionError,
    classical_verify,
    intercepted_marking,
    random_database,
)
from .statevector import State, apply_block_diffusion, apply_phase_flip, measure_qubits, uniform_state

__version__ = "0.1.0"
