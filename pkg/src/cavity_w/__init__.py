"""Deterministic W-state generation with a resonant cavity acting as a catalyst.

Single-excitation Tavis-Cummings dynamics for N two-level atoms coupled to one
cavity mode, the two-step protocol that turns two nonidentical atom groups into
an N-atom W-state, and a brute-force numerical oracle that checks the closed
forms.
"""

from cavity_w.subspace import (
    CouplingConfig,
    GroupPartition,
    SubspaceState,
    WState,
    basis_ket,
    fidelity,
    make_w_state,
)
from cavity_w.analytic import (
    collective_rabi,
    propagate_general,
    propagate_two_group,
    single_excitation_outcome,
    state_at_half_period,
    two_group_at_theta,
)
from cavity_w.oracle import (
    FullSpaceConfig,
    build_subspace_hamiltonian,
    full_space_propagate,
    oracle_propagate,
)
from cavity_w.protocol import (
    ProtocolPlan,
    ProtocolTrace,
    Strategy,
    negative_control_identical,
    plan_protocol,
    run_full_protocol,
    run_step1,
    run_step2,
)
from cavity_w.timing import TimingRecord, best_strategy_time, figure1_grid, timing

__version__ = "0.1.0"

__all__ = [
    "CouplingConfig",
    "FullSpaceConfig",
    "GroupPartition",
    "ProtocolPlan",
    "ProtocolTrace",
    "Strategy",
    "SubspaceState",
    "TimingRecord",
    "WState",
    "basis_ket",
    "best_strategy_time",
    "build_subspace_hamiltonian",
    "collective_rabi",
    "fidelity",
    "figure1_grid",
    "full_space_propagate",
    "make_w_state",
    "negative_control_identical",
    "oracle_propagate",
    "plan_protocol",
    "propagate_general",
    "propagate_two_group",
    "run_full_protocol",
    "run_step1",
    "run_step2",
    "single_excitation_outcome",
    "state_at_half_period",
    "timing",
    "two_group_at_theta",
]
