"""Two-step W-state generation with one resonant cavity.

Step 1 sends the ``M`` atoms of the prepared group (all ground) through the
empty cavity together with an auxiliary excited atom of coupling
``f_aux = f_prepared * sqrt(M)``.  After ``tau = pi / (f_aux sqrt 2)`` the
auxiliary atom and the cavity are back in the ground/vacuum state and the group
holds a W-state of ``M`` atoms.

Step 2 sends that group back together with the other group (all ground).  When
the coupling ratio is ``r = 1 + sqrt(N / M)``, after ``theta = pi / omega``
all N atoms share the excitation equally and the cavity is empty again.

Propagators are selected by name:

``"analytic"``  reduced two-group closed forms at the special times
``"general"``   arbitrary-coupling closed form evaluated at the step duration
``"oracle"``    eigendecomposition of the subspace Hamiltonian
``"full"``      full tensor-product space (at most 6 atoms per step)

or given as a callable ``(config, state, t) -> SubspaceState``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Union

import numpy as np

from cavity_w.analytic import (
    expand_two_group,
    propagate_general,
    split_two_group,
    state_at_half_period,
    two_group_at_theta,
)
from cavity_w.oracle import (
    build_subspace_hamiltonian,
    full_space_subspace_propagate,
    oracle_propagate,
)
from cavity_w.subspace import (
    PROPAGATION_TOL,
    CouplingConfig,
    GroupPartition,
    SubspaceState,
    basis_ket,
    fidelity,
    make_w_state,
)

# photonic / auxiliary amplitude below this counts as reset
RESET_TOL = 1e-9
SUCCESS_TOL = 1e-10
NEGATIVE_CONTROL_MARGIN = 1e-6

Propagator = Union[str, Callable[[CouplingConfig, SubspaceState, float], SubspaceState]]
PROPAGATORS = ("analytic", "general", "oracle", "full")


class ProtocolError(RuntimeError):
    """A protocol run violated one of its guarantees."""


class Strategy(str, Enum):
    PREP_GROUP_1 = "PREP_GROUP_1"
    PREP_GROUP_2 = "PREP_GROUP_2"

    @classmethod
    def parse(cls, value: "Strategy | str | None", m1: int, m2: int) -> "Strategy":
        if isinstance(value, Strategy):
            return value
        key = "auto" if value is None else str(value).strip().lower()
        if key == "auto":
            # prepping the larger group is faster; ties go to group 1
            return cls.PREP_GROUP_2 if m1 < m2 else cls.PREP_GROUP_1
        if key in ("group1", "prep_group_1", "1"):
            return cls.PREP_GROUP_1
        if key in ("group2", "prep_group_2", "2"):
            return cls.PREP_GROUP_2
        raise ValueError(f"strategy: unknown value {value!r} (auto, group1, group2)")


@dataclass(frozen=True)
class ProtocolPlan:
    m1: int
    m2: int
    strategy: Strategy
    prep_size: int
    other_size: int
    f_prepared: float
    f_other: float
    ratio: float
    f_aux: float
    tau: float
    theta: float

    @property
    def n_atoms(self) -> int:
        return self.m1 + self.m2

    @property
    def f1(self) -> float:
        return self.f_prepared if self.strategy is Strategy.PREP_GROUP_1 else self.f_other

    @property
    def f2(self) -> float:
        return self.f_other if self.strategy is Strategy.PREP_GROUP_1 else self.f_prepared

    @property
    def partition(self) -> GroupPartition:
        """Step-2 partition in the original group labelling."""
        return GroupPartition(self.m1, self.f1, self.m2, self.f2)

    @property
    def step1_partition(self) -> GroupPartition:
        """Step-1 system: auxiliary atom first, then the prepared group."""
        return GroupPartition(1, self.f_aux, self.prep_size, self.f_prepared)

    @property
    def prep_offset(self) -> int:
        """First (1-based) slot of the prepared group in the N-atom register."""
        return 1 if self.strategy is Strategy.PREP_GROUP_1 else self.m1 + 1

    @property
    def omega(self) -> float:
        return math.sqrt(self.prep_size * self.f_prepared**2 + self.other_size * self.f_other**2)

    @property
    def matching_residual(self) -> float:
        """``M f_p^2 - M' f_o^2 - 2 M f_p f_o``; zero when the ratio is right."""
        m, mo, fp, fo = self.prep_size, self.other_size, self.f_prepared, self.f_other
        return m * fp**2 - mo * fo**2 - 2.0 * m * fp * fo


def plan_protocol(
    m1: int, m2: int, f_small: float = 1.0, strategy: Strategy | str | None = "auto"
) -> ProtocolPlan:
    """Couplings and step durations for groups of ``m1`` and ``m2`` atoms.

    The prepared group gets the larger coupling ``ratio * f_small``.
    """
    if int(m1) != m1 or m1 < 1:
        raise ValueError("m1: group 1 needs at least one atom")
    if int(m2) != m2 or m2 < 1:
        raise ValueError("m2: group 2 needs at least one atom")
    if not (math.isfinite(f_small) and f_small > 0):
        raise ValueError("f_small: must be > 0 and finite")
    m1, m2 = int(m1), int(m2)
    strat = Strategy.parse(strategy, m1, m2)
    prep, other = (m1, m2) if strat is Strategy.PREP_GROUP_1 else (m2, m1)
    n = m1 + m2

    ratio = 1.0 + math.sqrt(n / prep)
    f_prepared = ratio * f_small
    f_aux = f_prepared * math.sqrt(prep)
    tau = math.pi / (f_aux * math.sqrt(2.0))
    theta = math.pi / math.sqrt(prep * f_prepared**2 + other * f_small**2)
    return ProtocolPlan(
        m1=m1,
        m2=m2,
        strategy=strat,
        prep_size=prep,
        other_size=other,
        f_prepared=f_prepared,
        f_other=f_small,
        ratio=ratio,
        f_aux=f_aux,
        tau=tau,
        theta=theta,
    )


@dataclass(frozen=True)
class ProtocolTrace:
    plan: ProtocolPlan
    after_step1: SubspaceState | None
    prepared_state: SubspaceState
    initial_register: SubspaceState
    final_state: SubspaceState
    fidelity_step1: float
    fidelity_final: float
    aux_amplitude: float
    cavity_reset_step1: bool
    cavity_reset_step2: bool
    step1_trivial: bool
    propagator: str

    @property
    def succeeded(self) -> bool:
        return (
            self.cavity_reset_step1
            and self.cavity_reset_step2
            and self.fidelity_final >= 1.0 - SUCCESS_TOL
        )


def _evolve(partition: GroupPartition, state: SubspaceState, t: float, propagator: Propagator):
    if callable(propagator):
        return propagator(partition.to_config(), state, t)
    if propagator == "analytic":
        c = two_group_at_theta(partition, *split_two_group(partition, state))
        return expand_two_group(partition, *c)
    if propagator == "general":
        return propagate_general(partition.to_config(), state, t)
    if propagator == "oracle":
        h = build_subspace_hamiltonian(partition.to_config())
        return oracle_propagate(h, state, t)
    if propagator == "full":
        return full_space_subspace_propagate(partition.to_config(), state, t)
    raise ValueError(f"propagator: unknown value {propagator!r} ({', '.join(PROPAGATORS)})")


def _propagator_name(propagator: Propagator) -> str:
    return propagator if isinstance(propagator, str) else getattr(propagator, "__name__", "custom")


def run_step1(plan: ProtocolPlan, propagator: Propagator = "analytic") -> SubspaceState:
    """State of auxiliary atom (slot 1) + prepared group (slots 2..M+1) after ``tau``.

    For a single-atom group nothing needs preparing: the atom is handed over as
    ``-|e>`` and the auxiliary atom stays in the ground state.
    """
    m = plan.prep_size
    if m == 1:
        return SubspaceState(np.array([0.0, -1.0, 0.0], dtype=complex))
    initial = -1.0 * np.asarray(basis_ket(m + 1, 1).amplitudes)
    return _evolve(plan.step1_partition, SubspaceState(initial), plan.tau, propagator)


def register_after_step1(after_step1: SubspaceState) -> SubspaceState:
    """Drop the auxiliary slot; keep the group amplitudes and the cavity."""
    return SubspaceState(after_step1.amplitudes[1:], PROPAGATION_TOL)


def embed_prepared(plan: ProtocolPlan, register: SubspaceState) -> SubspaceState:
    """Place the prepared group's amplitudes into its slots of the N-atom register."""
    if register.n_atoms != plan.prep_size:
        raise ValueError(
            f"prepared register has {register.n_atoms} atoms, plan expects {plan.prep_size}"
        )
    c = np.zeros(plan.n_atoms + 1, dtype=complex)
    start = plan.prep_offset - 1
    c[start : start + plan.prep_size] = register.atomic
    c[-1] = register.photonic
    return SubspaceState(c, PROPAGATION_TOL)


def _check_prepared(plan: ProtocolPlan, prepared: SubspaceState) -> None:
    if prepared.n_atoms != plan.n_atoms:
        raise ValueError(
            f"prepared state has {prepared.n_atoms} atoms, plan expects {plan.n_atoms}"
        )
    if abs(prepared.photonic) >= RESET_TOL:
        raise ValueError("prepared state must have an empty cavity")
    mask = np.ones(plan.n_atoms, dtype=bool)
    start = plan.prep_offset - 1
    mask[start : start + plan.prep_size] = False
    if np.any(np.abs(prepared.atomic[mask]) >= RESET_TOL):
        raise ValueError("prepared state has excitation outside the prepared group")


def run_step2(
    plan: ProtocolPlan,
    prepared: SubspaceState | np.ndarray,
    propagator: Propagator = "analytic",
    after_step1: SubspaceState | None = None,
) -> ProtocolTrace:
    if not isinstance(prepared, SubspaceState):
        prepared = SubspaceState(prepared, PROPAGATION_TOL)
    _check_prepared(plan, prepared)

    final = _evolve(plan.partition, prepared, plan.theta, propagator)
    target = make_w_state(plan.n_atoms, +1)
    register = SubspaceState(
        prepared.amplitudes[plan.prep_offset - 1 : plan.prep_offset - 1 + plan.prep_size].tolist()
        + [prepared.photonic],
        PROPAGATION_TOL,
    )
    w_prep = make_w_state(plan.prep_size, -1)
    if after_step1 is None:
        aux = 0.0
        reset1 = True
    else:
        aux = abs(after_step1.amplitudes[0])
        reset1 = abs(after_step1.photonic) < RESET_TOL
    return ProtocolTrace(
        plan=plan,
        after_step1=after_step1,
        prepared_state=register,
        initial_register=prepared,
        final_state=final,
        fidelity_step1=fidelity(w_prep, register),
        fidelity_final=fidelity(target, final),
        aux_amplitude=float(aux),
        cavity_reset_step1=bool(reset1),
        cavity_reset_step2=bool(abs(final.photonic) < RESET_TOL),
        step1_trivial=plan.prep_size == 1,
        propagator=_propagator_name(propagator),
    )


def run_full_protocol(
    m1: int,
    m2: int,
    propagator: Propagator = "analytic",
    strategy: Strategy | str | None = "auto",
    f_small: float = 1.0,
    check: bool = True,
) -> ProtocolTrace:
    """Plan, prepare and entangle.

    A step 1 that leaves the auxiliary atom or the cavity excited always raises
    ProtocolError, since step 2 has no valid input then.  With ``check`` a
    failed step 2 raises as well; otherwise the trace reports it.
    """
    plan = plan_protocol(m1, m2, f_small=f_small, strategy=strategy)
    after = run_step1(plan, propagator)
    aux = abs(after.amplitudes[0])
    if aux >= RESET_TOL or abs(after.photonic) >= RESET_TOL:
        raise ProtocolError(
            f"step 1 left the auxiliary atom ({aux:.3e}) or cavity "
            f"({abs(after.photonic):.3e}) excited for m1={m1}, m2={m2}"
        )
    prepared = embed_prepared(plan, register_after_step1(after))
    trace = run_step2(plan, prepared, propagator, after_step1=after)
    if check:
        if not trace.cavity_reset_step2:
            raise ProtocolError(f"cavity not reset after step 2 for m1={m1}, m2={m2}")
        if trace.fidelity_final < 1.0 - SUCCESS_TOL:
            raise ProtocolError(
                f"final fidelity {trace.fidelity_final!r} below 1 - {SUCCESS_TOL} "
                f"for m1={m1}, m2={m2}"
            )
    return trace


def negative_control_identical(n: int) -> tuple[SubspaceState, float]:
    """Identical couplings, atom 1 excited, evolved to ``pi/Omega``.

    Returns the atomic state and its fidelity with the n-atom W-state, which is
    always ``1/n``: the excitation is redistributed but never evenly.
    """
    if n < 2:
        raise ValueError("n: need at least two atoms")
    state = state_at_half_period(CouplingConfig.uniform(n), basis_ket(n, 1))
    fid = fidelity(make_w_state(n, +1), state)
    if fid >= 1.0 - NEGATIVE_CONTROL_MARGIN:
        raise ProtocolError(f"identical atoms unexpectedly reached the W-state (n={n})")
    return state, fid
