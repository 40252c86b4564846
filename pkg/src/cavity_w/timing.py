"""Dimensionless generation times.

Times are scaled as ``t~ = f_prep * t / pi`` where ``f_prep`` is the coupling
of the group holding the prepared W-state.  ``timing(m1, m2)`` always assumes
group 1 is prepared; the alternative (prepare group 2) is ``timing(m2, m1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from cavity_w.protocol import ProtocolPlan, Strategy


@dataclass(frozen=True)
class TimingRecord:
    m1: int
    m2: int
    tau_tilde: float
    theta_tilde: float
    total: float

    def as_row(self) -> tuple[int, int, float, float, float]:
        return (self.m1, self.m2, self.tau_tilde, self.theta_tilde, self.total)


def _check_counts(m1: int, m2: int) -> None:
    if int(m1) != m1 or m1 < 1:
        raise ValueError("m1: must be >= 1")
    if int(m2) != m2 or m2 < 1:
        raise ValueError("m2: must be >= 1")


def timing(m1: int, m2: int) -> TimingRecord:
    """Step-1, step-2 and total dimensionless times with group 1 prepared."""
    _check_counts(m1, m2)
    n = m1 + m2
    tau_t = 1.0 / math.sqrt(2 * m1)
    theta_t = (math.sqrt(m1) + math.sqrt(n)) / math.sqrt(2 * m1 * (n + math.sqrt(m1 * n)))
    return TimingRecord(int(m1), int(m2), tau_t, theta_t, tau_t + theta_t)


def plan_timing(plan: ProtocolPlan) -> tuple[float, float]:
    """Durations of a plan converted to dimensionless form."""
    scale = plan.f_prepared / math.pi
    return scale * plan.tau, scale * plan.theta


def figure1_grid(m1_max: int = 25, m2_max: int = 25) -> list[TimingRecord]:
    """All ``timing(m1, m2)`` for ``1 <= m1 <= m1_max``, ``1 <= m2 <= m2_max``, row-major."""
    if int(m1_max) != m1_max or m1_max < 1:
        raise ValueError("m1_max: must be >= 1")
    if int(m2_max) != m2_max or m2_max < 1:
        raise ValueError("m2_max: must be >= 1")
    return [timing(a, b) for a in range(1, m1_max + 1) for b in range(1, m2_max + 1)]


def best_strategy_time(m1: int, m2: int) -> tuple[Strategy, TimingRecord]:
    """Faster of the two preparation choices.

    The returned record is oriented prepared-group first, so for
    ``PREP_GROUP_2`` it is ``timing(m2, m1)``.  Raises if the faster choice
    does not prepare the larger group.
    """
    _check_counts(m1, m2)
    own = timing(m1, m2)
    swapped = timing(m2, m1)
    if swapped.total < own.total:
        strategy, record = Strategy.PREP_GROUP_2, swapped
    else:
        strategy, record = Strategy.PREP_GROUP_1, own
    if m1 != m2:
        expected = Strategy.PREP_GROUP_1 if m1 > m2 else Strategy.PREP_GROUP_2
        if strategy is not expected:
            raise AssertionError(
                f"fastest strategy for ({m1}, {m2}) is {strategy.value}, "
                f"not the larger group ({expected.value})"
            )
    return strategy, record
