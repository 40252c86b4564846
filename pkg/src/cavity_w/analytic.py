"""Closed-form single-excitation propagators.

Every function here is a direct transcription of the trigonometric solution of
``i dC/dt = H C`` for the arrowhead Hamiltonian.  No matrix is diagonalised;
that route is reserved for :mod:`cavity_w.oracle` so the two stay independent.
"""

from __future__ import annotations

import math

import numpy as np

from cavity_w.subspace import (
    PROPAGATION_TOL,
    CouplingConfig,
    GroupPartition,
    SubspaceState,
)


def collective_rabi(config: CouplingConfig) -> float:
    """Collective Rabi frequency ``sqrt(sum_j f_j^2)``."""
    return float(math.sqrt(np.sum(config.couplings**2)))


def _check_dims(config: CouplingConfig, state: SubspaceState) -> None:
    if state.dim != config.n_atoms + 1:
        raise ValueError(
            f"dimension mismatch: {config.n_atoms} couplings need {config.n_atoms + 1} "
            f"amplitudes, got {state.dim}"
        )


def propagate_general(config: CouplingConfig, initial: SubspaceState, t: float) -> SubspaceState:
    """Evolve ``initial`` for time ``t`` under arbitrary couplings.

    Negative ``t`` gives the inverse evolution.  Equal couplings are fine; see
    ``CouplingConfig.has_equal_couplings`` if you need to know.
    """
    _check_dims(config, initial)
    f = config.couplings
    f2 = f**2
    omega_sq = float(np.sum(f2))
    omega = math.sqrt(omega_sq)
    cos_t = math.cos(omega * t)
    sin_t = math.sin(omega * t)

    c0 = initial.atomic
    ph0 = initial.photonic
    weighted = f * c0
    total = np.sum(weighted)
    # sums over j != k, per atom
    others_f2 = omega_sq - f2
    others_weighted = total - weighted

    atoms = (
        (f2 * cos_t + others_f2) / omega_sq * c0
        + f * (cos_t - 1.0) / omega_sq * others_weighted
        - 1j * f * sin_t / omega * ph0
    )
    photon = -1j * sin_t / omega * total + cos_t * ph0
    return SubspaceState(np.append(atoms, photon), PROPAGATION_TOL)


def state_at_half_period(config: CouplingConfig, initial: SubspaceState) -> SubspaceState:
    """State at ``t = pi/Omega`` from the reduced formulas.

    The photonic amplitude is exactly ``-C_{N+1}(0)`` and the atoms obey the
    reflection ``C_k -> C_k - 2 f_k (f . C) / Omega^2``.
    """
    _check_dims(config, initial)
    f = config.couplings
    omega_sq = float(np.sum(f**2))
    c0 = initial.atomic
    weighted = f * c0
    others_weighted = np.sum(weighted) - weighted
    atoms = (omega_sq - 2.0 * f**2) / omega_sq * c0 - 2.0 * f / omega_sq * others_weighted
    return SubspaceState(np.append(atoms, -initial.amplitudes[-1]), PROPAGATION_TOL)


def single_excitation_outcome(config: CouplingConfig, q: int) -> SubspaceState:
    """Atomic state at ``pi/Omega`` when only atom ``q`` (1-based) starts excited."""
    n = config.n_atoms
    if not 1 <= q <= n:
        raise ValueError(f"q: excited-atom index must lie in 1..{n}")
    f = config.couplings
    omega_sq = float(np.sum(f**2))
    fq = f[q - 1]
    c = np.zeros(n + 1, dtype=complex)
    c[:n] = -2.0 * fq * f / omega_sq
    c[q - 1] = 1.0 - 2.0 * fq**2 / omega_sq
    return SubspaceState(c, PROPAGATION_TOL)


def coefficients_pairwise_distinct(state: SubspaceState, q: int, tol: float = 1e-12) -> bool:
    """Whether the magnitudes on atoms ``p != q`` are pairwise distinct.

    For distinct couplings these are ``2 f_p f_q / Omega^2`` and cannot be
    equal, so the symmetric W-state is out of reach.
    """
    mags = np.abs(np.delete(state.atomic, q - 1))
    if mags.size < 2:
        return True
    return bool(np.all(np.diff(np.sort(mags)) > tol))


def _check_two_group_norm(partition: GroupPartition, c_m0, c_n0, c_ph0) -> None:
    norm = partition.m1 * abs(c_m0) ** 2 + partition.m2 * abs(c_n0) ** 2 + abs(c_ph0) ** 2
    if abs(norm - 1.0) > PROPAGATION_TOL:
        raise ValueError(f"two-group amplitudes not normalized (norm^2 = {norm!r})")


def propagate_two_group(
    partition: GroupPartition, c_m0: complex, c_n0: complex, c_ph0: complex, t: float
) -> tuple[complex, complex, complex]:
    """Common per-atom amplitudes of each group, and the photon, at time ``t``.

    Requires group-symmetric initial data; use :func:`split_two_group` to get
    it from a full state.
    """
    _check_two_group_norm(partition, c_m0, c_n0, c_ph0)
    m1, f1, m2, f2 = partition.m1, partition.f1, partition.m2, partition.f2
    w_sq = m1 * f1**2 + m2 * f2**2
    w = math.sqrt(w_sq)
    cos_t = math.cos(w * t)
    sin_t = math.sin(w * t)

    c_m = (
        (m1 * f1**2 * cos_t + m2 * f2**2) / w_sq * c_m0
        + m2 * f1 * f2 * (cos_t - 1.0) / w_sq * c_n0
        - 1j * f1 * sin_t / w * c_ph0
    )
    c_n = (
        m1 * f1 * f2 * (cos_t - 1.0) / w_sq * c_m0
        + (m1 * f1**2 + m2 * f2**2 * cos_t) / w_sq * c_n0
        - 1j * f2 * sin_t / w * c_ph0
    )
    c_ph = (
        -1j * m1 * f1 * sin_t / w * c_m0
        - 1j * m2 * f2 * sin_t / w * c_n0
        + cos_t * c_ph0
    )
    return complex(c_m), complex(c_n), complex(c_ph)


def two_group_at_theta(
    partition: GroupPartition, c_m0: complex, c_n0: complex, c_ph0: complex
) -> tuple[complex, complex, complex]:
    """Two-group amplitudes at ``t = pi/omega`` from the reduced formulas."""
    _check_two_group_norm(partition, c_m0, c_n0, c_ph0)
    m1, f1, m2, f2 = partition.m1, partition.f1, partition.m2, partition.f2
    w_sq = m1 * f1**2 + m2 * f2**2
    c_m = ((m2 * f2**2 - m1 * f1**2) * c_m0 - 2.0 * m2 * f1 * f2 * c_n0) / w_sq
    c_n = (-2.0 * m1 * f1 * f2 * c_m0 + (m1 * f1**2 - m2 * f2**2) * c_n0) / w_sq
    return complex(c_m), complex(c_n), complex(-c_ph0)


def split_two_group(
    partition: GroupPartition, state: SubspaceState, tol: float = 1e-12
) -> tuple[complex, complex, complex]:
    """Collapse a group-symmetric full state to ``(c_m, c_n, c_ph)``."""
    if state.n_atoms != partition.n_atoms:
        raise ValueError(
            f"dimension mismatch: partition has {partition.n_atoms} atoms, state {state.n_atoms}"
        )
    g1 = state.atomic[: partition.m1]
    g2 = state.atomic[partition.m1 :]
    if np.max(np.abs(g1 - g1[0])) > tol or np.max(np.abs(g2 - g2[0])) > tol:
        raise ValueError("initial data is not symmetric within each group")
    return complex(g1[0]), complex(g2[0]), state.photonic


def expand_two_group(
    partition: GroupPartition, c_m: complex, c_n: complex, c_ph: complex
) -> SubspaceState:
    """Inverse of :func:`split_two_group`."""
    c = np.empty(partition.n_atoms + 1, dtype=complex)
    c[: partition.m1] = c_m
    c[partition.m1 : -1] = c_n
    c[-1] = c_ph
    return SubspaceState(c, PROPAGATION_TOL)
