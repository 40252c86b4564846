"""Types and basis conventions for the single-excitation sector.

Basis ordering used everywhere in the package (1-based in prose, 0-based in
arrays):

    index k in 1..N  ->  |g..e_k..g>|0>   (only atom k excited, cavity empty)
    index N+1        ->  |g1 g2 .. gN>|1>  (all atoms ground, one photon)

For a two-group partition atoms 1..M1 form group 1 and atoms M1+1..N form
group 2.

Couplings are dimensionless (physical coupling divided by a reference coupling
``f_ref``) and times are measured in units of ``1/f_ref``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Normalization tolerance for freshly constructed states.
CONSTRUCTION_TOL = 1e-12
# Allowed norm drift after propagation.
PROPAGATION_TOL = 1e-9
# Couplings closer than this are reported as equal.
EQUAL_COUPLING_TOL = 1e-12


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class CouplingConfig:
    """Per-atom coupling strengths to the cavity mode.

    ``couplings`` are already divided by ``f_ref``; ``f_ref`` is kept only so
    that physical units can be restored (``physical_couplings``).
    """

    couplings: np.ndarray
    f_ref: float = 1.0

    def __post_init__(self):
        f = np.asarray(self.couplings, dtype=float).ravel()
        if f.size < 1:
            raise ValueError("couplings: need at least one atom")
        if not np.all(np.isfinite(f)) or np.any(f <= 0):
            raise ValueError("couplings: every f_j must be > 0 and finite")
        if not (math.isfinite(self.f_ref) and self.f_ref > 0):
            raise ValueError("f_ref: must be > 0 and finite")
        object.__setattr__(self, "couplings", _frozen(f, float))

    @classmethod
    def of(cls, *couplings: float, f_ref: float = 1.0) -> "CouplingConfig":
        return cls(np.array(couplings, dtype=float), f_ref)

    @classmethod
    def uniform(cls, n: int, f: float = 1.0) -> "CouplingConfig":
        return cls(np.full(n, f, dtype=float))

    @property
    def n_atoms(self) -> int:
        return int(self.couplings.size)

    @property
    def physical_couplings(self) -> np.ndarray:
        return self.couplings * self.f_ref

    @property
    def has_equal_couplings(self) -> bool:
        """True if any two atoms share a coupling (within 1e-12)."""
        f = np.sort(self.couplings)
        return bool(np.any(np.diff(f) <= EQUAL_COUPLING_TOL))

    def __eq__(self, other):
        if not isinstance(other, CouplingConfig):
            return NotImplemented
        return self.f_ref == other.f_ref and np.array_equal(self.couplings, other.couplings)

    def __hash__(self):
        return hash((self.couplings.tobytes(), self.f_ref))


@dataclass(frozen=True)
class SubspaceState:
    """Complex amplitudes ``C_1..C_{N+1}`` over the single-excitation basis.

    The constructor rejects vectors whose norm differs from 1 by more than
    ``tol``.  Propagators build their outputs with ``PROPAGATION_TOL``.
    """

    amplitudes: np.ndarray
    tol: float = CONSTRUCTION_TOL

    def __post_init__(self):
        c = np.asarray(self.amplitudes, dtype=complex).ravel()
        if c.size < 2:
            raise ValueError("amplitudes: need N+1 >= 2 entries")
        if not np.all(np.isfinite(c)):
            raise ValueError("amplitudes: non-finite entry")
        norm = float(np.vdot(c, c).real)
        if abs(norm - 1.0) > self.tol:
            raise ValueError(f"amplitudes: not normalized (sum |C_k|^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(c, complex))

    @property
    def n_atoms(self) -> int:
        return int(self.amplitudes.size) - 1

    @property
    def dim(self) -> int:
        return int(self.amplitudes.size)

    @property
    def atomic(self) -> np.ndarray:
        return self.amplitudes[:-1]

    @property
    def photonic(self) -> complex:
        return complex(self.amplitudes[-1])

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def __len__(self):
        return self.dim

    def __eq__(self, other):
        if not isinstance(other, SubspaceState):
            return NotImplemented
        return np.array_equal(self.amplitudes, other.amplitudes)

    def __hash__(self):
        return hash(self.amplitudes.tobytes())


@dataclass(frozen=True)
class GroupPartition:
    """Two groups of identical atoms: ``m1`` atoms at ``f1``, ``m2`` atoms at ``f2``.

    ``f1 != f2`` is not required here; only the protocol needs it.
    """

    m1: int
    f1: float
    m2: int
    f2: float

    def __post_init__(self):
        if int(self.m1) != self.m1 or self.m1 < 1:
            raise ValueError("m1: group 1 needs at least one atom")
        if int(self.m2) != self.m2 or self.m2 < 1:
            raise ValueError("m2: group 2 needs at least one atom")
        for name in ("f1", "f2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name}: coupling must be > 0 and finite")
        object.__setattr__(self, "m1", int(self.m1))
        object.__setattr__(self, "m2", int(self.m2))

    @property
    def n_atoms(self) -> int:
        return self.m1 + self.m2

    @property
    def omega(self) -> float:
        return math.sqrt(self.m1 * self.f1**2 + self.m2 * self.f2**2)

    def to_config(self, f_ref: float = 1.0) -> CouplingConfig:
        f = np.concatenate([np.full(self.m1, self.f1), np.full(self.m2, self.f2)])
        return CouplingConfig(f, f_ref)


@dataclass(frozen=True)
class WState:
    """``sign/sqrt(n)`` on each of ``n`` atoms; see :func:`make_w_state`."""

    n: int
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign: must be +1 or -1")
        if self.n < 1:
            raise ValueError("n: must be >= 1")

    def expand(self, embed_into: int | None = None, offset: int = 1) -> SubspaceState:
        return make_w_state(self.n, self.sign, embed_into, offset)


def make_w_state(
    n: int, sign: int = 1, embed_into: int | None = None, offset: int = 1
) -> SubspaceState:
    """W-state of ``n`` atoms placed in slots ``offset..offset+n-1`` of an
    ``embed_into``-atom register (1-based), cavity empty.

    >>> make_w_state(1, -1, embed_into=3).amplitudes.real
    array([-1.,  0.,  0.,  0.])
    """
    if embed_into is None:
        embed_into = n
    if int(n) != n or n < 1:
        raise ValueError("n: must be a positive count")
    if sign not in (1, -1):
        raise ValueError("sign: must be +1 or -1")
    if offset < 1 or offset + n - 1 > embed_into:
        raise ValueError(
            f"offset: slots {offset}..{offset + n - 1} do not fit in {embed_into} atoms"
        )
    c = np.zeros(embed_into + 1, dtype=complex)
    c[offset - 1 : offset - 1 + n] = sign / math.sqrt(n)
    return SubspaceState(c)


def basis_ket(n_atoms: int, k: int) -> SubspaceState:
    """Basis ket ``k`` (1-based); ``k = n_atoms + 1`` is the one-photon ket."""
    if not 1 <= k <= n_atoms + 1:
        raise ValueError(f"k: must lie in 1..{n_atoms + 1}")
    c = np.zeros(n_atoms + 1, dtype=complex)
    c[k - 1] = 1.0
    return SubspaceState(c)


def photon_ket(n_atoms: int) -> SubspaceState:
    return basis_ket(n_atoms, n_atoms + 1)


def fidelity(a: SubspaceState | Sequence[complex], b: SubspaceState | Sequence[complex]) -> float:
    """Global-phase-insensitive overlap ``|<a|b>|^2``."""
    va = a.amplitudes if isinstance(a, SubspaceState) else np.asarray(a, dtype=complex)
    vb = b.amplitudes if isinstance(b, SubspaceState) else np.asarray(b, dtype=complex)
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.size} vs {vb.size}")
    # rounding can push self-overlap a few ulp past 1
    return min(float(abs(np.vdot(va, vb)) ** 2), 1.0)
