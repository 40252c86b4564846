"""Brute-force propagation by exact diagonalisation.

Two oracles, both independent of the closed forms in :mod:`cavity_w.analytic`:

* the (N+1)-dimensional single-excitation Hamiltonian (arrowhead matrix),
* the full tensor-product space of N atoms and a truncated cavity mode.

Both use ``exp(-iHt) = V diag(exp(-i lambda t)) V^T`` from ``numpy.linalg.eigh``.

Full-space ordering: index = atom_config * (n_max + 1) + n_photons, where
``atom_config`` is the binary word with atom 1 as the most significant bit
(bit set = excited).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cavity_w.subspace import PROPAGATION_TOL, CouplingConfig, SubspaceState

MAX_FULL_ATOMS = 6
MAX_FULL_DIM = 448
# full-space inputs must be normalized this well
FULL_INPUT_TOL = 1e-9


@dataclass(frozen=True)
class SubspaceHamiltonian:
    """Arrowhead matrix: last row/column holds the couplings, zeros elsewhere."""

    matrix: np.ndarray

    def __post_init__(self):
        h = np.array(self.matrix, dtype=float)
        if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] < 2:
            raise ValueError("matrix: must be square with dimension >= 2")
        if not np.array_equal(h, h.T):
            raise ValueError("matrix: must be symmetric")
        h.flags.writeable = False
        object.__setattr__(self, "matrix", h)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.matrix)


def build_subspace_hamiltonian(config: CouplingConfig) -> SubspaceHamiltonian:
    n = config.n_atoms
    h = np.zeros((n + 1, n + 1))
    h[:n, n] = config.couplings
    h[n, :n] = config.couplings
    return SubspaceHamiltonian(h)


def propagator_matrix(matrix: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t)`` for real symmetric or Hermitian ``H``."""
    evals, evecs = np.linalg.eigh(matrix)
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def oracle_propagate(h: SubspaceHamiltonian, initial: SubspaceState, t: float) -> SubspaceState:
    if initial.dim != h.dim:
        raise ValueError(f"dimension mismatch: H is {h.dim}x{h.dim}, state has {initial.dim}")
    out = propagator_matrix(h.matrix, t) @ initial.amplitudes
    return SubspaceState(out, PROPAGATION_TOL)


@dataclass(frozen=True)
class FullSpaceConfig:
    n_atoms: int
    photon_cutoff: int = 2

    def __post_init__(self):
        if self.n_atoms < 1 or self.n_atoms > MAX_FULL_ATOMS:
            raise ValueError(f"n_atoms: full-space oracle supports 1..{MAX_FULL_ATOMS} atoms")
        if self.photon_cutoff < 1:
            raise ValueError("photon_cutoff: must be >= 1")
        if self.dim > MAX_FULL_DIM:
            raise ValueError(f"dimension {self.dim} exceeds cap {MAX_FULL_DIM}")

    @property
    def n_levels(self) -> int:
        return self.photon_cutoff + 1

    @property
    def dim(self) -> int:
        return 2**self.n_atoms * self.n_levels

    def index(self, excited_atoms: tuple[int, ...] | list[int], photons: int) -> int:
        """Full-space index of the ket with the given (1-based) atoms excited."""
        word = 0
        for k in excited_atoms:
            word |= 1 << (self.n_atoms - k)
        return word * self.n_levels + photons

    def excitation_numbers(self) -> np.ndarray:
        """Diagonal of ``a^+ a + sum_j |e_j><e_j|``."""
        words = np.arange(2**self.n_atoms)
        popcount = np.array([bin(w).count("1") for w in words])
        return (popcount[:, None] + np.arange(self.n_levels)[None, :]).ravel()


def build_full_hamiltonian(cfg: FullSpaceConfig, config: CouplingConfig) -> np.ndarray:
    """Dense ``sum_j f_j (a^+ S_j^- + S_j^+ a)`` on the truncated space."""
    if config.n_atoms != cfg.n_atoms:
        raise ValueError(f"n_atoms: config has {config.n_atoms} couplings, space {cfg.n_atoms} atoms")
    # local atom basis (g, e); S^- = |g><e|
    s_minus = np.array([[0.0, 1.0], [0.0, 0.0]])
    a = np.diag(np.sqrt(np.arange(1, cfg.n_levels)), k=1)
    eye2 = np.eye(2)
    h = np.zeros((cfg.dim, cfg.dim))
    for j, f in enumerate(config.couplings):
        op = np.ones((1, 1))
        for k in range(cfg.n_atoms):
            op = np.kron(op, s_minus if k == j else eye2)
        lowering = np.kron(op, a.T)  # S_j^- a^+
        h += f * (lowering + lowering.T)
    return h


def embed_subspace_state(cfg: FullSpaceConfig, state: SubspaceState) -> np.ndarray:
    if state.n_atoms != cfg.n_atoms:
        raise ValueError("dimension mismatch between subspace state and full space")
    psi = np.zeros(cfg.dim, dtype=complex)
    for k in range(1, cfg.n_atoms + 1):
        psi[cfg.index((k,), 0)] = state.amplitudes[k - 1]
    psi[cfg.index((), 1)] = state.photonic
    return psi


def single_excitation_indices(cfg: FullSpaceConfig) -> np.ndarray:
    idx = [cfg.index((k,), 0) for k in range(1, cfg.n_atoms + 1)]
    idx.append(cfg.index((), 1))
    return np.array(idx)


def project_to_subspace(cfg: FullSpaceConfig, psi: np.ndarray) -> np.ndarray:
    """Amplitudes on the single-excitation kets, in subspace order (not renormalized)."""
    return np.asarray(psi)[single_excitation_indices(cfg)]


def excitation_expectation(cfg: FullSpaceConfig, psi: np.ndarray) -> float:
    return float(np.sum(cfg.excitation_numbers() * np.abs(psi) ** 2))


def sector_leakage(cfg: FullSpaceConfig, psi: np.ndarray, sector: int) -> float:
    """Largest amplitude magnitude outside the given excitation-number sector."""
    outside = cfg.excitation_numbers() != sector
    if not np.any(outside):
        return 0.0
    return float(np.max(np.abs(np.asarray(psi)[outside])))


def full_space_propagate(
    cfg: FullSpaceConfig, config: CouplingConfig, initial: np.ndarray, t: float
) -> np.ndarray:
    psi = np.asarray(initial, dtype=complex).ravel()
    if psi.size != cfg.dim:
        raise ValueError(f"dimension mismatch: full space is {cfg.dim}, state has {psi.size}")
    norm = float(np.vdot(psi, psi).real)
    if abs(norm - 1.0) > FULL_INPUT_TOL:
        raise ValueError(f"initial state not normalized (norm^2 = {norm!r})")
    h = build_full_hamiltonian(cfg, config)
    return propagator_matrix(h, t) @ psi


def full_space_subspace_propagate(
    config: CouplingConfig, initial: SubspaceState, t: float, photon_cutoff: int = 2
) -> SubspaceState:
    """Run a subspace state through the full-space oracle and project back."""
    cfg = FullSpaceConfig(config.n_atoms, photon_cutoff)
    psi = full_space_propagate(cfg, config, embed_subspace_state(cfg, initial), t)
    return SubspaceState(project_to_subspace(cfg, psi), PROPAGATION_TOL)


def spectrum_omega(h: SubspaceHamiltonian) -> float:
    """Largest eigenvalue magnitude; equals the collective Rabi frequency."""
    return float(np.max(np.abs(np.linalg.eigvalsh(h.matrix))))
