"""Exact diagonalization of RSOS chains in the constrained label basis.

This is the reference route against which the qubit-register construction is
cross-checked: configurations are enumerated directly as admissible label
sequences, the Hamiltonian is assembled from the constrained-basis matrix
elements

    <a'|e_j|a> = prod_{k != j} delta_{a_k, a'_k}
                 * sqrt(phi(a_j) phi(a'_j)) / phi(a_{j-1})
                 * delta_{a_{j-1}, a_{j+1}},

and the ground state is found by sparse iterative diagonalization (dense
below DENSE_CUTOFF).  Nothing here touches the qubit operators.

Boundary handling: open-chain boundary labels are conserved by H, so each
(a_0, a_{L_R-1}) pair is a sector; callers either fix a pair or ask for the
global minimum over pairs (the variational circuit does not conserve the
ends, so its target energy is the global one).  Periodic chains split into
two parity-pattern sectors exchanged by the one-site shift; the ground-state
solve restricts to the sector of the conventional |2,1,2,1,...> initial
state and reports the doubled multiplicity.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .algebra import AlgebraError, ChainConfig, hamiltonian_prefactor
from .statevector import Statevector, apply_matrix

DENSE_CUTOFF = 4096
RESIDUAL_TOLERANCE = 1e-10
DEGENERACY_GAP = 1e-10
LANCZOS_MAX_ITER = 5000


class OracleError(Exception):
    """Raised when enumeration input is invalid or the eigensolve fails."""


@dataclass(frozen=True)
class RsosBasis:
    """Ordered admissible label sequences of one chain (lexicographic)."""

    cfg: ChainConfig
    configs: tuple[tuple[int, ...], ...]
    boundary_values: tuple[int, int] | None
    parity_sector: int | None

    def __len__(self) -> int:
        return len(self.configs)

    def index(self, config: tuple[int, ...]) -> int:
        # Lexicographic order makes bisection valid.
        pos = bisect.bisect_left(self.configs, config)
        if pos == len(self.configs) or self.configs[pos] != config:
            raise OracleError(f"configuration {config} not in basis")
        return pos


@dataclass
class GroundStateResult:
    energy: float
    vector: np.ndarray
    basis: RsosBasis
    multiplicity: int
    residual: float
    boundary_values: tuple[int, int] | None
    low_energies: tuple[float, ...]


def enumerate_basis(
    cfg: ChainConfig,
    boundary_values: tuple[int, int] | None = None,
    parity_sector: int | None = None,
) -> RsosBasis:
    """All admissible label sequences, optionally restricted to a sector.

    ``boundary_values`` fixes (a_0, a_{L_R-1}) on open chains;
    ``parity_sector`` (0 or 1) fixes the parity of a_0 on periodic chains.
    """
    p = cfg.dynkin.p
    n = cfg.num_sites
    if boundary_values is not None:
        if cfg.boundary != "open":
            raise OracleError("boundary values apply to open chains only")
        if not all(1 <= b <= p for b in boundary_values):
            raise OracleError(f"boundary values {boundary_values} outside 1..{p}")
    if parity_sector is not None and cfg.boundary != "periodic":
        raise OracleError("parity sectors apply to periodic chains only")

    configs: list[tuple[int, ...]] = []
    stack: list[tuple[int, ...]] = []
    if boundary_values is not None:
        starts = [boundary_values[0]]
    elif parity_sector is not None:
        starts = [a for a in range(1, p + 1) if a % 2 == parity_sector]
    else:
        starts = list(range(1, p + 1))
    for a0 in starts:
        stack = [(a0,)]
        while stack:
            prefix = stack.pop()
            if len(prefix) == n:
                if cfg.boundary == "periodic" and abs(prefix[-1] - prefix[0]) != 1:
                    continue
                if boundary_values is not None and prefix[-1] != boundary_values[1]:
                    continue
                configs.append(prefix)
                continue
            for b in (prefix[-1] - 1, prefix[-1] + 1):
                if 1 <= b <= p:
                    stack.append(prefix + (b,))
    configs.sort()
    return RsosBasis(
        cfg=cfg,
        configs=tuple(configs),
        boundary_values=boundary_values,
        parity_sector=parity_sector,
    )


def admissible_boundary_pairs(cfg: ChainConfig) -> list[tuple[int, int]]:
    """Open-chain (a_0, a_{L_R-1}) pairs connected by at least one path."""
    if cfg.boundary != "open":
        raise OracleError("boundary pairs apply to open chains only")
    p = cfg.dynkin.p
    reach = np.linalg.matrix_power(cfg.dynkin.adjacency, cfg.num_sites - 1)
    return [
        (a, b)
        for a in range(1, p + 1)
        for b in range(1, p + 1)
        if reach[a - 1, b - 1] > 0.5
    ]


def build_sparse_hamiltonian(basis: RsosBasis) -> scipy.sparse.csr_matrix:
    """H in the constrained basis, assembled from the defining matrix elements."""
    cfg = basis.cfg
    dynkin = cfg.dynkin
    prefactor = hamiltonian_prefactor(dynkin)
    n = cfg.num_sites
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for col, config in enumerate(basis.configs):
        for j in cfg.generator_sites():
            left = config[(j - 1) % n]
            right = config[(j + 1) % n]
            if left != right:
                continue
            a_j = config[j % n]
            for b in dynkin.neighbors(left):
                target = list(config)
                target[j % n] = b
                row = basis.index(tuple(target))
                amplitude = (
                    np.sqrt(dynkin.weight(b) * dynkin.weight(a_j)) / dynkin.weight(left)
                )
                rows.append(row)
                cols.append(col)
                vals.append(prefactor * amplitude)
    dim = len(basis)
    return scipy.sparse.csr_matrix(
        (vals, (rows, cols)), shape=(dim, dim), dtype=np.float64
    )


def spectrum(basis: RsosBasis) -> np.ndarray:
    """All eigenvalues of the constrained-basis Hamiltonian, ascending."""
    h = build_sparse_hamiltonian(basis).toarray()
    return np.linalg.eigvalsh(h)


def _solve_lowest(h: scipy.sparse.csr_matrix, k: int) -> tuple[np.ndarray, np.ndarray]:
    dim = h.shape[0]
    if dim <= DENSE_CUTOFF:
        dense = h.toarray()
        values, vectors = np.linalg.eigh(dense)
        return values[:k], vectors[:, :k]
    k = min(k, dim - 2)
    values, vectors = scipy.sparse.linalg.eigsh(
        h, k=k, which="SA", maxiter=LANCZOS_MAX_ITER
    )
    order = np.argsort(values)
    return values[order], vectors[:, order]


def _solve_sector(basis: RsosBasis, k: int) -> GroundStateResult:
    if len(basis) == 0:
        raise OracleError("empty basis; no admissible configuration")
    h = build_sparse_hamiltonian(basis)
    if len(basis) == 1:
        values = np.array([h.toarray()[0, 0]])
        vectors = np.ones((1, 1))
    else:
        values, vectors = _solve_lowest(h, min(k, len(basis)))
    vector = vectors[:, 0]
    residual = float(np.linalg.norm(h @ vector - values[0] * vector))
    if residual > RESIDUAL_TOLERANCE:
        raise OracleError(
            f"eigensolver residual {residual:.3e} above {RESIDUAL_TOLERANCE:.0e}"
        )
    multiplicity = int(np.sum(values - values[0] < DEGENERACY_GAP))
    return GroundStateResult(
        energy=float(values[0]),
        vector=vector,
        basis=basis,
        multiplicity=multiplicity,
        residual=residual,
        boundary_values=basis.boundary_values,
        low_energies=tuple(float(v) for v in values),
    )


def ground_state(
    cfg: ChainConfig,
    boundary_values: tuple[int, int] | None = None,
    k_lowest: int = 4,
) -> GroundStateResult:
    """Ground state of one chain.

    Open chains: a fixed (a_0, a_{L_R-1}) pair selects a sector; with
    ``boundary_values=None`` every admissible pair is solved and the global
    minimum returned (multiplicity counts all pairs within the degeneracy
    gap).  Periodic chains: solved in the parity sector of the
    |2,1,2,1,...> convention; the shift maps that sector onto its mirror
    unitarily, so the reported multiplicity is doubled.
    """
    if cfg.boundary == "periodic":
        result = _solve_sector(enumerate_basis(cfg, parity_sector=0), k_lowest)
        result.multiplicity *= 2
        return result
    if boundary_values is not None:
        return _solve_sector(enumerate_basis(cfg, boundary_values), k_lowest)

    best: GroundStateResult | None = None
    candidates: list[GroundStateResult] = []
    for pair in admissible_boundary_pairs(cfg):
        result = _solve_sector(enumerate_basis(cfg, pair), k_lowest)
        candidates.append(result)
        if best is None or result.energy < best.energy:
            best = result
    assert best is not None
    best.multiplicity = sum(
        r.multiplicity for r in candidates if r.energy - best.energy < DEGENERACY_GAP
    )
    return best


def embed(basis: RsosBasis, vector: np.ndarray) -> Statevector:
    """Lift a constrained-basis vector into the qubit register."""
    cfg = basis.cfg
    if vector.shape != (len(basis),):
        raise OracleError(
            f"vector length {vector.shape} does not match basis size {len(basis)}"
        )
    n_p = cfg.encoding.qubits_per_site
    amplitudes = np.zeros(2**cfg.num_qubits, dtype=np.complex128)
    for coefficient, config in zip(vector, basis.configs):
        index = 0
        for j, a in enumerate(config):
            index |= cfg.encoding.code(a) << (n_p * j)
        amplitudes[index] = coefficient
    return Statevector(cfg.num_qubits, amplitudes)


def physical_indices(cfg: ChainConfig) -> np.ndarray:
    """Qubit basis indices of every admissible configuration (free ends)."""
    basis = enumerate_basis(cfg)
    n_p = cfg.encoding.qubits_per_site
    out = np.empty(len(basis), dtype=np.int64)
    for i, config in enumerate(basis.configs):
        index = 0
        for j, a in enumerate(config):
            index |= cfg.encoding.code(a) << (n_p * j)
        out[i] = index
    return out


def tci_restricted_spectrum(
    num_sites: int,
    boundary: str = "open",
    ends: tuple[int, int] | None = None,
) -> np.ndarray:
    """Spectrum of the one-qubit-per-site chain on its admissible strings.

    The generators map the no-adjacent-down-spins subspace onto itself, so
    restricting the Hamiltonian to those basis columns reproduces the RSOS
    spectrum; this is the reference the two-qubit-per-site route is checked
    against at matched length.
    """
    from .algebra import tci_hamiltonian, tci_strings

    if num_sites > 16:
        raise OracleError(
            f"restricted solve supports up to 16 sites, got {num_sites}"
        )
    indices = np.asarray(tci_strings(num_sites, boundary, ends), dtype=np.int64)
    if indices.size == 0:
        raise OracleError("no admissible strings for the requested ends")
    dim = 2**num_sites
    columns = np.zeros((dim, indices.size), dtype=np.complex128)
    columns[indices, np.arange(indices.size)] = 1.0
    acc = np.zeros_like(columns)
    for term in tci_hamiltonian(num_sites, boundary):
        acc += apply_matrix(columns, term.matrix, term.support, num_sites)
    outside = np.delete(acc, indices, axis=0)
    if outside.size and np.abs(outside).max() > RESIDUAL_TOLERANCE:
        raise OracleError(
            f"generators leak out of the admissible strings "
            f"({np.abs(outside).max():.3e})"
        )
    restricted = columns.conj().T @ acc
    hermiticity = np.abs(restricted - restricted.conj().T).max()
    if hermiticity > RESIDUAL_TOLERANCE:
        raise OracleError(
            f"restricted block is not Hermitian (deviation {hermiticity:.3e})"
        )
    return np.linalg.eigvalsh(restricted)
