"""Temperley-Lieb algebra of A_p RSOS chains on qubit registers.

An RSOS chain carries one label a_j in 1..p per site, with neighboring labels
adjacent on the A_p Dynkin diagram (|a_j - a_{j+1}| = 1).  The Boltzmann
weights phi(a) = sqrt(2 gamma / pi) sin(a gamma), gamma = pi / (p + 1), form
the Perron eigenvector of the adjacency matrix with eigenvalue
2 cos(gamma) = q + 1/q, q = exp(i gamma).

Each site is stored in n_p = ceil(log2 p) qubits.  Labels with an odd (even)
node index map to bit strings with an odd (even) number of down spins, so the
site parity operator distinguishes the two node classes.  The Temperley-Lieb
generator on site j acts on sites (j-1, j, j+1):

    e_j = sum_a P^(a)_{j-1} etilde^(a)_j P^(a)_{j+1},
    P^(a) = |a><a| / sqrt(phi(a)),
    etilde^(a) = sum_{b1, b2 adjacent to a} sqrt(phi(b1) phi(b2)) |b1><b2|,

which reproduces the constrained-basis matrix elements
sqrt(phi(a'_j) phi(a_j)) / phi(a_{j-1}) delta_{a_{j-1}, a_{j+1}} and
annihilates every bit string outside the encoded physical configurations.

The chain Hamiltonian is H = -gamma / (pi sin gamma) * sum_j e_j with
j in 1..L_R-2 on open chains (boundary labels are conserved) and j in
0..L_R-1 with cyclic site indices on periodic chains.

Braid generators g_j = (-q)^{1/2} (1 - e_j / q) follow from the TL algebra,
with the square-root branch pinned to exp(+i (pi + gamma) / 2).  The inverse
is closed-form: g_j^{-1} = (-q)^{-1/2} (1 - q e_j).  On periodic chains the
topological symmetry

    Y = (-q)^{-1/2} g_0^{-1} ... g_{L_R-2}^{-1} u^{-1} + h.c.

commutes with H; u is the one-site cyclic shift.  Parity splits the periodic
Hilbert space into two sectors that Y alone exchanges, so the measured
quantity is <Y u>, which takes the value 2 cos(pi / (p + 1)) on the ground
state.

A word on which relations hold where: e_j^2 = (q + 1/q) e_j, Hermiticity,
braid unitarity and distant commutation hold on the full 2^L qubit space.
The relations e_j e_{j+1} e_j = e_j and the Yang-Baxter relation cannot:
e_j is supported on three sites and has no way to sense whether the
(j+1, j+2) bond is Dynkin-admissible, while the product e_j e_{j+1} e_j
filters on exactly that bond (explicitly, e_j e_{j+1} e_j = e_j A_{j+1,j+2}
with A the diagonal bond-admissibility projector).  verify_algebra therefore
checks the multiplicative relations on the span of window configurations
whose consecutive bonds are admissible, which contains the physical sector,
and checks everything else densely on the full space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .statevector import Statevector, apply_local, apply_matrix, apply_permutation, inner

SPIN_UP = 0
SPIN_DOWN = 1

MIN_P = 3
MAX_P = 8

# Node-to-ket assignments for the published tables; offset 0 is the leftmost
# ket symbol and lives on the lowest qubit of the site.  1 = down spin.
_BASE_KETS = {
    3: {1: (1, 0), 2: (1, 1), 3: (0, 1)},
    4: {1: (1, 0), 2: (1, 1), 3: (0, 1), 4: (0, 0)},
    5: {1: (1, 1, 1), 2: (1, 1, 0), 3: (1, 0, 0), 4: (1, 0, 1), 5: (0, 1, 0)},
}


class AlgebraError(Exception):
    """Raised when an algebra constructor is used outside its contract."""


@dataclass(frozen=True)
class DynkinSpec:
    """A_p Dynkin diagram data: adjacency, anisotropy, Boltzmann weights."""

    p: int
    gamma: float
    q: complex
    weights: np.ndarray
    adjacency: np.ndarray

    def weight(self, a: int) -> float:
        return float(self.weights[a - 1])

    def neighbors(self, a: int) -> tuple[int, ...]:
        return tuple(b for b in range(1, self.p + 1) if abs(a - b) == 1)

    def loop_weight(self) -> float:
        """q + 1/q = 2 cos(gamma)."""
        return 2.0 * math.cos(self.gamma)


def build_dynkin(p: int) -> DynkinSpec:
    if not MIN_P <= p <= MAX_P:
        raise AlgebraError(f"p = {p} outside supported range {MIN_P}..{MAX_P}")
    gamma = math.pi / (p + 1)
    q = complex(math.cos(gamma), math.sin(gamma))
    weights = np.array(
        [math.sqrt(2.0 * gamma / math.pi) * math.sin(a * gamma) for a in range(1, p + 1)]
    )
    adjacency = np.zeros((p, p))
    for a in range(1, p):
        adjacency[a - 1, a] = adjacency[a, a - 1] = 1.0
    spec = DynkinSpec(p=p, gamma=gamma, q=q, weights=weights, adjacency=adjacency)
    residual = np.max(np.abs(adjacency @ weights - spec.loop_weight() * weights))
    if residual > 1e-12:
        raise AlgebraError(f"weights fail the Perron relation by {residual:.3e}")
    return spec


@dataclass(frozen=True)
class SiteEncoding:
    """Injective map from node labels 1..p to n_p-qubit bit patterns."""

    p: int
    qubits_per_site: int
    codes: tuple[int, ...]
    decode_map: dict[int, int] = field(repr=False)

    def code(self, a: int) -> int:
        """Bit pattern of label a; bit m = 1 when ket symbol m is a down spin."""
        if not 1 <= a <= self.p:
            raise AlgebraError(f"label {a} outside 1..{self.p}")
        return self.codes[a - 1]

    def decode(self, pattern: int) -> int | None:
        """Label for a bit pattern, or None if the pattern is unencoded."""
        return self.decode_map.get(pattern)

    def ket(self, a: int) -> str:
        """Ket symbols left to right, e.g. 'dud' for down-up-down."""
        code = self.code(a)
        return "".join("d" if (code >> m) & 1 else "u" for m in range(self.qubits_per_site))


def _ket_to_code(ket: tuple[int, ...]) -> int:
    return sum(bit << m for m, bit in enumerate(ket))


def build_encoding(p: int) -> SiteEncoding:
    """Published tables for p <= 5; for p in 6..8 extend the p = 5 table by
    assigning each new node the lexicographically smallest unused ket (down
    spin ordered before up) with the node's parity."""
    if not MIN_P <= p <= MAX_P:
        raise AlgebraError(f"p = {p} outside supported range {MIN_P}..{MAX_P}")
    n_p = max(1, math.ceil(math.log2(p)))
    if p <= 5:
        kets = dict(_BASE_KETS[p])
    else:
        kets = dict(_BASE_KETS[5])
        used = set(kets.values())
        # Down spins sort first: key bit 0 for down, 1 for up, leftmost first.
        candidates = sorted(
            (ket for ket in np.ndindex(*(2,) * n_p)),
            key=lambda ket: tuple(1 - bit for bit in ket),
        )
        for a in range(6, p + 1):
            for ket in candidates:
                if ket in used:
                    continue
                if sum(ket) % 2 == a % 2:
                    kets[a] = tuple(ket)
                    used.add(tuple(ket))
                    break
            else:
                raise AlgebraError(f"no parity-compatible ket left for label {a}")
    codes = tuple(_ket_to_code(kets[a]) for a in range(1, p + 1))
    if len(set(codes)) != p:
        raise AlgebraError("encoding is not injective")
    for a in range(1, p + 1):
        if sum(kets[a]) % 2 != a % 2:
            raise AlgebraError(f"label {a} violates the parity rule")
    decode_map = {code: a for a, code in zip(range(1, p + 1), codes)}
    return SiteEncoding(p=p, qubits_per_site=n_p, codes=codes, decode_map=decode_map)


@dataclass(frozen=True)
class LocalOperator:
    """Dense matrix on an ordered tuple of qubits.

    Matrix index bit t corresponds to qubit support[t] (see statevector
    conventions).
    """

    support: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        support = tuple(int(q) for q in self.support)
        object.__setattr__(self, "support", support)
        if len(set(support)) != len(support):
            raise AlgebraError(f"support {support} has repeated qubits")
        matrix = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        if matrix.shape != (2 ** len(support),) * 2:
            raise AlgebraError(
                f"matrix shape {matrix.shape} does not match support {support}"
            )
        object.__setattr__(self, "matrix", matrix)

    def scaled(self, factor: complex) -> "LocalOperator":
        return LocalOperator(self.support, factor * self.matrix)

    def dagger(self) -> "LocalOperator":
        return LocalOperator(self.support, self.matrix.conj().T)


@dataclass(frozen=True)
class ChainConfig:
    """Geometry of one RSOS chain embedded in a qubit register."""

    dynkin: DynkinSpec
    encoding: SiteEncoding
    num_sites: int
    boundary: str

    def __post_init__(self) -> None:
        if self.boundary not in ("open", "periodic"):
            raise AlgebraError(f"unknown boundary {self.boundary!r}")
        if self.boundary == "open" and self.num_sites < 3:
            raise AlgebraError("open chains need at least 3 sites")
        if self.boundary == "periodic":
            if self.num_sites < 4:
                raise AlgebraError("periodic chains need at least 4 sites")
            if self.num_sites % 2 != 0:
                raise AlgebraError(
                    "periodic chains need an even number of sites for the "
                    "parity-alternating labels to close"
                )
        if self.dynkin.p != self.encoding.p:
            raise AlgebraError("Dynkin diagram and encoding disagree on p")

    @property
    def num_qubits(self) -> int:
        return self.encoding.qubits_per_site * self.num_sites

    def site_qubits(self, j: int) -> tuple[int, ...]:
        n_p = self.encoding.qubits_per_site
        j = j % self.num_sites
        return tuple(n_p * j + m for m in range(n_p))

    def generator_sites(self) -> range:
        if self.boundary == "open":
            return range(1, self.num_sites - 1)
        return range(self.num_sites)


def build_chain(p: int, num_sites: int, boundary: str = "open") -> ChainConfig:
    return ChainConfig(
        dynkin=build_dynkin(p),
        encoding=build_encoding(p),
        num_sites=num_sites,
        boundary=boundary,
    )


def _tl_matrix(dynkin: DynkinSpec, encoding: SiteEncoding) -> np.ndarray:
    """TL generator on the (left, mid, right) three-site window."""
    n_p = encoding.qubits_per_site
    dim = 2 ** (3 * n_p)
    matrix = np.zeros((dim, dim), dtype=np.complex128)
    for a in range(1, dynkin.p + 1):
        ends = encoding.code(a) | (encoding.code(a) << (2 * n_p))
        for b1 in dynkin.neighbors(a):
            for b2 in dynkin.neighbors(a):
                row = ends | (encoding.code(b1) << n_p)
                col = ends | (encoding.code(b2) << n_p)
                matrix[row, col] = (
                    math.sqrt(dynkin.weight(b1) * dynkin.weight(b2)) / dynkin.weight(a)
                )
    return matrix


def _generator_support(cfg: ChainConfig, j: int) -> tuple[int, ...]:
    if cfg.boundary == "open":
        if not 1 <= j <= cfg.num_sites - 2:
            raise AlgebraError(
                f"open-chain generator index {j} outside 1..{cfg.num_sites - 2}"
            )
    elif not 0 <= j < cfg.num_sites:
        raise AlgebraError(
            f"periodic generator index {j} outside 0..{cfg.num_sites - 1}"
        )
    return cfg.site_qubits(j - 1) + cfg.site_qubits(j) + cfg.site_qubits(j + 1)


def build_tl_qubit(cfg: ChainConfig, j: int) -> LocalOperator:
    """Temperley-Lieb generator e_j on sites (j-1, j, j+1)."""
    support = _generator_support(cfg, j)
    return LocalOperator(support, _tl_matrix(cfg.dynkin, cfg.encoding))


def hamiltonian_prefactor(dynkin: DynkinSpec) -> float:
    """-gamma / (pi sin gamma); per-generator coupling at the critical point."""
    return -dynkin.gamma / (math.pi * math.sin(dynkin.gamma))


def build_hamiltonian(cfg: ChainConfig) -> list[LocalOperator]:
    """Term list of H = -gamma / (pi sin gamma) sum_j e_j."""
    prefactor = hamiltonian_prefactor(cfg.dynkin)
    return [build_tl_qubit(cfg, j).scaled(prefactor) for j in cfg.generator_sites()]


# Branch of (-q)^{1/2} = exp(i (pi + gamma) / 2); its inverse mirrors the sign.
def _braid_phase(dynkin: DynkinSpec, inverse: bool) -> complex:
    half = 0.5 * (math.pi + dynkin.gamma)
    return complex(math.cos(half), -math.sin(half) if inverse else math.sin(half))


def build_braid(cfg: ChainConfig, j: int, inverse: bool = False) -> LocalOperator:
    """Braid generator g_j = (-q)^{1/2} (1 - e_j / q).

    The closed-form inverse g_j^{-1} = (-q)^{-1/2} (1 - q e_j) follows from
    e_j^2 = (q + 1/q) e_j.
    """
    e = build_tl_qubit(cfg, j)
    eye = np.eye(e.matrix.shape[0], dtype=np.complex128)
    q = cfg.dynkin.q
    if inverse:
        matrix = _braid_phase(cfg.dynkin, True) * (eye - q * e.matrix)
    else:
        matrix = _braid_phase(cfg.dynkin, False) * (eye - e.matrix / q)
    return LocalOperator(e.support, matrix)


def build_shift(cfg: ChainConfig, reverse: bool = False) -> tuple[int, ...]:
    """Qubit permutation for the one-site cyclic shift u.

    The default direction moves site j to site j + 1, i.e.
    u |a_0, ..., a_{L_R-1}> = |a_{L_R-1}, a_0, ..., a_{L_R-2}>; reverse undoes
    it.  The default is the direction for which <Y u> on the periodic ground
    state comes out at +2 cos(pi / (p + 1)).
    """
    if cfg.boundary != "periodic":
        raise AlgebraError("the cyclic shift exists only on periodic chains")
    n = cfg.num_qubits
    n_p = cfg.encoding.qubits_per_site
    step = -n_p if reverse else n_p
    return tuple((k + step) % n for k in range(n))


def apply_shift(
    cfg: ChainConfig, state: Statevector, inverse: bool = False, reverse: bool = False
) -> Statevector:
    return apply_permutation(state, build_shift(cfg, reverse=reverse != inverse))


def apply_Y(cfg: ChainConfig, state: Statevector, reverse_shift: bool = False) -> Statevector:
    """Topological symmetry Y applied matrix-free (periodic chains only)."""
    if cfg.boundary != "periodic":
        raise AlgebraError("Y is defined on periodic chains only")
    braids = [build_braid(cfg, j) for j in range(cfg.num_sites - 1)]
    inverses = [build_braid(cfg, j, inverse=True) for j in range(cfg.num_sites - 1)]
    phase = _braid_phase(cfg.dynkin, inverse=True)  # (-q)^{-1/2}

    forward = apply_shift(cfg, state, inverse=True, reverse=reverse_shift)
    for j in range(cfg.num_sites - 2, -1, -1):
        forward = apply_local(forward, inverses[j])

    conjugate = state
    for j in range(cfg.num_sites - 1):
        conjugate = apply_local(conjugate, braids[j])
    conjugate = apply_shift(cfg, conjugate, reverse=reverse_shift)

    amps = phase * forward.amplitudes + phase.conjugate() * conjugate.amplitudes
    return Statevector(state.num_qubits, amps)


def measure_Yu(cfg: ChainConfig, state: Statevector, reverse_shift: bool = False) -> complex:
    """<psi| Y u |psi>.  Real (up to float noise) for the pinned branch."""
    shifted = apply_shift(cfg, state, reverse=reverse_shift)
    return inner(state, apply_Y(cfg, shifted, reverse_shift=reverse_shift))


# ---------------------------------------------------------------------------
# Compact tricritical-Ising encoding: p = 4, one qubit per RSOS site, with
# odd sites restricted to odd labels (1 = down, 3 = up) and even sites to
# even labels (2 = up, 4 = down).  Physical strings have no adjacent pair of
# down spins.

_P_PLUS = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=np.complex128)
_P_MINUS = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=np.complex128)
_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)


def _kron_sites(*mats_low_to_high: np.ndarray) -> np.ndarray:
    """Kronecker product with the first argument on the lowest matrix bits."""
    out = mats_low_to_high[0]
    for mat in mats_low_to_high[1:]:
        out = np.kron(mat, out)
    return out


def tci_coefficients() -> tuple[float, float]:
    """(lambda, mu) = (phi(1), phi(2)) of the p = 4 diagram."""
    dynkin = build_dynkin(4)
    return dynkin.weight(1), dynkin.weight(2)


def build_tci_tl(j: int, num_sites: int, boundary: str = "open") -> LocalOperator:
    """One-qubit-per-site TL generator of the tricritical Ising chain."""
    if boundary == "open":
        if not 1 <= j <= num_sites - 2:
            raise AlgebraError(
                f"open-chain generator index {j} outside 1..{num_sites - 2}"
            )
    elif boundary == "periodic":
        if num_sites % 2 != 0:
            raise AlgebraError("periodic chains need an even number of sites")
        if not 0 <= j < num_sites:
            raise AlgebraError(f"periodic generator index {j} outside 0..{num_sites - 1}")
    else:
        raise AlgebraError(f"unknown boundary {boundary!r}")
    lam, mu = tci_coefficients()
    middle = mu * _P_PLUS + lam * _P_MINUS + math.sqrt(lam * mu) * _PAULI_X
    matrix = (mu / lam) * _kron_sites(_P_MINUS, _P_PLUS, _P_MINUS)
    matrix = matrix + (1.0 / mu) * _kron_sites(_P_PLUS, middle, _P_PLUS)
    support = ((j - 1) % num_sites, j % num_sites, (j + 1) % num_sites)
    return LocalOperator(support, matrix)


def tci_hamiltonian(num_sites: int, boundary: str = "open") -> list[LocalOperator]:
    prefactor = hamiltonian_prefactor(build_dynkin(4))
    if boundary == "open":
        sites: Sequence[int] = range(1, num_sites - 1)
    else:
        sites = range(num_sites)
    return [build_tci_tl(j, num_sites, boundary).scaled(prefactor) for j in sites]


def tci_strings(num_sites: int, boundary: str = "open", ends: tuple[int, int] | None = None) -> list[int]:
    """Bit strings obeying the no-adjacent-down-spins constraint.

    ``ends`` optionally pins the first and last qubit values (open chains).
    """
    out = []
    for s in range(2**num_sites):
        bits = [(s >> k) & 1 for k in range(num_sites)]
        bonds = zip(bits, bits[1:])
        if boundary == "periodic":
            bonds = list(bonds) + [(bits[-1], bits[0])]
        if any(b1 == SPIN_DOWN and b2 == SPIN_DOWN for b1, b2 in bonds):
            continue
        if ends is not None and (bits[0], bits[-1]) != tuple(ends):
            continue
        out.append(s)
    return out


def tci_label(site: int, bit: int) -> int:
    """RSOS label carried by a TCI qubit value at the given site."""
    if site % 2 == 0:
        return 2 if bit == SPIN_UP else 4
    return 3 if bit == SPIN_UP else 1


# ---------------------------------------------------------------------------
# Relation verification.


@dataclass
class AlgebraReport:
    """Max deviations of the defining relations, keyed by relation name.

    Full-space checks: hermiticity, tl_square, projector, braid_unitary,
    braid_inverse, sector_closure, tl_commute, braid_commute.  Sector checks
    (admissible window columns): tl_triple, braid_yang_baxter.
    """

    p: int
    num_sites: int
    boundary: str
    deviations: dict[str, float]

    def max_deviation(self) -> float:
        return max(self.deviations.values())

    def within(self, tolerance: float) -> bool:
        return self.max_deviation() <= tolerance


def _window_paths(dynkin: DynkinSpec, length: int) -> list[tuple[int, ...]]:
    """Label tuples of the given length with every consecutive bond admissible."""
    paths: list[tuple[int, ...]] = [(a,) for a in range(1, dynkin.p + 1)]
    for _ in range(length - 1):
        paths = [path + (b,) for path in paths for b in dynkin.neighbors(path[-1])]
    return paths


def _window_columns(
    encoding: SiteEncoding, paths: Sequence[tuple[int, ...]], num_window_qubits: int
) -> np.ndarray:
    """(2^W, C) array of basis columns for the given window label tuples."""
    n_p = encoding.qubits_per_site
    cols = np.zeros((2**num_window_qubits, len(paths)), dtype=np.complex128)
    for c, path in enumerate(paths):
        index = 0
        for t, a in enumerate(path):
            index |= encoding.code(a) << (n_p * t)
        cols[index, c] = 1.0
    return cols


def _max_abs(array: np.ndarray) -> float:
    return float(np.max(np.abs(array))) if array.size else 0.0


def _sector_closure_deviation(matrix: np.ndarray, encoding: SiteEncoding) -> float:
    """Leakage of e_j out of the encoded (a, b, a) window configurations."""
    n_p = encoding.qubits_per_site
    mask = (1 << n_p) - 1
    physical_rows = np.zeros(matrix.shape[0], dtype=bool)
    for index in range(matrix.shape[0]):
        left = encoding.decode(index & mask)
        mid = encoding.decode((index >> n_p) & mask)
        right = encoding.decode((index >> (2 * n_p)) & mask)
        if left is None or mid is None or right is None or left != right:
            continue
        if mid in (left - 1, left + 1):
            physical_rows[index] = True
    return _max_abs(matrix[~physical_rows, :]) if (~physical_rows).any() else 0.0


def _pair_window(
    cfg: ChainConfig, j: int
) -> tuple[list[int], LocalOperator, LocalOperator, LocalOperator, LocalOperator]:
    """Window sites (j-1 .. j+2) with e and g re-supported on window qubits."""
    sites = [(j - 1 + t) % cfg.num_sites for t in range(4)]
    if len(set(sites)) != 4:
        raise AlgebraError("adjacent-pair window needs 4 distinct sites")
    n_p = cfg.encoding.qubits_per_site
    position = {site: t for t, site in enumerate(sites)}

    def local(op_sites: tuple[int, int, int], matrix: np.ndarray) -> LocalOperator:
        support = tuple(
            n_p * position[site] + m for site in op_sites for m in range(n_p)
        )
        return LocalOperator(support, matrix)

    tl = _tl_matrix(cfg.dynkin, cfg.encoding)
    eye = np.eye(tl.shape[0], dtype=np.complex128)
    g = _braid_phase(cfg.dynkin, False) * (eye - tl / cfg.dynkin.q)
    sites_j = (sites[0], sites[1], sites[2])
    sites_k = (sites[1], sites[2], sites[3])
    return (
        sites,
        local(sites_j, tl),
        local(sites_k, tl),
        local(sites_j, g),
        local(sites_k, g),
    )


def _apply_ops(columns: np.ndarray, ops: Sequence[LocalOperator], num_qubits: int) -> np.ndarray:
    out = columns
    for op in ops:
        out = apply_matrix(out, op.matrix, op.support, num_qubits)
    return out


def _adjacent_pairs(cfg: ChainConfig) -> list[int]:
    """Generator indices j for which (j, j+1) are both valid."""
    if cfg.boundary == "open":
        return list(range(1, cfg.num_sites - 2))
    return list(range(cfg.num_sites))


def _distant_pairs(cfg: ChainConfig) -> list[tuple[int, int]]:
    gens = list(cfg.generator_sites())
    pairs = []
    for i, j in enumerate(gens):
        for k in gens[i + 1 :]:
            distance = k - j
            if cfg.boundary == "periodic":
                distance = min(distance, cfg.num_sites - distance)
            if distance >= 2:
                pairs.append((j, k))
    return pairs


def verify_algebra(cfg: ChainConfig, num_probes: int = 8, seed: int = 7) -> AlgebraReport:
    """Max deviations of the TL and braid relations for every valid generator.

    Dense single-generator checks and distant-commutator probe checks cover
    the full qubit space; the triple and Yang-Baxter products are evaluated
    on admissible window columns (see the module docstring for why that is
    the exact domain of those identities).
    """
    deviations = {
        "hermiticity": 0.0,
        "tl_square": 0.0,
        "projector": 0.0,
        "sector_closure": 0.0,
        "braid_unitary": 0.0,
        "braid_inverse": 0.0,
        "tl_triple": 0.0,
        "braid_yang_baxter": 0.0,
        "tl_commute": 0.0,
        "braid_commute": 0.0,
    }
    delta = cfg.dynkin.loop_weight()

    tl = _tl_matrix(cfg.dynkin, cfg.encoding)
    eye = np.eye(tl.shape[0], dtype=np.complex128)
    q = cfg.dynkin.q
    g = _braid_phase(cfg.dynkin, False) * (eye - tl / q)
    g_inv = _braid_phase(cfg.dynkin, True) * (eye - q * tl)

    # Every e_j shares one window matrix, so the single-generator relations
    # need to be checked once per chain, not once per j.
    deviations["hermiticity"] = _max_abs(tl - tl.conj().T)
    tl_sq = tl @ tl
    deviations["tl_square"] = _max_abs(tl_sq - delta * tl)
    deviations["projector"] = _max_abs(tl_sq / delta**2 - tl / delta)
    deviations["sector_closure"] = _sector_closure_deviation(tl, cfg.encoding)
    deviations["braid_unitary"] = _max_abs(g @ g.conj().T - eye)
    deviations["braid_inverse"] = _max_abs(g @ g_inv - eye)

    n_p = cfg.encoding.qubits_per_site
    window_qubits = 4 * n_p
    paths = _window_paths(cfg.dynkin, 4)
    columns = _window_columns(cfg.encoding, paths, window_qubits)
    for j in _adjacent_pairs(cfg):
        _, ej, ek, gj, gk = _pair_window(cfg, j)
        for first, second in ((ej, ek), (ek, ej)):
            triple = _apply_ops(columns, [first, second, first], window_qubits)
            single = _apply_ops(columns, [first], window_qubits)
            deviations["tl_triple"] = max(deviations["tl_triple"], _max_abs(triple - single))
        lhs = _apply_ops(columns, [gj, gk, gj], window_qubits)
        rhs = _apply_ops(columns, [gk, gj, gk], window_qubits)
        deviations["braid_yang_baxter"] = max(
            deviations["braid_yang_baxter"], _max_abs(lhs - rhs)
        )

    distant = _distant_pairs(cfg)
    if distant:
        rng = np.random.default_rng(seed)
        shape = (2**cfg.num_qubits, num_probes)
        probes = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        probes /= np.linalg.norm(probes, axis=0)
        for j, k in distant:
            for name, builder in (
                ("tl_commute", build_tl_qubit),
                ("braid_commute", build_braid),
            ):
                op_j = builder(cfg, j)
                op_k = builder(cfg, k)
                jk = _apply_ops(probes, [op_k, op_j], cfg.num_qubits)
                kj = _apply_ops(probes, [op_j, op_k], cfg.num_qubits)
                deviations[name] = max(deviations[name], _max_abs(jk - kj))

    return AlgebraReport(
        p=cfg.dynkin.p,
        num_sites=cfg.num_sites,
        boundary=cfg.boundary,
        deviations=deviations,
    )


def verify_tci_algebra(num_sites: int, boundary: str = "open", num_probes: int = 8, seed: int = 7) -> AlgebraReport:
    """TCI analogue of verify_algebra on the one-qubit-per-site chain."""
    if boundary == "open":
        gens = list(range(1, num_sites - 1))
        adjacent = list(range(1, num_sites - 2))
    else:
        gens = list(range(num_sites))
        adjacent = list(range(num_sites))
    deviations = {
        "hermiticity": 0.0,
        "tl_square": 0.0,
        "projector": 0.0,
        "braid_unitary": 0.0,
        "braid_inverse": 0.0,
        "tl_triple": 0.0,
        "braid_yang_baxter": 0.0,
        "tl_commute": 0.0,
        "braid_commute": 0.0,
    }
    dynkin = build_dynkin(4)
    delta = dynkin.loop_weight()
    q = dynkin.q

    if not gens:
        raise AlgebraError("chain too short: no generators to verify")
    # the generator matrix is site-independent, only its support shifts, so
    # one representative serves the single-operator checks; a three-site open
    # chain has a lone generator and no adjacent pair to window-check
    e = build_tci_tl(gens[0], num_sites, boundary).matrix
    eye = np.eye(8, dtype=np.complex128)
    g = _braid_phase(dynkin, False) * (eye - e / q)
    g_inv = _braid_phase(dynkin, True) * (eye - q * e)
    deviations["hermiticity"] = _max_abs(e - e.conj().T)
    e_sq = e @ e
    deviations["tl_square"] = _max_abs(e_sq - delta * e)
    deviations["projector"] = _max_abs(e_sq / delta**2 - e / delta)
    deviations["braid_unitary"] = _max_abs(g @ g.conj().T - eye)
    deviations["braid_inverse"] = _max_abs(g @ g_inv - eye)

    # Window columns: 4 consecutive sites, no down-down bond inside the window.
    window_qubits = 4
    columns_idx = [
        s
        for s in range(16)
        if not any((s >> t) & 1 and (s >> (t + 1)) & 1 for t in range(3))
    ]
    columns = np.zeros((16, len(columns_idx)), dtype=np.complex128)
    for c, idx in enumerate(columns_idx):
        columns[idx, c] = 1.0
    for j in adjacent:
        ej = LocalOperator((0, 1, 2), e)
        ek = LocalOperator((1, 2, 3), e)
        gj = LocalOperator((0, 1, 2), g)
        gk = LocalOperator((1, 2, 3), g)
        for first, second in ((ej, ek), (ek, ej)):
            triple = _apply_ops(columns, [first, second, first], window_qubits)
            single = _apply_ops(columns, [first], window_qubits)
            deviations["tl_triple"] = max(deviations["tl_triple"], _max_abs(triple - single))
        lhs = _apply_ops(columns, [gj, gk, gj], window_qubits)
        rhs = _apply_ops(columns, [gk, gj, gk], window_qubits)
        deviations["braid_yang_baxter"] = max(
            deviations["braid_yang_baxter"], _max_abs(lhs - rhs)
        )
        break  # translation invariant: one window covers all adjacent pairs

    distant = []
    for i, j in enumerate(gens):
        for k in gens[i + 1 :]:
            distance = k - j
            if boundary == "periodic":
                distance = min(distance, num_sites - distance)
            if distance >= 2:
                distant.append((j, k))
    if distant:
        rng = np.random.default_rng(seed)
        shape = (2**num_sites, num_probes)
        probes = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        probes /= np.linalg.norm(probes, axis=0)
        phase = _braid_phase(dynkin, False)
        for j, k in distant:
            ej = build_tci_tl(j, num_sites, boundary)
            ek = build_tci_tl(k, num_sites, boundary)
            gj = LocalOperator(ej.support, phase * (eye - ej.matrix / q))
            gk = LocalOperator(ek.support, phase * (eye - ek.matrix / q))
            for name, (oj, ok) in (
                ("tl_commute", (ej, ek)),
                ("braid_commute", (gj, gk)),
            ):
                jk = _apply_ops(probes, [ok, oj], num_sites)
                kj = _apply_ops(probes, [oj, ok], num_sites)
                deviations[name] = max(deviations[name], _max_abs(jk - kj))

    return AlgebraReport(p=4, num_sites=num_sites, boundary=boundary, deviations=deviations)
