"""Dense statevector simulation for small qubit registers.

Conventions used throughout the package:

* Basis index bit k holds the state of qubit k, so the computational basis
  state with index ``i`` has qubit k in state ``(i >> k) & 1``.
* Bit value 0 is spin up (Z eigenvalue +1), bit value 1 is spin down
  (Z eigenvalue -1).
* A local operator matrix on support ``(q_0, ..., q_{w-1})`` uses the same
  packing: matrix index bit t corresponds to qubit ``q_t``.

States are flat complex128 arrays of length 2**num_qubits.  Registers are
capped at MAX_QUBITS because every operation materializes the full vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_QUBITS = 28

# Unitary evolution must preserve the norm; anything past this is a bug in
# the caller's operators, not float noise.
NORM_DRIFT_TOLERANCE = 1e-8

HERMITIAN_IMAG_TOLERANCE = 1e-10


class EngineError(Exception):
    """Raised when a statevector operation is used outside its contract."""


@dataclass
class Statevector:
    """Flat amplitude vector over the computational basis."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise EngineError(
                f"register size {self.num_qubits} outside 1..{MAX_QUBITS}"
            )
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.num_qubits,):
            raise EngineError(
                f"amplitude array has shape {amps.shape}, "
                f"expected {(2**self.num_qubits,)}"
            )
        self.amplitudes = amps

    def copy(self) -> "Statevector":
        return Statevector(self.num_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def zero_state(num_qubits: int) -> Statevector:
    """|0...0>, all spins up."""
    amps = np.zeros(2**num_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(num_qubits, amps)


def basis_state(num_qubits: int, index: int) -> Statevector:
    if not 0 <= index < 2**num_qubits:
        raise EngineError(f"basis index {index} out of range for {num_qubits} qubits")
    amps = np.zeros(2**num_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return Statevector(num_qubits, amps)


def from_rsos_product(encoding, labels: Sequence[int]) -> Statevector:
    """Product state encoding one RSOS label per site.

    ``encoding`` provides ``qubits_per_site`` and ``code(a)``; site j occupies
    qubits [n_p * j, n_p * (j + 1)).
    """
    n_p = encoding.qubits_per_site
    index = 0
    for j, a in enumerate(labels):
        index |= encoding.code(a) << (n_p * j)
    return basis_state(n_p * len(labels), index)


def apply_matrix(
    amps: np.ndarray,
    matrix: np.ndarray,
    support: Sequence[int],
    num_qubits: int,
) -> np.ndarray:
    """Apply a 2^w x 2^w matrix to the given qubits of a raw amplitude array.

    ``amps`` may be (2^L,) or (2^L, batch); a new array is returned.
    """
    w = len(support)
    batched = amps.ndim == 2
    batch = amps.shape[1] if batched else 1
    shape = (2,) * num_qubits + ((batch,) if batched else ())
    psi = amps.reshape(shape)
    # Axis for qubit q is num_qubits - 1 - q (C order); the matrix index puts
    # support[w-1] in the most significant position.
    axes = [num_qubits - 1 - q for q in reversed(support)]
    psi = np.moveaxis(psi, axes, range(w))
    moved_shape = psi.shape
    out = matrix @ psi.reshape(2**w, -1)
    out = np.moveaxis(out.reshape(moved_shape), range(w), axes)
    return np.ascontiguousarray(out).reshape(amps.shape)


def apply_local(state: Statevector, op) -> Statevector:
    """Apply a LocalOperator (anything with .support and .matrix) to a state."""
    support = tuple(op.support)
    if any(not 0 <= q < state.num_qubits for q in support):
        raise EngineError(
            f"operator support {support} does not fit in {state.num_qubits} qubits"
        )
    if len(set(support)) != len(support):
        raise EngineError(f"operator support {support} has repeated qubits")
    matrix = np.asarray(op.matrix, dtype=np.complex128)
    if matrix.shape != (2 ** len(support),) * 2:
        raise EngineError(
            f"operator matrix shape {matrix.shape} does not match support {support}"
        )
    out = apply_matrix(state.amplitudes, matrix, support, state.num_qubits)
    return Statevector(state.num_qubits, out)


def apply_terms(state: Statevector, terms) -> Statevector:
    """Sum of term applications: (sum_t term_t)|psi>."""
    acc = np.zeros_like(state.amplitudes)
    for op in terms:
        acc += apply_local(state, op).amplitudes
    return Statevector(state.num_qubits, acc)


def apply_permutation(state: Statevector, perm: Sequence[int]) -> Statevector:
    """Relabel qubits: qubit k of the input becomes qubit perm[k] of the output."""
    n = state.num_qubits
    if sorted(perm) != list(range(n)):
        raise EngineError(f"{perm} is not a permutation of 0..{n - 1}")
    inverse = [0] * n
    for k, target in enumerate(perm):
        inverse[target] = k
    # New tensor axis for qubit m is sourced from the old axis of qubit
    # inverse[m]; axis for qubit q is n - 1 - q.
    order = [n - 1 - inverse[n - 1 - axis] for axis in range(n)]
    tensor = state.amplitudes.reshape((2,) * n)
    out = np.ascontiguousarray(np.transpose(tensor, order)).reshape(-1)
    return Statevector(n, out)


def inner(a: Statevector, b: Statevector) -> complex:
    """<a|b> (conjugates the first argument)."""
    if a.num_qubits != b.num_qubits:
        raise EngineError("inner product between different register sizes")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def expectation(state: Statevector, terms) -> float:
    """<psi| sum_t term_t |psi>, checked real.

    The term list must be Hermitian as a whole; an imaginary residue beyond
    HERMITIAN_IMAG_TOLERANCE raises instead of being dropped silently.
    """
    value = inner(state, apply_terms(state, terms))
    if abs(value.imag) > HERMITIAN_IMAG_TOLERANCE:
        raise EngineError(
            f"expectation has imaginary residue {value.imag:.3e}; "
            "term list is not Hermitian"
        )
    return value.real


def check_norm(state: Statevector) -> None:
    """Raise if the norm drifted from 1 beyond NORM_DRIFT_TOLERANCE."""
    drift = abs(state.norm() - 1.0)
    if drift > NORM_DRIFT_TOLERANCE:
        raise EngineError(f"statevector norm drifted by {drift:.3e}")


def save_amplitudes(state: Statevector, path) -> None:
    """Binary dump: little-endian float64, interleaved re/im, ascending index."""
    out = np.empty(2 * state.amplitudes.size, dtype="<f8")
    out[0::2] = state.amplitudes.real
    out[1::2] = state.amplitudes.imag
    out.tofile(path)


def load_amplitudes(path, num_qubits: int) -> Statevector:
    raw = np.fromfile(path, dtype="<f8")
    if raw.size != 2 * 2**num_qubits:
        raise EngineError(
            f"amplitude file holds {raw.size} floats, "
            f"expected {2 * 2**num_qubits} for {num_qubits} qubits"
        )
    return Statevector(num_qubits, raw[0::2] + 1j * raw[1::2])
