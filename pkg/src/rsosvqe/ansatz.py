"""Brick-wall Euler-Cartan circuit: layout, application, and gate synthesis.

The variational circuit acts on L qubits (L even) and consists of N layers.
Each layer applies, in order:

    1. a three-angle Z-Y-Z rotation on every qubit,
    2. entanglers exp(i a1 XX + i a2 YY + i a3 ZZ) on the even bonds
       (0,1), (2,3), ...,
    3. another round of Z-Y-Z rotations on every qubit,
    4. entanglers on the odd bonds (1,2), (3,4), ...

The wrap-around bond (L-1, 0) is never entangled, so one layer holds
6L + 3(L-1) angles and the whole circuit 6LN + 3(L-1)N.  This is the
compressed form of a brick wall of general two-qubit blocks: a full KAK
block would carry four single-qubit rotations, but rotations of adjacent
blocks merge, leaving one rotation per qubit per sublayer.

The second half of the module synthesizes elementary gates.  Any two-qubit
unitary factors as (A x B) . V . (C x D) where V is a fixed three-CNOT
interior whose rotation angles come from the eigenvalue phases of the
magic-basis Gram matrix gamma(U) = (E^ U E)(E^ U E)^T; the single-qubit
prefactors follow from simultaneously diagonalizing gamma(U) and gamma(V)
over SO(4).  `kak_full` exposes the related canonical form
U = (A x B) . entangler(a) . (C x D) used for testing the compression.

Qubit convention matches `statevector`: for a block on support (qa, qb),
matrix index bit 0 is qa and bit 1 is qb.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statevector import Statevector, apply_matrix, check_norm

UNITARY_TOLERANCE = 1e-10
SYNTHESIS_TOLERANCE = 1e-11
KAK_TOLERANCE = 1e-9

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

_XX = np.kron(_X, _X)
_YY = np.kron(_Y, _Y)
_ZZ = np.kron(_Z, _Z)

# Magic (Bell) basis.  Conjugation by _MAGIC maps SO(4) onto SU(2) x SU(2),
# and the entangler family is diagonal in it.
_MAGIC = np.array(
    [
        [1.0, 1.0j, 0.0, 0.0],
        [0.0, 0.0, 1.0j, 1.0],
        [0.0, 0.0, 1.0j, -1.0],
        [1.0, -1.0j, 0.0, 0.0],
    ],
    dtype=complex,
) / np.sqrt(2.0)
_MAGIC_DAG = _MAGIC.conj().T

# Two-qubit constants in the bit-0-is-first-support-qubit convention.
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
# control bit 0, target bit 1
_CX_LO = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
)
# control bit 1, target bit 0
_CX_HI = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

# Weight pairs for the simultaneous-diagonalization trick below.  The first
# pair almost always works; the rest break accidental eigenvalue collisions
# of w1*Re(gamma) + w2*Im(gamma).
_DIAG_WEIGHTS = ((1.0, 1.0), (0.8, 1.7), (1.9, 0.3), (0.6, -1.1), (2.3, 0.7))


class AnsatzError(ValueError):
    pass


# ---------------------------------------------------------------------------
# block matrices


def rotation_matrix(phi: float, theta: float, lam: float) -> np.ndarray:
    """Z-Y-Z rotation RZ(phi) RY(theta) RZ(lam), determinant 1."""
    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    return np.array(
        [
            [c * np.exp(-0.5j * (phi + lam)), -s * np.exp(-0.5j * (phi - lam))],
            [s * np.exp(0.5j * (phi - lam)), c * np.exp(0.5j * (phi + lam))],
        ],
        dtype=complex,
    )


def entangler_matrix(a1: float, a2: float, a3: float) -> np.ndarray:
    """exp(i a1 XX + i a2 YY + i a3 ZZ); the three factors commute."""
    out = np.eye(4, dtype=complex)
    for angle, pauli in ((a1, _XX), (a2, _YY), (a3, _ZZ)):
        out = (np.cos(angle) * np.eye(4) + 1.0j * np.sin(angle) * pauli) @ out
    return out


def rotation_generators(phi: float, theta: float, lam: float) -> tuple:
    """Matrices G_k with dR/dangle_k = G_k R, in (phi, theta, lam) order."""
    rz = np.array([[np.exp(-0.5j * phi), 0.0], [0.0, np.exp(0.5j * phi)]])
    ry = np.array(
        [
            [np.cos(0.5 * theta), -np.sin(0.5 * theta)],
            [np.sin(0.5 * theta), np.cos(0.5 * theta)],
        ],
        dtype=complex,
    )
    g_phi = -0.5j * _Z
    g_theta = rz @ (-0.5j * _Y) @ rz.conj().T
    q = rz @ ry
    g_lam = q @ (-0.5j * _Z) @ q.conj().T
    return (g_phi, g_theta, g_lam)


_ENTANGLER_GENERATORS = (1.0j * _XX, 1.0j * _YY, 1.0j * _ZZ)


def entangler_generators() -> tuple:
    return _ENTANGLER_GENERATORS


# ---------------------------------------------------------------------------
# layout


@dataclass(frozen=True)
class BlockSpec:
    """One circuit block: its kind, qubit support, and flat parameter offset."""

    kind: str  # "rot" or "ent"
    support: tuple
    offset: int


@dataclass(frozen=True)
class AnsatzLayout:
    num_qubits: int
    num_layers: int

    @property
    def parameter_count(self) -> int:
        L, N = self.num_qubits, self.num_layers
        return 6 * L * N + 3 * (L - 1) * N

    @property
    def layer_width(self) -> int:
        return 6 * self.num_qubits + 3 * (self.num_qubits - 1)


def build_layout(num_qubits: int, num_layers: int) -> AnsatzLayout:
    if num_qubits < 2 or num_qubits % 2 != 0:
        raise AnsatzError(
            f"brick-wall pairing needs an even qubit count >= 2, got {num_qubits}"
        )
    if num_layers < 1:
        raise AnsatzError(f"need at least one layer, got {num_layers}")
    return AnsatzLayout(num_qubits, num_layers)


def block_specs(layout: AnsatzLayout) -> tuple:
    """All blocks in application order, each owning three consecutive angles."""
    L = layout.num_qubits
    specs = []
    offset = 0

    def emit(kind, support):
        nonlocal offset
        specs.append(BlockSpec(kind, support, offset))
        offset += 3

    for _ in range(layout.num_layers):
        for q in range(L):
            emit("rot", (q,))
        for a in range(0, L - 1, 2):
            emit("ent", (a, a + 1))
        for q in range(L):
            emit("rot", (q,))
        for a in range(1, L - 1, 2):
            emit("ent", (a, a + 1))
    assert offset == layout.parameter_count
    return tuple(specs)


def block_unitary(spec: BlockSpec, params: np.ndarray) -> np.ndarray:
    a, b, c = params[spec.offset : spec.offset + 3]
    if spec.kind == "rot":
        return rotation_matrix(a, b, c)
    return entangler_matrix(a, b, c)


def block_generators(spec: BlockSpec, params: np.ndarray) -> tuple:
    if spec.kind == "rot":
        a, b, c = params[spec.offset : spec.offset + 3]
        return rotation_generators(a, b, c)
    return _ENTANGLER_GENERATORS


def apply_ansatz(
    params: np.ndarray, layout: AnsatzLayout, initial: Statevector
) -> Statevector:
    params = np.asarray(params, dtype=float)
    if params.shape != (layout.parameter_count,):
        raise AnsatzError(
            f"expected {layout.parameter_count} parameters, got shape {params.shape}"
        )
    if initial.num_qubits != layout.num_qubits:
        raise AnsatzError(
            f"layout is for {layout.num_qubits} qubits, state has {initial.num_qubits}"
        )
    amps = initial.amplitudes.copy()
    n = layout.num_qubits
    for spec in block_specs(layout):
        amps = apply_matrix(amps, block_unitary(spec, params), spec.support, n)
    out = Statevector(layout.num_qubits, amps)
    check_norm(out)
    return out


def constant_params(layout: AnsatzLayout, value: float) -> np.ndarray:
    return np.full(layout.parameter_count, value, dtype=float)


def extend_params(
    params: np.ndarray, layout: AnsatzLayout, extra_layers: int, fill: float
) -> tuple:
    """Append layers initialized at `fill`, keeping existing angles in place.

    The flat layout is layer-major, so the old vector is a prefix of the new.
    """
    if extra_layers < 1:
        raise AnsatzError("extend_params needs extra_layers >= 1")
    grown = build_layout(layout.num_qubits, layout.num_layers + extra_layers)
    new_params = np.full(grown.parameter_count, fill, dtype=float)
    new_params[: layout.parameter_count] = params
    return new_params, grown


# ---------------------------------------------------------------------------
# gate synthesis


@dataclass(frozen=True)
class Gate:
    """Elementary gate: kind "rot" with (phi, theta, lam), or "cx" with
    qubits (control, target)."""

    kind: str
    qubits: tuple
    params: tuple = ()


def _require_unitary(U: np.ndarray) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.shape != (4, 4):
        raise AnsatzError(f"expected a 4x4 matrix, got shape {U.shape}")
    drift = np.abs(U.conj().T @ U - np.eye(4)).max()
    if drift > UNITARY_TOLERANCE:
        raise AnsatzError(f"matrix is not unitary (deviation {drift:.3e})")
    return U


def _to_su4(U: np.ndarray) -> np.ndarray:
    det = np.linalg.det(U)
    return U * np.exp(-0.25j * np.angle(det))


def _so4_pair(g_u: np.ndarray, g_v: np.ndarray):
    """Simultaneously diagonalize two symmetric unitaries sharing a spectrum.

    gamma = A + iB with A, B real symmetric and commuting, so the real
    eigenbasis of a generic combination w1*A + w2*B diagonalizes gamma.
    eigh orders by the combination's eigenvalues, aligning the two bases.
    Retries other weights when a collision spoils one of the matrices.
    """
    for w1, w2 in _DIAG_WEIGHTS:
        outs = []
        for g in (g_u, g_v):
            _, o = np.linalg.eigh(w1 * g.real + w2 * g.imag)
            if np.linalg.det(o) < 0.0:
                o = o.copy()
                o[:, 0] *= -1.0
            d = o.T @ g @ o
            if np.abs(d - np.diag(np.diagonal(d))).max() > 1e-11:
                break
            outs.append((o, np.diagonal(d).copy()))
        if len(outs) == 2 and np.abs(outs[0][1] - outs[1][1]).max() < 1e-9:
            return outs[0][0], outs[1][0]
    raise AnsatzError("failed to align the SO(4) diagonalizations")


def _so4_single(gamma: np.ndarray) -> np.ndarray:
    """SO(4) basis diagonalizing one symmetric unitary, kept close to the
    coordinate axes.

    When gamma is already (nearly) diagonal the returned matrix is the
    identity rather than an arbitrary eigenvalue-sorted permutation, so a
    bare entangler decomposes with trivial outer rotations.
    """
    for w1, w2 in _DIAG_WEIGHTS:
        _, o = np.linalg.eigh(w1 * gamma.real + w2 * gamma.imag)
        d = o.T @ gamma @ o
        if np.abs(d - np.diag(np.diagonal(d))).max() > 1e-11:
            continue
        dominant = np.abs(o).argmax(axis=0)
        if len(set(dominant.tolist())) == 4:
            order = np.empty(4, dtype=int)
            order[dominant] = np.arange(4)
            o = o[:, order]
        signs = np.where(np.diagonal(o) < 0.0, -1.0, 1.0)
        o = o * signs
        if np.linalg.det(o) < 0.0:
            k = int(np.abs(np.diagonal(o)).argmin())
            o = o.copy()
            o[:, k] *= -1.0
        return o
    raise AnsatzError("failed to diagonalize the Gram matrix over SO(4)")


def _tensor_split(M: np.ndarray) -> tuple:
    """Split M = kron(A, B) into determinant-1 factors (A acts on bit 1).

    Reshaping M to group (row, col) index pairs per factor turns a Kronecker
    product into a rank-1 matrix; the leading singular vectors are the
    vectorized factors.
    """
    R = M.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(R)
    if s[1] > 1e-8:
        raise AnsatzError(
            f"matrix is not a tensor product (residual {s[1]:.3e})"
        )
    A = (u[:, 0] * np.sqrt(s[0])).reshape(2, 2)
    B = (vh[0, :] * np.sqrt(s[0])).reshape(2, 2)
    scale = np.sqrt(np.linalg.det(A).astype(complex))
    A = A / scale
    B = B * scale
    return A, B


def _euler_zyz(M: np.ndarray) -> tuple:
    """Angles (phi, theta, lam) with rotation_matrix(...) == M for det-1 M."""
    M = M / np.sqrt(np.linalg.det(M).astype(complex))
    c = abs(M[0, 0])
    s = abs(M[1, 0])
    theta = 2.0 * np.arctan2(s, c)
    if s < 1e-12:
        # diagonal: only phi + lam is fixed
        phi = -2.0 * np.angle(M[0, 0])
        lam = 0.0
    elif c < 1e-12:
        # anti-diagonal: only phi - lam is fixed
        phi = 2.0 * np.angle(M[1, 0])
        lam = 0.0
    else:
        plus = -2.0 * np.angle(M[0, 0])
        minus = 2.0 * np.angle(M[1, 0])
        phi = 0.5 * (plus + minus)
        lam = 0.5 * (plus - minus)
    return (float(phi), float(theta), float(lam))


def gate_matrix(gate: Gate) -> np.ndarray:
    if gate.kind == "rot":
        return rotation_matrix(*gate.params)
    if gate.kind == "cx":
        return np.array(
            [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]],
            dtype=complex,
        )
    raise AnsatzError(f"unknown gate kind {gate.kind!r}")


def gates_unitary(gates, num_qubits: int) -> np.ndarray:
    """Dense product of a gate list, for verification."""
    dim = 1 << num_qubits
    cols = np.eye(dim, dtype=complex)
    for gate in gates:
        cols = apply_matrix(cols, gate_matrix(gate), gate.qubits, num_qubits)
    return cols


def _phase_distance(U: np.ndarray, V: np.ndarray) -> float:
    """max |U - phase * V| over the optimal global phase."""
    k = np.unravel_index(np.abs(U).argmax(), U.shape)
    phase = U[k] / V[k]
    return float(np.abs(U - phase * V).max())


def synthesize_block(U: np.ndarray) -> tuple:
    """Exact three-CNOT circuit for a two-qubit unitary, up to global phase.

    Returns gates on local qubits 0 (matrix bit 0) and 1.  The interior is

        bit1: --C--X--RZ(d)--o--------X--B--
        bit0: --D--o--RY(b)--X--RY(a)--o--A--

    with angles built from the eigenvalue phases of gamma(SWAP U): any U
    shares a magic-basis double coset with this interior, and the outer
    single-qubit gates come out of the SO(4) alignment.  The leading SWAP
    (absorbed by swapping A and B at the end) fixes the determinant sign
    that three CNOTs would otherwise leave behind.
    """
    U = _require_unitary(U)
    target = _to_su4(U)
    sU = np.exp(0.25j * np.pi) * (_SWAP @ target)

    u = _MAGIC_DAG @ sU @ _MAGIC
    gamma_u = u @ u.T
    angles = np.sort(np.angle(np.linalg.eigvals(gamma_u)))
    x, y, z = angles[0], angles[1], angles[2]
    alpha = 0.5 * (x + y)
    beta = 0.5 * (x + z)
    delta = 0.5 * (z + y)

    rz_d = rotation_matrix(delta, 0.0, 0.0)
    ry_b = rotation_matrix(0.0, beta, 0.0)
    ry_a = rotation_matrix(0.0, alpha, 0.0)
    V = (
        _SWAP
        @ _CX_LO
        @ np.kron(_I2, ry_a)
        @ _CX_HI
        @ np.kron(rz_d, ry_b)
        @ _CX_LO
    )

    v = _MAGIC_DAG @ V @ _MAGIC
    o_u, o_v = _so4_pair(gamma_u, v @ v.T)
    G = o_u @ o_v.T
    H = v.conj().T @ G.T @ u
    if np.abs(H.imag).max() > 1e-9:
        raise AnsatzError("prefactor extraction left a complex residue")
    H = H.real

    AB = _MAGIC @ G @ _MAGIC_DAG
    CD = _MAGIC @ H @ _MAGIC_DAG
    A, B = _tensor_split(AB)  # A on bit 1, B on bit 0
    C, D = _tensor_split(CD)

    gates = (
        Gate("rot", (1,), _euler_zyz(C)),
        Gate("rot", (0,), _euler_zyz(D)),
        Gate("cx", (0, 1)),
        Gate("rot", (1,), (float(delta), 0.0, 0.0)),
        Gate("rot", (0,), (0.0, float(beta), 0.0)),
        Gate("cx", (1, 0)),
        Gate("rot", (0,), (0.0, float(alpha), 0.0)),
        Gate("cx", (0, 1)),
        # the absorbed SWAP exchanges which factor lands on which qubit
        Gate("rot", (0,), _euler_zyz(A)),
        Gate("rot", (1,), _euler_zyz(B)),
    )

    err = _phase_distance(target, gates_unitary(gates, 2))
    if err > SYNTHESIS_TOLERANCE:
        raise AnsatzError(f"synthesis verification failed ({err:.3e})")
    return gates


def decompose_entangler(a1: float, a2: float, a3: float) -> tuple:
    """Three-CNOT realization of exp(i a1 XX + i a2 YY + i a3 ZZ)."""
    return synthesize_block(entangler_matrix(a1, a2, a3))


def kak_full(U: np.ndarray) -> tuple:
    """Canonical form U ~ (A1 x A0) entangler(a) (B1 x B0) up to phase.

    Returns ((pre0, pre1, post0, post1), (a1, a2, a3)) with each rotation a
    Z-Y-Z angle triple; pre/post index the matrix bit they act on.  Fifteen
    angles in total.
    """
    U = _require_unitary(U)
    target = _to_su4(U)
    m = _MAGIC_DAG @ target @ _MAGIC
    gamma = m @ m.T

    o = _so4_single(gamma)
    lam = np.diagonal(o.T @ gamma @ o)
    theta = 0.5 * np.angle(lam)
    h = np.exp(-1.0j * theta)[:, None] * (o.T @ m)
    if np.abs(h.imag).max() > 1e-9:
        raise AnsatzError("canonical split left a complex residue")
    h = h.real
    if np.linalg.det(h) < 0.0:
        # move the sign into a half-turn of the diagonal phase
        theta = theta.copy()
        theta[0] += np.pi
        h = h.copy()
        h[0, :] *= -1.0

    # diag(e^{i theta}) in the magic basis is an entangler; solve for its
    # angles from the Bell-state phase pattern (the mean is global phase)
    t0, t1, t2, t3 = theta
    a1 = 0.25 * (t0 - t1 + t2 - t3)
    a2 = 0.25 * (-t0 + t1 + t2 - t3)
    a3 = 0.25 * (t0 + t1 - t2 - t3)

    K1 = _MAGIC @ o @ _MAGIC_DAG
    K2 = _MAGIC @ h @ _MAGIC_DAG
    A1, A0 = _tensor_split(K1)
    B1, B0 = _tensor_split(K2)

    rebuilt = K1 @ entangler_matrix(a1, a2, a3) @ K2
    err = _phase_distance(target, rebuilt)
    if err > KAK_TOLERANCE:
        raise AnsatzError(f"canonical form verification failed ({err:.3e})")
    return (
        (_euler_zyz(B0), _euler_zyz(B1), _euler_zyz(A0), _euler_zyz(A1)),
        (float(a1), float(a2), float(a3)),
    )


def circuit_gates(params: np.ndarray, layout: AnsatzLayout) -> tuple:
    """Elementary-gate realization of the whole ansatz, in application order.

    Rotation blocks pass through unchanged; every entangler is expanded into
    its three-CNOT circuit, so each block contributes exactly 3 CNOTs.
    """
    params = np.asarray(params, dtype=float)
    if params.shape != (layout.parameter_count,):
        raise AnsatzError(
            f"expected {layout.parameter_count} parameters, got shape {params.shape}"
        )
    gates = []
    for spec in block_specs(layout):
        a, b, c = params[spec.offset : spec.offset + 3]
        if spec.kind == "rot":
            gates.append(Gate("rot", spec.support, (float(a), float(b), float(c))))
            continue
        for gate in decompose_entangler(a, b, c):
            mapped = tuple(spec.support[slot] for slot in gate.qubits)
            gates.append(Gate(gate.kind, mapped, gate.params))
    return tuple(gates)
