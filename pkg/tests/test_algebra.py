"""Dynkin data, encodings, TL/braid generators, shift and Y operator.

Dense relation checks run on the smallest chains where each statement is
meaningful; the full parameter sweep lives in the acceptance suite.
"""

import math

import numpy as np
import pytest

from rsosvqe import oracle
from rsosvqe.algebra import (
    AlgebraError,
    LocalOperator,
    apply_shift,
    apply_Y,
    build_braid,
    build_chain,
    build_dynkin,
    build_encoding,
    build_hamiltonian,
    build_shift,
    build_tci_tl,
    build_tl_qubit,
    hamiltonian_prefactor,
    measure_Yu,
    tci_coefficients,
    tci_hamiltonian,
    tci_label,
    tci_strings,
    verify_algebra,
    verify_tci_algebra,
)
from rsosvqe.statevector import Statevector, apply_local, from_rsos_product


def dense(op, num_qubits):
    """Dense matrix of a LocalOperator on the full register."""
    dim = 2**num_qubits
    columns = np.eye(dim, dtype=np.complex128)
    out = np.empty((dim, dim), dtype=np.complex128)
    for c in range(dim):
        out[:, c] = apply_local(
            Statevector(num_qubits, columns[:, c]), op
        ).amplitudes
    return out


def dense_sum(terms, num_qubits):
    return sum(dense(op, num_qubits) for op in terms)


# ---------------------------------------------------------------------------
# Dynkin data


def test_dynkin_weights_p3_closed_form():
    # phi(a) = sqrt(2 gamma / pi) sin(a gamma); for p=3 this is (1/2, 1/sqrt2, 1/2)
    spec = build_dynkin(3)
    assert np.allclose(spec.weights, [0.5, 0.7071067811865476, 0.5], atol=1e-15)
    assert abs(spec.loop_weight() - math.sqrt(2.0)) < 1e-15
    assert abs(spec.q - complex(math.cos(math.pi / 4), math.sin(math.pi / 4))) < 1e-15


@pytest.mark.parametrize("p", range(3, 9))
def test_dynkin_perron_relation(p):
    spec = build_dynkin(p)
    residual = spec.adjacency @ spec.weights - spec.loop_weight() * spec.weights
    assert np.max(np.abs(residual)) < 1e-12
    assert np.all(spec.weights > 0)
    assert spec.neighbors(1) == (2,)
    assert spec.neighbors(2) == (1, 3)


def test_dynkin_range_guard():
    with pytest.raises(AlgebraError):
        build_dynkin(2)
    with pytest.raises(AlgebraError):
        build_dynkin(9)


# ---------------------------------------------------------------------------
# Site encodings


def test_encoding_tables_published_values():
    assert build_encoding(3).ket(1) == "du"
    assert build_encoding(3).ket(2) == "dd"
    assert build_encoding(3).ket(3) == "ud"
    enc4 = build_encoding(4)
    assert [enc4.ket(a) for a in range(1, 5)] == ["du", "dd", "ud", "uu"]
    enc5 = build_encoding(5)
    assert [enc5.ket(a) for a in range(1, 6)] == ["ddd", "ddu", "duu", "dud", "udu"]


def test_encoding_extension_p6_to_p8():
    # lexicographically smallest unused ket with the node's parity, downs first
    enc8 = build_encoding(8)
    assert [enc8.ket(a) for a in range(6, 9)] == ["udd", "uud", "uuu"]
    for p in (6, 7, 8):
        enc = build_encoding(p)
        codes = [enc.code(a) for a in range(1, p + 1)]
        assert len(set(codes)) == p
        for a in range(1, p + 1):
            assert bin(enc.code(a)).count("1") % 2 == a % 2


def test_encoding_decode_and_guards():
    enc = build_encoding(4)
    for a in range(1, 5):
        assert enc.decode(enc.code(a)) == a
    enc5 = build_encoding(5)
    unencoded = set(range(8)) - {enc5.code(a) for a in range(1, 6)}
    for pattern in unencoded:
        assert enc5.decode(pattern) is None
    with pytest.raises(AlgebraError):
        enc.code(5)


# ---------------------------------------------------------------------------
# TL generators


def test_tl_matrix_elements_follow_rsos_formula():
    cfg = build_chain(4, 3, "open")
    e = build_tl_qubit(cfg, 1)
    dyn, enc = cfg.dynkin, cfg.encoding

    def window_index(a, b, c):
        return enc.code(a) | (enc.code(b) << 2) | (enc.code(c) << 4)

    # <a, b1, a| e |a, b2, a> = sqrt(phi(b1) phi(b2)) / phi(a)
    for a in range(1, 5):
        for b1 in dyn.neighbors(a):
            for b2 in dyn.neighbors(a):
                got = e.matrix[window_index(a, b1, a), window_index(a, b2, a)]
                want = math.sqrt(dyn.weight(b1) * dyn.weight(b2)) / dyn.weight(a)
                assert abs(got - want) < 1e-15
    # mismatched ends give zero
    assert e.matrix[window_index(2, 1, 2), window_index(2, 3, 4)] == 0.0
    assert e.matrix[window_index(2, 1, 4), window_index(2, 1, 4)] == 0.0


@pytest.mark.parametrize("p", [3, 4, 5])
def test_tl_square_hermiticity_projector(p):
    cfg = build_chain(p, 3, "open")
    e = build_tl_qubit(cfg, 1).matrix
    beta = cfg.dynkin.loop_weight()
    assert np.max(np.abs(e - e.conj().T)) == 0.0
    assert np.max(np.abs(e @ e - beta * e)) < 1e-14
    proj = e / beta
    assert np.max(np.abs(proj @ proj - proj)) < 1e-14


def test_tl_triple_product_reduces_to_adjacency_projector():
    # e_j e_{j+1} e_j = e_j A_{j+1, j+2} exactly on the full qubit space,
    # A being the diagonal bond-admissibility projector.
    cfg = build_chain(4, 4, "open")
    n = cfg.num_qubits
    e1 = dense(build_tl_qubit(cfg, 1), n)
    e2 = dense(build_tl_qubit(cfg, 2), n)

    enc = cfg.encoding
    adm = np.zeros((16, 16))
    for a in range(1, 5):
        for b in cfg.dynkin.neighbors(a):
            idx = enc.code(a) | (enc.code(b) << 2)
            adm[idx, idx] = 1.0
    proj = dense(LocalOperator(cfg.site_qubits(2) + cfg.site_qubits(3), adm), n)

    assert np.max(np.abs(e1 @ e2 @ e1 - e1 @ proj)) < 1e-13


def test_generator_index_guards():
    cfg = build_chain(4, 4, "open")
    with pytest.raises(AlgebraError):
        build_tl_qubit(cfg, 0)
    with pytest.raises(AlgebraError):
        build_tl_qubit(cfg, 3)
    per = build_chain(4, 4, "periodic")
    # periodic wrap: e_3 straddles sites (2, 3, 0)
    assert build_tl_qubit(per, 3).support == (4, 5, 6, 7, 0, 1)


def test_hamiltonian_prefactor_and_terms():
    # -gamma / (pi sin gamma) at p=3 is -1 / (2 sqrt 2)
    assert abs(hamiltonian_prefactor(build_dynkin(3)) + 1 / (2 * math.sqrt(2))) < 1e-15
    cfg = build_chain(4, 5, "open")
    terms = build_hamiltonian(cfg)
    assert len(terms) == 3  # j in 1..L_R-2
    per = build_chain(4, 4, "periodic")
    assert len(build_hamiltonian(per)) == 4


# ---------------------------------------------------------------------------
# Braids


@pytest.mark.parametrize("p", [3, 4, 5])
def test_braid_unitary_and_closed_form_inverse(p):
    cfg = build_chain(p, 3, "open")
    g = build_braid(cfg, 1).matrix
    ginv = build_braid(cfg, 1, inverse=True).matrix
    eye = np.eye(g.shape[0])
    assert np.max(np.abs(g @ g.conj().T - eye)) < 1e-14
    assert np.max(np.abs(g @ ginv - eye)) < 1e-14


def test_braid_phase_branch():
    # (-q)^(1/2) branch is exp(+i (pi + gamma) / 2); squaring must give -q
    cfg = build_chain(4, 3, "open")
    e = build_tl_qubit(cfg, 1)
    g = build_braid(cfg, 1)
    # on the kernel of e the braid is the pure phase
    pattern = cfg.encoding.code(4) | (cfg.encoding.code(4) << 2) | (
        cfg.encoding.code(4) << 4
    )
    phase = g.matrix[pattern, pattern]
    assert abs(e.matrix[pattern, pattern]) == 0.0
    assert abs(phase**2 + cfg.dynkin.q) < 1e-15


# ---------------------------------------------------------------------------
# Shift and topological symmetry


def test_shift_permutation_moves_sites_forward():
    cfg = build_chain(4, 4, "periodic")
    assert build_shift(cfg) == tuple((k + 2) % 8 for k in range(8))
    assert build_shift(cfg, reverse=True) == tuple((k - 2) % 8 for k in range(8))
    with pytest.raises(AlgebraError):
        build_shift(build_chain(4, 4, "open"))


def test_shift_on_product_state_and_order():
    cfg = build_chain(4, 4, "periodic")
    state = from_rsos_product(cfg.encoding, (2, 1, 2, 3))
    shifted = apply_shift(cfg, state)
    assert np.array_equal(
        shifted.amplitudes, from_rsos_product(cfg.encoding, (3, 2, 1, 2)).amplitudes
    )
    back = apply_shift(cfg, shifted, inverse=True)
    assert np.array_equal(back.amplitudes, state.amplitudes)
    cycled = state
    for _ in range(cfg.num_sites):
        cycled = apply_shift(cfg, cycled)
    assert np.array_equal(cycled.amplitudes, state.amplitudes)


def test_Y_is_hermitian_and_commutes_with_H():
    cfg = build_chain(3, 4, "periodic")
    n = cfg.num_qubits
    dim = 2**n
    y = np.empty((dim, dim), dtype=np.complex128)
    eye = np.eye(dim, dtype=np.complex128)
    for c in range(dim):
        y[:, c] = apply_Y(cfg, Statevector(n, eye[:, c])).amplitudes
    assert np.max(np.abs(y - y.conj().T)) < 1e-13

    h = dense_sum(build_hamiltonian(cfg), n)
    assert np.max(np.abs(h @ y - y @ h)) < 1e-13


def test_measure_Yu_on_exact_ground_state():
    # lattice value 2 cos(pi / (p+1)) on the periodic ground state
    cfg = build_chain(3, 4, "periodic")
    result = oracle.ground_state(cfg)
    state = oracle.embed(result.basis, result.vector)
    value = measure_Yu(cfg, state)
    assert abs(value.imag) < 1e-12
    assert abs(value.real - math.sqrt(2.0)) < 1e-9


def test_Y_requires_periodic():
    cfg = build_chain(4, 4, "open")
    state = from_rsos_product(cfg.encoding, (2, 1, 2, 1))
    with pytest.raises(AlgebraError):
        apply_Y(cfg, state)


# ---------------------------------------------------------------------------
# Relation report


@pytest.mark.parametrize(
    "p,num_sites,boundary",
    [(3, 4, "open"), (4, 4, "open"), (4, 4, "periodic"), (5, 4, "open")],
)
def test_verify_algebra_small_chains(p, num_sites, boundary):
    report = verify_algebra(build_chain(p, num_sites, boundary))
    assert report.within(1e-12), report.deviations
    for key in ("hermiticity", "tl_square", "projector", "braid_unitary",
                "braid_inverse", "tl_triple", "braid_yang_baxter"):
        assert key in report.deviations


def test_verify_algebra_report_helpers():
    report = verify_algebra(build_chain(3, 4, "open"))
    assert report.max_deviation() == max(report.deviations.values())
    assert not report.within(report.max_deviation() / 2 or 1e-300)


# ---------------------------------------------------------------------------
# Compact tricritical-Ising encoding


def test_tci_coefficients_are_p4_weights():
    lam, mu = tci_coefficients()
    assert abs(lam - 0.3717480344601845) < 1e-15
    assert abs(mu - 0.6015009550075456) < 1e-15
    dyn = build_dynkin(4)
    assert lam == dyn.weight(1) and mu == dyn.weight(2)


def test_tci_relations_and_hamiltonian_shape():
    report = verify_tci_algebra(5, "open")
    assert report.within(1e-12), report.deviations
    assert len(tci_hamiltonian(6, "open")) == 4
    assert len(tci_hamiltonian(6, "periodic")) == 6
    assert build_tci_tl(5, 6, "periodic").support == (4, 5, 0)
    with pytest.raises(AlgebraError):
        build_tci_tl(0, 6, "open")


def test_tci_strings_match_fibonacci_lucas_counts():
    # no-adjacent-down-spin strings: F(L+2) open, Lucas(L) periodic
    def fib(n):
        a, b = 1, 1
        for _ in range(n - 2):
            a, b = b, a + b
        return b

    for L in (3, 4, 6, 8):
        assert len(tci_strings(L, "open")) == fib(L + 2)
    assert len(tci_strings(4, "periodic")) == 7
    assert len(tci_strings(6, "periodic")) == 18
    pinned = tci_strings(4, "open", ends=(0, 0))
    assert all(s & 1 == 0 and (s >> 3) & 1 == 0 for s in pinned)


def test_tci_label_sublattices():
    assert tci_label(0, 0) == 2 and tci_label(0, 1) == 4
    assert tci_label(1, 0) == 3 and tci_label(1, 1) == 1
    assert tci_label(2, 0) == 2
