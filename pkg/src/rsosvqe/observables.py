"""Diagnostics that probe whether a register state behaves like an RSOS chain.

Everything here reads amplitudes; nothing mutates a state.  The four probes:

* parity_profile: expectation of the product of Pauli-Z over each site's
  qubits.  The encoding ties a site's spin-down count to its label parity,
  so admissible states alternate between +1 (even label) and -1 (odd label)
  along the chain.
* site_probabilities: probability of each node label at each site, read off
  the encoding table.  Bit patterns outside the table contribute to no
  column, so a row summing below one signals unphysical weight.
* sector_overlap: total probability inside the adjacency-admissible
  subspace.  Open-chain admissibility places no condition on the end
  labels, because the circuit has no reason to conserve them.
* yu_expectation: the topological symmetry eigenvalue; on a critical ground
  state this sits at 2 cos(pi / (p+1)) independent of chain length.

<Yu> is only guaranteed real on eigenstates of the Hamiltonian, since Yu
itself is not Hermitian even on the physical sector.  The imaginary residue
is therefore a *diagnostic*, reported alongside the real part, with a
caller-chosen ceiling: tight for exact eigenstates, loose for variational
approximations whose small out-of-eigenstate component leaks an imaginary
contribution far above machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import ChainConfig, measure_Yu
from .oracle import physical_indices
from .statevector import Statevector, expectation

YU_IMAG_TOLERANCE = 1e-9
PROBABILITY_SLACK = 1e-9


class ObservableError(ValueError):
    pass


@dataclass(frozen=True)
class ObservableReport:
    energy: float | None
    parity_profile: np.ndarray  # one entry per RSOS site
    site_probs: np.ndarray  # [site, label-1]
    sector_overlap: float
    yu: float | None = None
    yu_imag: float | None = None

    def __post_init__(self):
        if np.abs(self.parity_profile).max() > 1.0 + PROBABILITY_SLACK:
            raise ObservableError("parity expectation outside [-1, 1]")
        rows = self.site_probs.sum(axis=1)
        if rows.max() > 1.0 + PROBABILITY_SLACK:
            raise ObservableError("site probabilities sum above 1")


def _probabilities(state: Statevector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def parity_profile(state: Statevector, cfg: ChainConfig) -> np.ndarray:
    """<prod Z> over each site's qubits: +1 even label, -1 odd label."""
    _check_register(state, cfg)
    probs = _probabilities(state)
    indices = np.arange(probs.size, dtype=np.int64)
    n_p = cfg.encoding.qubits_per_site
    out = np.empty(cfg.num_sites)
    for j in range(cfg.num_sites):
        down = np.zeros(probs.size, dtype=np.int64)
        for k in range(n_p * j, n_p * j + n_p):
            down += (indices >> k) & 1
        signs = 1.0 - 2.0 * (down & 1)
        out[j] = float(probs @ signs)
    return out


def site_probabilities(state: Statevector, cfg: ChainConfig) -> np.ndarray:
    _check_register(state, cfg)
    probs = _probabilities(state)
    indices = np.arange(probs.size, dtype=np.int64)
    n_p = cfg.encoding.qubits_per_site
    mask = (1 << n_p) - 1
    out = np.zeros((cfg.num_sites, cfg.dynkin.p))
    for j in range(cfg.num_sites):
        patterns = (indices >> (n_p * j)) & mask
        for a in range(1, cfg.dynkin.p + 1):
            out[j, a - 1] = float(probs[patterns == cfg.encoding.code(a)].sum())
    return out


def sector_overlap(state: Statevector, cfg: ChainConfig) -> float:
    _check_register(state, cfg)
    probs = _probabilities(state)
    return float(probs[physical_indices(cfg)].sum())


def yu_expectation(
    state: Statevector, cfg: ChainConfig, imag_tol: float = YU_IMAG_TOLERANCE
) -> float:
    """Real part of <Yu>, guarded by a ceiling on the imaginary residue."""
    if cfg.boundary != "periodic":
        raise ObservableError("the topological symmetry needs a periodic chain")
    _check_register(state, cfg)
    value = measure_Yu(cfg, state)
    if abs(value.imag) > imag_tol:
        raise ObservableError(
            f"<Yu> imaginary part {value.imag:.3e} exceeds {imag_tol:.1e}; "
            "the state is far from an eigenstate"
        )
    return float(value.real)


def disallowed_site_mass(
    parity: np.ndarray, site_probs: np.ndarray
) -> np.ndarray:
    """Probability per site of label content forbidden by the alternation.

    The sign of the measured parity picks each site's label parity; all
    weight elsewhere (wrong-parity labels plus unencoded bit patterns) is
    disallowed.  Admissible configurations alternate parity exactly, so on
    an embedded eigenstate this vanishes.
    """
    num_sites, p = site_probs.shape
    out = np.empty(num_sites)
    for j in range(num_sites):
        even_allowed = parity[j] >= 0.0
        allowed = sum(
            site_probs[j, a - 1]
            for a in range(1, p + 1)
            if (a % 2 == 0) == even_allowed
        )
        out[j] = 1.0 - allowed
    return out


def measure(
    state: Statevector,
    cfg: ChainConfig,
    terms=None,
    include_yu: bool | None = None,
    yu_imag_tol: float = YU_IMAG_TOLERANCE,
) -> ObservableReport:
    """Assemble the full report; `terms` enables the energy entry and
    include_yu defaults to whatever the boundary allows."""
    if include_yu is None:
        include_yu = cfg.boundary == "periodic"
    energy = expectation(state, terms) if terms is not None else None
    yu = yu_imag = None
    if include_yu:
        if cfg.boundary != "periodic":
            raise ObservableError("topological symmetry needs a periodic chain")
        raw = measure_Yu(cfg, state)
        if abs(raw.imag) > yu_imag_tol:
            raise ObservableError(
                f"<Yu> imaginary part {raw.imag:.3e} exceeds {yu_imag_tol:.1e}"
            )
        yu, yu_imag = float(raw.real), float(raw.imag)
    return ObservableReport(
        energy=energy,
        parity_profile=parity_profile(state, cfg),
        site_probs=site_probabilities(state, cfg),
        sector_overlap=sector_overlap(state, cfg),
        yu=yu,
        yu_imag=yu_imag,
    )


def parity_csv_rows(report: ObservableReport):
    yield ("site", "value")
    for j, value in enumerate(report.parity_profile):
        yield (j, repr(float(value)))


def site_probs_csv_rows(report: ObservableReport):
    yield ("site", "a", "prob")
    num_sites, p = report.site_probs.shape
    for j in range(num_sites):
        for a in range(1, p + 1):
            yield (j, a, repr(float(report.site_probs[j, a - 1])))


def _check_register(state: Statevector, cfg: ChainConfig) -> None:
    if state.num_qubits != cfg.num_qubits:
        raise ObservableError(
            f"state has {state.num_qubits} qubits, chain needs {cfg.num_qubits}"
        )
