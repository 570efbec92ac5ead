"""Energy minimization over the brick-wall circuit.

The gradient is analytic.  Writing the circuit as U_B ... U_1 with every
block's derivative dU/dtheta = G U for a small effective generator G, the
derivative of E = <psi|H|psi> is 2 Re <kappa_k| G psi_k> where psi_k is the
state after block k and kappa_k is H psi back-propagated through the blocks
above k.  One backward sweep therefore prices all parameters at roughly
three full-register operations per block: un-apply the block from both
vectors and form the small cross matrix M = psi_r kappa_r^dagger over the
block's support, after which each component is a trace against a 2x2 or
4x4 generator.

Optimization is plain ADAM with bias correction.  Layers are grown one at a
time, warm-starting from the best accepted parameters with fresh layers at
theta0/10, until the relative error against a reference energy reaches the
target or the layer budget runs out.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .ansatz import (
    AnsatzLayout,
    apply_ansatz,
    block_generators,
    block_specs,
    block_unitary,
    build_layout,
    constant_params,
    extend_params,
)
from .statevector import Statevector, apply_matrix, apply_terms

FINITE_DIFF_STEP = 1e-5
GRADIENT_CHECK_TOLERANCE = 1e-5
ACCEPT_SLACK = 1e-12


class OptimizerError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    theta0: float = 1.0
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_iterations: int = 2000
    plateau_window: int = 50
    plateau_tol: float = 1e-9
    target_rel_error: float = 5e-3
    layers_start: int | None = None  # default L/2
    layers_max: int | None = None  # default 2L
    gradient_check_components: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0.0:
            raise OptimizerError("learning rate must be positive")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise OptimizerError("ADAM betas must lie in (0, 1)")
        if self.max_iterations < 1 or self.plateau_window < 1:
            raise OptimizerError("iteration and plateau settings must be >= 1")
        if (
            self.layers_start is not None
            and self.layers_max is not None
            and not (1 <= self.layers_start <= self.layers_max)
        ):
            raise OptimizerError(
                f"bad layer schedule: start {self.layers_start}, "
                f"max {self.layers_max}"
            )


@dataclass(frozen=True)
class IterationRecord:
    stage: int
    iteration: int
    energy: float
    rel_error: float  # nan when no reference energy
    grad_norm: float


@dataclass(frozen=True)
class StageRecord:
    stage: int
    num_layers: int
    iterations: int
    energy: float
    rel_error: float
    accepted: bool
    stop_reason: str  # "target" | "plateau" | "max-iterations"
    warm_start_delta: float
    wall_time: float  # informational; excluded from reproducible outputs


@dataclass
class RunHistory:
    iterations: list = field(default_factory=list)
    stages: list = field(default_factory=list)


@dataclass
class GrowthResult:
    params: np.ndarray
    layout: AnsatzLayout
    energy: float
    rel_error: float
    converged: bool
    history: RunHistory


# ---------------------------------------------------------------------------
# gradient


def _split_axes(amps: np.ndarray, support, num_qubits: int):
    """View amps as (2^w, rest) with the support qubits leading.

    Mirrors the axis convention of statevector.apply_matrix: array axis
    num_qubits-1-q holds qubit q, and matrix index bit t is support[t].
    """
    w = len(support)
    axes = [num_qubits - 1 - q for q in reversed(support)]
    psi = np.moveaxis(amps.reshape((2,) * num_qubits), axes, range(w))
    return psi.reshape(1 << w, -1), psi.shape


def _merge_axes(mat: np.ndarray, shape, support, num_qubits: int):
    w = len(support)
    axes = [num_qubits - 1 - q for q in reversed(support)]
    psi = np.moveaxis(mat.reshape(shape), range(w), axes)
    return psi.reshape(1 << num_qubits)


def energy_gradient(params, layout: AnsatzLayout, terms, initial: Statevector):
    """Return (energy, gradient) of <psi(params)|H|psi(params)>."""
    params = np.asarray(params, dtype=float)
    specs = block_specs(layout)
    n = layout.num_qubits

    unitaries = [block_unitary(spec, params) for spec in specs]
    psi = initial.amplitudes.copy()
    for spec, U in zip(specs, unitaries):
        psi = apply_matrix(psi, U, spec.support, n)
    kappa = apply_terms(Statevector(n, psi), terms).amplitudes

    energy = np.vdot(psi, kappa)
    if abs(energy.imag) > 1e-9:
        raise OptimizerError(
            f"energy picked up an imaginary part ({energy.imag:.3e})"
        )
    energy = float(energy.real)

    grad = np.zeros(layout.parameter_count, dtype=float)
    for spec, U in zip(reversed(specs), reversed(unitaries)):
        a, shape = _split_axes(psi, spec.support, n)
        b, _ = _split_axes(kappa, spec.support, n)
        M = a @ b.conj().T
        for k, G in enumerate(block_generators(spec, params)):
            grad[spec.offset + k] = 2.0 * np.trace(G @ M).real
        # un-apply the block from both vectors while they are laid out
        psi = _merge_axes(U.conj().T @ a, shape, spec.support, n)
        kappa = _merge_axes(U.conj().T @ b, shape, spec.support, n)

    return energy, grad


def _energy_only(params, layout, terms, initial):
    psi = apply_ansatz(params, layout, initial)
    kappa = apply_terms(psi, terms)
    return float(np.vdot(psi.amplitudes, kappa.amplitudes).real)


def finite_difference_component(params, layout, terms, initial, index: int):
    h = FINITE_DIFF_STEP
    shifted = np.array(params, dtype=float)
    shifted[index] += h
    up = _energy_only(shifted, layout, terms, initial)
    shifted[index] -= 2.0 * h
    down = _energy_only(shifted, layout, terms, initial)
    return (up - down) / (2.0 * h)


def check_gradient(params, layout, terms, initial, components, rng) -> float:
    """Spot-check random gradient components against central differences.

    Returns the worst relative deviation; raises when it exceeds the
    tolerance, since a broken gradient silently corrupts the whole run.
    """
    _, grad = energy_gradient(params, layout, terms, initial)
    count = min(components, layout.parameter_count)
    picks = rng.choice(layout.parameter_count, size=count, replace=False)
    worst = 0.0
    for index in picks:
        fd = finite_difference_component(params, layout, terms, initial, index)
        # floor above central-difference roundoff (~1e-10 at step 1e-5), so
        # near-zero components at converged stage starts compare absolutely
        scale = max(abs(fd), abs(grad[index]), 1e-4)
        worst = max(worst, abs(grad[index] - fd) / scale)
    if worst > GRADIENT_CHECK_TOLERANCE:
        raise OptimizerError(
            f"analytic gradient disagrees with finite differences ({worst:.3e})"
        )
    return worst


# ---------------------------------------------------------------------------
# ADAM


@dataclass
class AdamState:
    config: OptimizerConfig
    m: np.ndarray
    v: np.ndarray
    step_count: int = 0

    @classmethod
    def fresh(cls, config: OptimizerConfig, dim: int) -> "AdamState":
        return cls(config, np.zeros(dim), np.zeros(dim))


def adam_step(state: AdamState, params: np.ndarray, grad: np.ndarray):
    cfg = state.config
    state.step_count += 1
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad * grad
    m_hat = state.m / (1.0 - cfg.beta1**state.step_count)
    v_hat = state.v / (1.0 - cfg.beta2**state.step_count)
    return params - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)


def _rel_error(energy: float, reference) -> float:
    if reference is None:
        return float("nan")
    return abs(energy / reference - 1.0)


def optimize_stage(
    params,
    layout: AnsatzLayout,
    terms,
    initial: Statevector,
    config: OptimizerConfig,
    reference_energy=None,
    stage: int = 1,
    history: RunHistory | None = None,
    stop_at_target: bool = True,
):
    """Run ADAM at a fixed layer count; returns (best_params, best_energy,
    stop_reason, iterations)."""
    params = np.array(params, dtype=float)
    adam = AdamState.fresh(config, params.size)
    energies = []
    best_energy = np.inf
    best_params = params
    stop_reason = "max-iterations"

    for iteration in range(1, config.max_iterations + 1):
        energy, grad = energy_gradient(params, layout, terms, initial)
        if not (np.isfinite(energy) and np.all(np.isfinite(grad))):
            raise OptimizerError(
                f"non-finite energy or gradient at stage {stage}, "
                f"iteration {iteration}"
            )
        energies.append(energy)
        if energy < best_energy:
            best_energy = energy
            best_params = params.copy()
        rel = _rel_error(energy, reference_energy)
        if history is not None:
            history.iterations.append(
                IterationRecord(
                    stage, iteration, energy, rel, float(np.linalg.norm(grad))
                )
            )
        if stop_at_target and reference_energy is not None and rel <= config.target_rel_error:
            stop_reason = "target"
            break
        if iteration > config.plateau_window:
            then = energies[-1 - config.plateau_window]
            scale = max(abs(energy), 1e-30)
            if abs(then - energy) / scale < config.plateau_tol:
                stop_reason = "plateau"
                break
        params = adam_step(adam, params, grad)

    return best_params, best_energy, stop_reason, len(energies)


def optimize_with_growth(
    terms,
    initial: Statevector,
    config: OptimizerConfig,
    reference_energy=None,
    overshoot: bool = False,
) -> GrowthResult:
    """Layer-growth schedule around optimize_stage.

    Starts at L/2 layers with every angle at theta0; each later stage
    warm-starts from the best accepted parameters, with all added layers at
    theta0/10.  A stage is accepted only if it does not raise the energy, so
    accepted stage energies are non-increasing.  With a reference energy the
    run stops once the relative error reaches the target (unless overshoot
    keeps it growing to the layer cap, to watch stability).
    """
    L = initial.num_qubits
    layers_start = config.layers_start or L // 2
    layers_max = config.layers_max or 2 * L
    if not (1 <= layers_start <= layers_max):
        raise OptimizerError(
            f"bad layer schedule: start {layers_start}, max {layers_max}"
        )

    history = RunHistory()
    layout = build_layout(L, layers_start)
    params = constant_params(layout, config.theta0)
    best_params, best_layout = params, layout
    best_energy = np.inf
    converged = False

    stage = 0
    num_layers = layers_start
    while True:
        stage += 1
        started = time.perf_counter()
        rng = np.random.default_rng(config.seed + stage)
        check_gradient(
            params, layout, terms, initial,
            config.gradient_check_components, rng,
        )
        start_energy = _energy_only(params, layout, terms, initial)
        warm_delta = (
            abs(start_energy - best_energy) if np.isfinite(best_energy) else 0.0
        )

        stage_params, stage_energy, stop_reason, iters = optimize_stage(
            params, layout, terms, initial, config,
            reference_energy=reference_energy,
            stage=stage, history=history,
            stop_at_target=not overshoot,
        )
        accepted = stage_energy <= best_energy + ACCEPT_SLACK
        if accepted:
            best_params, best_layout, best_energy = stage_params, layout, stage_energy
        rel = _rel_error(best_energy, reference_energy)
        history.stages.append(
            StageRecord(
                stage=stage,
                num_layers=num_layers,
                iterations=iters,
                energy=stage_energy,
                rel_error=_rel_error(stage_energy, reference_energy),
                accepted=accepted,
                stop_reason=stop_reason,
                warm_start_delta=warm_delta,
                wall_time=time.perf_counter() - started,
            )
        )

        if reference_energy is not None and rel <= config.target_rel_error:
            converged = True
            if not overshoot:
                break
        if num_layers >= layers_max:
            break

        grow_by = num_layers + 1 - best_layout.num_layers
        params, layout = extend_params(
            best_params, best_layout, grow_by, config.theta0 / 10.0
        )
        num_layers += 1

    return GrowthResult(
        params=best_params,
        layout=best_layout,
        energy=best_energy,
        rel_error=_rel_error(best_energy, reference_energy),
        converged=converged,
        history=history,
    )


def iteration_csv_rows(history: RunHistory):
    """Rows for the per-iteration CSV: stage, iteration, energy, rel_error,
    grad_norm."""
    yield ("stage", "iteration", "energy", "rel_error", "grad_norm")
    for rec in history.iterations:
        yield (
            rec.stage,
            rec.iteration,
            repr(rec.energy),
            repr(rec.rel_error),
            repr(rec.grad_norm),
        )
