"""Command-line runner.

Subcommands:

    verify-algebra   relation deviations for the configured chain
    exact            constrained-basis reference energies
    optimize         variational run with layer growth
    measure          diagnostics of a saved parameter vector
    export-circuit   OpenQASM 2.0 dump of the decomposed circuit
    reproduce        bundled recipes: fig1 | fig2 | fig3

Every run writes a manifest.json (config digest, seed, versions) next to its
artifacts; outputs carry no timestamps, so a rerun with the same config and
seed reproduces them byte for byte (stage wall times live in a separate
"timings" block of summary.json and are the one documented exception).

Exit codes: 0 success, 1 invalid config or usage, 2 numerical failure,
3 optimization finished without reaching the target error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

import scipy

from . import __version__, algebra, observables, oracle
from .algebra import AlgebraError, tci_label
from .ansatz import AnsatzError, apply_ansatz, build_layout, circuit_gates
from .config import ConfigError, ExperimentConfig, load_config
from .observables import ObservableError
from .optimize import OptimizerError, iteration_csv_rows, optimize_with_growth
from .oracle import OracleError
from .qasm import QasmError, write_qasm
from .statevector import EngineError, Statevector, basis_state, from_rsos_product

ALGEBRA_TOLERANCE = 1e-12
# Variational states are not eigenstates; their <Yu> carries an imaginary
# residue far above the eigenstate-grade default, so measurement runs get a
# loose ceiling and report the residue instead of failing on it.
VQE_YU_IMAG_CEILING = 0.2

_NUMERICAL_ERRORS = (
    AlgebraError,
    AnsatzError,
    EngineError,
    ObservableError,
    OptimizerError,
    OracleError,
    QasmError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# small IO helpers


def _clean(value):
    """json-friendly copy: numpy scalars unwrapped, NaN -> None."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return None if math.isnan(value) else value
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(_clean(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow(row)


def _prepare_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _write_manifest(out_dir: str, subcommand: str, digest: str, seed, config) -> None:
    _write_json(
        os.path.join(out_dir, "manifest.json"),
        {
            "subcommand": subcommand,
            "config_digest": digest,
            "seed": seed,
            "config": config,
            "versions": {
                "rsosvqe": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": sys.version.split()[0],
            },
        },
    )


def _out_dir(args, cfg: ExperimentConfig | None) -> str:
    if args.output_dir:
        return _prepare_dir(args.output_dir)
    if cfg is not None and cfg.output_dir:
        return _prepare_dir(cfg.output_dir)
    return _prepare_dir(".")


def _initial_state(cfg: ExperimentConfig) -> Statevector:
    if cfg.encoding_variant == "tci-appendix":
        index = 0
        for j, a in enumerate(cfg.initial_labels):
            if a == tci_label(j, 1):
                index |= 1 << j
        return basis_state(cfg.chain.num_sites, index)
    return from_rsos_product(cfg.chain.encoding, cfg.initial_labels)


def _hamiltonian_terms(cfg: ExperimentConfig):
    if cfg.encoding_variant == "tci-appendix":
        return algebra.tci_hamiltonian(cfg.chain.num_sites, cfg.chain.boundary)
    return algebra.build_hamiltonian(cfg.chain)


def _reference_energy(cfg: ExperimentConfig) -> float:
    # The constrained-basis oracle is the reference for both encodings; the
    # one-qubit-per-site chain targets the same spectrum at matched length.
    return oracle.ground_state(cfg.chain, cfg.boundary_values).energy


# ---------------------------------------------------------------------------
# subcommands


def _cmd_verify_algebra(args) -> int:
    cfg = load_config(args.config, args.seed)
    out = _out_dir(args, cfg)
    if cfg.encoding_variant == "tci-appendix":
        report = algebra.verify_tci_algebra(cfg.chain.num_sites, cfg.chain.boundary)
    else:
        report = algebra.verify_algebra(cfg.chain)
    payload = {
        "relations": dict(report.deviations),
        "max_deviation": report.max_deviation(),
        "tolerance": ALGEBRA_TOLERANCE,
        "passed": report.within(ALGEBRA_TOLERANCE),
    }
    _write_json(os.path.join(out, "algebra_report.json"), payload)
    _write_manifest(out, "verify-algebra", cfg.digest, cfg.seed, cfg.resolved)
    for name, value in sorted(report.deviations.items()):
        print(f"{name}: {value:.3e}")
    print(f"max deviation {report.max_deviation():.3e} "
          f"({'ok' if payload['passed'] else 'FAILED'})")
    return 0 if payload["passed"] else 2


def _cmd_exact(args) -> int:
    cfg = load_config(args.config, args.seed)
    out = _out_dir(args, cfg)
    if cfg.encoding_variant == "tci-appendix":
        ends = None
        if cfg.boundary_values is not None:
            ends = tuple(
                0 if a == tci_label(site, 0) else 1
                for site, a in zip(
                    (0, cfg.chain.num_sites - 1), cfg.boundary_values
                )
            )
        energies = oracle.tci_restricted_spectrum(
            cfg.chain.num_sites, cfg.chain.boundary, ends
        )
        payload = {
            "energy": float(energies[0]),
            "low_energies": [float(e) for e in energies[: min(8, energies.size)]],
            "basis_size": int(energies.size),
            "boundary_values": cfg.boundary_values,
        }
        spectrum = energies
    else:
        result = oracle.ground_state(cfg.chain, cfg.boundary_values)
        payload = {
            "energy": result.energy,
            "multiplicity": result.multiplicity,
            "residual": result.residual,
            "boundary_values": result.boundary_values,
            "low_energies": list(result.low_energies),
            "basis_size": len(result.basis),
        }
        spectrum = result.low_energies
    payload.update(
        {
            "p": cfg.chain.dynkin.p,
            "num_sites": cfg.chain.num_sites,
            "boundary": cfg.chain.boundary,
            "encoding": cfg.encoding_variant,
        }
    )
    _write_json(os.path.join(out, "exact.json"), payload)
    _write_csv(
        os.path.join(out, "spectrum.csv"),
        [("index", "energy")] + [(i, repr(float(e))) for i, e in enumerate(spectrum)],
    )
    _write_manifest(out, "exact", cfg.digest, cfg.seed, cfg.resolved)
    print(f"E_T = {payload['energy']!r}")
    return 0


def _run_optimize(cfg: ExperimentConfig, out: str, overshoot: bool) -> int:
    terms = _hamiltonian_terms(cfg)
    initial = _initial_state(cfg)
    reference = _reference_energy(cfg)
    result = optimize_with_growth(
        terms, initial, cfg.optimizer, reference_energy=reference,
        overshoot=overshoot,
    )

    _write_json(
        os.path.join(out, "params.json"),
        {
            "num_qubits": result.layout.num_qubits,
            "num_layers": result.layout.num_layers,
            "angles": [float(x) for x in result.params],
        },
    )
    _write_csv(os.path.join(out, "history.csv"), iteration_csv_rows(result.history))
    stages = [
        {
            "stage": s.stage,
            "num_layers": s.num_layers,
            "iterations": s.iterations,
            "energy": s.energy,
            "rel_error": s.rel_error,
            "accepted": s.accepted,
            "stop_reason": s.stop_reason,
            "warm_start_delta": s.warm_start_delta,
        }
        for s in result.history.stages
    ]
    _write_json(
        os.path.join(out, "summary.json"),
        {
            "energy": result.energy,
            "reference_energy": reference,
            "rel_error": result.rel_error,
            "converged": result.converged,
            "num_layers": result.layout.num_layers,
            "stages": stages,
            "timings": {  # wall clock; the one non-reproducible block
                "stage_seconds": [s.wall_time for s in result.history.stages],
            },
        },
    )
    print(
        f"E = {result.energy!r} (reference {reference!r}, "
        f"rel {result.rel_error:.3e}, N = {result.layout.num_layers}, "
        f"{'converged' if result.converged else 'not converged'})"
    )
    return 0 if result.converged else 3


def _cmd_optimize(args) -> int:
    cfg = load_config(args.config, args.seed)
    out = _out_dir(args, cfg)
    _write_manifest(out, "optimize", cfg.digest, cfg.seed, cfg.resolved)
    return _run_optimize(cfg, out, args.overshoot)


def _load_params(args, cfg: ExperimentConfig, out: str):
    path = args.params or os.path.join(out, "params.json")
    try:
        with open(path) as fh:
            data = json.load(fh)
        num_qubits = int(data["num_qubits"])
        num_layers = int(data["num_layers"])
        params = np.asarray(data["angles"], dtype=float)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot load parameters from {path!r}: {exc}") from None
    expected = (
        cfg.chain.num_sites
        if cfg.encoding_variant == "tci-appendix"
        else cfg.chain.num_qubits
    )
    if num_qubits != expected:
        raise ConfigError(
            f"parameter file is for {num_qubits} qubits, chain needs {expected}"
        )
    layout = build_layout(num_qubits, num_layers)
    if params.shape != (layout.parameter_count,):
        raise ConfigError(
            f"parameter file holds {params.size} angles, layout needs "
            f"{layout.parameter_count}"
        )
    return params, layout


def _cmd_measure(args) -> int:
    cfg = load_config(args.config, args.seed)
    if cfg.encoding_variant == "tci-appendix":
        raise ConfigError(
            "measure reads the generic encoding tables; the tci-appendix "
            "variant supports verify-algebra, exact, optimize, export-circuit"
        )
    out = _out_dir(args, cfg)
    params, layout = _load_params(args, cfg, out)
    state = apply_ansatz(params, layout, _initial_state(cfg))
    report = observables.measure(
        state, cfg.chain,
        terms=algebra.build_hamiltonian(cfg.chain),
        yu_imag_tol=VQE_YU_IMAG_CEILING,
    )
    disallowed = observables.disallowed_site_mass(
        report.parity_profile, report.site_probs
    )
    _write_csv(
        os.path.join(out, "parity_profile.csv"),
        observables.parity_csv_rows(report),
    )
    _write_csv(
        os.path.join(out, "site_probs.csv"),
        observables.site_probs_csv_rows(report),
    )
    _write_json(
        os.path.join(out, "observables.json"),
        {
            "energy": report.energy,
            "sector_overlap": report.sector_overlap,
            "yu": report.yu,
            "yu_imag": report.yu_imag,
            "yu_lattice_value": (
                2.0 * math.cos(math.pi / (cfg.chain.dynkin.p + 1))
                if cfg.chain.boundary == "periodic"
                else None
            ),
            "parity_profile": report.parity_profile,
            "disallowed_site_mass": disallowed,
        },
    )
    _write_manifest(out, "measure", cfg.digest, cfg.seed, cfg.resolved)
    print(
        f"energy {report.energy!r}, overlap {report.sector_overlap:.6f}"
        + (f", <Yu> {report.yu:.6f}" if report.yu is not None else "")
    )
    return 0


def _cmd_export_circuit(args) -> int:
    cfg = load_config(args.config, args.seed)
    out = _out_dir(args, cfg)
    params, layout = _load_params(args, cfg, out)
    gates = circuit_gates(params, layout)
    L = layout.num_qubits
    per_layer = 2 * L + 10 * (L // 2) + 10 * (L // 2 - 1)
    comments = {
        k * per_layer: f"layer {k + 1}" for k in range(layout.num_layers)
    }
    text = write_qasm(gates, L, comments)
    with open(os.path.join(out, "circuit.qasm"), "w") as fh:
        fh.write(text)
    _write_manifest(out, "export-circuit", cfg.digest, cfg.seed, cfg.resolved)
    print(f"wrote {len(gates)} gates for {L} qubits")
    return 0


# ---------------------------------------------------------------------------
# figure recipes


def _recipe_config(p, num_sites, boundary, seed) -> ExperimentConfig:
    from .config import parse_config

    return parse_config(
        {
            "chain": {"p": p, "num_sites": num_sites, "boundary": boundary},
            "run": {"seed": seed},
        }
    )


def _unit_energy_run(spec) -> int:
    """One optimize run; fig1 open chains and fig3 periodic chains."""
    p, num_sites, boundary, seed, out_dir, overshoot, with_yu = spec
    cfg = _recipe_config(p, num_sites, boundary, seed)
    out = _prepare_dir(out_dir)
    _write_manifest(out, "reproduce", cfg.digest, seed, cfg.resolved)
    code = _run_optimize(cfg, out, overshoot)
    if with_yu:
        args = argparse.Namespace(
            config=None, seed=seed, output_dir=out, params=None
        )
        params, layout = _load_params(args, cfg, out)
        state = apply_ansatz(params, layout, _initial_state(cfg))
        report = observables.measure(
            state, cfg.chain,
            terms=algebra.build_hamiltonian(cfg.chain),
            yu_imag_tol=VQE_YU_IMAG_CEILING,
        )
        exact = oracle.ground_state(cfg.chain)
        embedded = oracle.embed(exact.basis, exact.vector)
        yu_exact = observables.yu_expectation(embedded, cfg.chain, imag_tol=1e-6)
        _write_json(
            os.path.join(out, "observables.json"),
            {
                "energy": report.energy,
                "sector_overlap": report.sector_overlap,
                "yu": report.yu,
                "yu_imag": report.yu_imag,
                "yu_exact_ground": yu_exact,
                "yu_lattice_value": 2.0 * math.cos(math.pi / (p + 1)),
                "parity_profile": report.parity_profile,
            },
        )
        _write_csv(
            os.path.join(out, "parity_profile.csv"),
            observables.parity_csv_rows(report),
        )
        _write_csv(
            os.path.join(out, "site_probs.csv"),
            observables.site_probs_csv_rows(report),
        )
    return code


def _unit_exact_profile(spec) -> int:
    """Embedded exact ground state diagnostics at 18 qubits (fig2)."""
    p, num_sites, seed, out_dir = spec
    cfg = _recipe_config(p, num_sites, "open", seed)
    out = _prepare_dir(out_dir)
    _write_manifest(out, "reproduce", cfg.digest, seed, cfg.resolved)
    result = oracle.ground_state(cfg.chain)
    state = oracle.embed(result.basis, result.vector)
    report = observables.measure(
        state, cfg.chain, terms=algebra.build_hamiltonian(cfg.chain)
    )
    _write_csv(
        os.path.join(out, "parity_profile.csv"),
        observables.parity_csv_rows(report),
    )
    _write_csv(
        os.path.join(out, "site_probs.csv"),
        observables.site_probs_csv_rows(report),
    )
    _write_json(
        os.path.join(out, "observables.json"),
        {
            "energy": report.energy,
            "exact_energy": result.energy,
            "boundary_values": result.boundary_values,
            "sector_overlap": report.sector_overlap,
            "parity_profile": report.parity_profile,
        },
    )
    return 0


def _run_units(func, specs, jobs: int) -> int:
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            codes = list(pool.map(func, specs))
    else:
        codes = [func(spec) for spec in specs]
    return max(codes, default=0)


def _cmd_reproduce(args) -> int:
    seed = args.seed if args.seed is not None else 7
    out = _prepare_dir(args.output_dir or args.figure)
    _write_manifest(
        out, "reproduce", "-", seed, {"recipe": args.figure, "seed": seed}
    )
    if args.figure == "fig1":
        specs = [
            (4, 6, "open", seed, os.path.join(out, "p4-open"), args.overshoot, False),
            (5, 4, "open", seed, os.path.join(out, "p5-open"), args.overshoot, False),
        ]
        return _run_units(_unit_energy_run, specs, args.jobs)
    if args.figure == "fig2":
        specs = [
            (p, 9 if p == 4 else 6, seed, os.path.join(out, f"p{p}"))
            for p in (4, 5, 6, 7, 8)
        ]
        return _run_units(_unit_exact_profile, specs, args.jobs)
    if args.figure == "fig3":
        specs = [
            (4, 6, "periodic", seed, os.path.join(out, "p4-periodic"),
             args.overshoot, True),
            (5, 4, "periodic", seed, os.path.join(out, "p5-periodic"),
             args.overshoot, True),
        ]
        return _run_units(_unit_energy_run, specs, args.jobs)
    raise ConfigError(f"unknown figure {args.figure!r}")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> _Parser:
    parser = _Parser(prog="rsosvqe", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, config_required=True):
        if config_required:
            p.add_argument("--config", required=True, help="TOML run file")
        p.add_argument("--output-dir", help="artifact directory")
        p.add_argument("--seed", type=int, help="override the config seed")

    p = sub.add_parser("verify-algebra", help="check the defining relations")
    common(p)
    p.set_defaults(func=_cmd_verify_algebra)

    p = sub.add_parser("exact", help="constrained-basis reference energies")
    common(p)
    p.set_defaults(func=_cmd_exact)

    p = sub.add_parser("optimize", help="variational ground-state search")
    common(p)
    p.add_argument(
        "--overshoot", action="store_true",
        help="keep growing layers after the target error is reached",
    )
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("measure", help="diagnostics from a parameter file")
    common(p)
    p.add_argument("--params", help="params.json path (default: output dir)")
    p.set_defaults(func=_cmd_measure)

    p = sub.add_parser("export-circuit", help="write OpenQASM 2.0")
    common(p)
    p.add_argument("--params", help="params.json path (default: output dir)")
    p.set_defaults(func=_cmd_export_circuit)

    p = sub.add_parser("reproduce", help="bundled figure recipes")
    p.add_argument("figure", choices=("fig1", "fig2", "fig3"))
    p.add_argument("--output-dir", help="artifact directory")
    p.add_argument("--seed", type=int, help="recipe seed (default 7)")
    p.add_argument("--jobs", type=int, default=1, help="parallel units")
    p.add_argument(
        "--overshoot", action="store_true",
        help="keep growing layers after the target error is reached",
    )
    p.set_defaults(func=_cmd_reproduce)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
