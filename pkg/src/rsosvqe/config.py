"""Experiment configuration: TOML ingestion and cross-field validation.

A run file has up to four tables:

    [chain]      p, num_sites (or qubits), boundary, encoding,
                 boundary_values, initial_state
    [ansatz]     layers_start, layers_max, theta0
    [optimizer]  learning_rate, beta1, beta2, epsilon, max_iterations,
                 plateau_window, plateau_tol, target_rel_error
    [run]        seed, output_dir

Everything except [chain] is optional.  `num_sites` counts RSOS sites;
`qubits` may be given instead (or additionally, as a consistency check) and
must equal qubits_per_site * num_sites.  Validation failures raise
ConfigError, which the command line reports as exit code 1.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .algebra import (
    AlgebraError,
    ChainConfig,
    build_chain,
    build_encoding,
    tci_label,
)
from .optimize import OptimizerConfig, OptimizerError

ENCODING_VARIANTS = ("generic", "tci-appendix")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    chain: ChainConfig
    encoding_variant: str
    initial_labels: tuple
    boundary_values: tuple | None
    optimizer: OptimizerConfig
    seed: int
    output_dir: str | None
    resolved: dict  # normalized content, hashed into the manifest

    @property
    def digest(self) -> str:
        blob = json.dumps(self.resolved, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _require(table: dict, key: str, kinds, where: str):
    if key not in table:
        raise ConfigError(f"missing required key {key!r} in [{where}]")
    value = table[key]
    if not isinstance(value, kinds) or isinstance(value, bool):
        raise ConfigError(f"[{where}] {key} has the wrong type: {value!r}")
    return value


def _optional(table: dict, key: str, kinds, default, where: str):
    if key not in table:
        return default
    value = table[key]
    if not isinstance(value, kinds) or isinstance(value, bool):
        raise ConfigError(f"[{where}] {key} has the wrong type: {value!r}")
    return value


def _default_labels(num_sites: int) -> tuple:
    return tuple(2 if j % 2 == 0 else 1 for j in range(num_sites))


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a table")
    unknown = set(data) - {"chain", "ansatz", "optimizer", "run"}
    if unknown:
        raise ConfigError(f"unknown top-level tables: {sorted(unknown)}")
    if "chain" not in data:
        raise ConfigError("missing required [chain] table")

    chain_tbl = data["chain"]
    p = _require(chain_tbl, "p", int, "chain")
    boundary = _require(chain_tbl, "boundary", str, "chain")
    num_sites = _optional(chain_tbl, "num_sites", int, None, "chain")
    qubits = _optional(chain_tbl, "qubits", int, None, "chain")
    variant = _optional(chain_tbl, "encoding", str, "generic", "chain")
    if variant not in ENCODING_VARIANTS:
        raise ConfigError(
            f"[chain] encoding must be one of {ENCODING_VARIANTS}, got {variant!r}"
        )
    if variant == "tci-appendix" and p != 4:
        raise ConfigError("the tci-appendix encoding is defined only for p = 4")

    try:
        encoding = build_encoding(p)
    except AlgebraError as exc:
        raise ConfigError(str(exc)) from None
    n_p = encoding.qubits_per_site if variant == "generic" else 1

    if num_sites is None:
        if qubits is None:
            raise ConfigError("[chain] needs num_sites (or qubits)")
        if qubits % n_p != 0:
            raise ConfigError(
                f"{qubits} qubits do not split into {n_p}-qubit sites"
            )
        num_sites = qubits // n_p
    elif qubits is not None and qubits != n_p * num_sites:
        raise ConfigError(
            f"[chain] qubits = {qubits} contradicts num_sites = {num_sites} "
            f"({n_p} qubits per site)"
        )

    try:
        chain = build_chain(p, num_sites, boundary)
    except AlgebraError as exc:
        raise ConfigError(str(exc)) from None

    raw_labels = _optional(chain_tbl, "initial_state", list, None, "chain")
    if raw_labels is None:
        labels = _default_labels(num_sites)
    else:
        if len(raw_labels) != num_sites or not all(
            isinstance(a, int) and 1 <= a <= p for a in raw_labels
        ):
            raise ConfigError(
                f"[chain] initial_state must list {num_sites} labels in 1..{p}"
            )
        labels = tuple(raw_labels)
    if variant == "tci-appendix":
        for j, a in enumerate(labels):
            allowed = {tci_label(j, 0), tci_label(j, 1)}
            if a not in allowed:
                raise ConfigError(
                    f"[chain] initial_state label {a} at site {j} is not on "
                    f"that sublattice (allowed: {sorted(allowed)})"
                )

    raw_bounds = _optional(chain_tbl, "boundary_values", list, None, "chain")
    bounds = None
    if raw_bounds is not None:
        if boundary != "open":
            raise ConfigError("[chain] boundary_values applies to open chains only")
        if len(raw_bounds) != 2 or not all(
            isinstance(a, int) and 1 <= a <= p for a in raw_bounds
        ):
            raise ConfigError(f"[chain] boundary_values must be two labels in 1..{p}")
        bounds = tuple(raw_bounds)
        if variant == "tci-appendix":
            for site, a in zip((0, num_sites - 1), bounds):
                allowed = {tci_label(site, 0), tci_label(site, 1)}
                if a not in allowed:
                    raise ConfigError(
                        f"[chain] boundary_values label {a} at site {site} is "
                        f"not on that sublattice (allowed: {sorted(allowed)})"
                    )

    extra = set(chain_tbl) - {
        "p", "num_sites", "qubits", "boundary", "encoding",
        "boundary_values", "initial_state",
    }
    if extra:
        raise ConfigError(f"unknown [chain] keys: {sorted(extra)}")

    ansatz_tbl = data.get("ansatz", {})
    opt_tbl = data.get("optimizer", {})
    run_tbl = data.get("run", {})
    extra = set(ansatz_tbl) - {"layers_start", "layers_max", "theta0"}
    if extra:
        raise ConfigError(f"unknown [ansatz] keys: {sorted(extra)}")
    extra = set(opt_tbl) - {
        "learning_rate", "beta1", "beta2", "epsilon", "max_iterations",
        "plateau_window", "plateau_tol", "target_rel_error",
    }
    if extra:
        raise ConfigError(f"unknown [optimizer] keys: {sorted(extra)}")
    extra = set(run_tbl) - {"seed", "output_dir"}
    if extra:
        raise ConfigError(f"unknown [run] keys: {sorted(extra)}")

    seed = _optional(run_tbl, "seed", int, 0, "run")
    output_dir = _optional(run_tbl, "output_dir", str, None, "run")

    try:
        optimizer = OptimizerConfig(
            theta0=float(_optional(ansatz_tbl, "theta0", (int, float), 1.0, "ansatz")),
            layers_start=_optional(ansatz_tbl, "layers_start", int, None, "ansatz"),
            layers_max=_optional(ansatz_tbl, "layers_max", int, None, "ansatz"),
            learning_rate=float(
                _optional(opt_tbl, "learning_rate", (int, float), 0.01, "optimizer")
            ),
            beta1=float(_optional(opt_tbl, "beta1", (int, float), 0.9, "optimizer")),
            beta2=float(_optional(opt_tbl, "beta2", (int, float), 0.999, "optimizer")),
            epsilon=float(
                _optional(opt_tbl, "epsilon", (int, float), 1e-8, "optimizer")
            ),
            max_iterations=_optional(opt_tbl, "max_iterations", int, 2000, "optimizer"),
            plateau_window=_optional(opt_tbl, "plateau_window", int, 50, "optimizer"),
            plateau_tol=float(
                _optional(opt_tbl, "plateau_tol", (int, float), 1e-9, "optimizer")
            ),
            target_rel_error=float(
                _optional(opt_tbl, "target_rel_error", (int, float), 5e-3, "optimizer")
            ),
            seed=seed,
        )
    except OptimizerError as exc:
        raise ConfigError(str(exc)) from None

    resolved = {
        "chain": {
            "p": p,
            "num_sites": num_sites,
            "boundary": boundary,
            "encoding": variant,
            "initial_state": list(labels),
            "boundary_values": list(bounds) if bounds else None,
        },
        "ansatz": {
            "layers_start": optimizer.layers_start,
            "layers_max": optimizer.layers_max,
            "theta0": optimizer.theta0,
        },
        "optimizer": {
            "learning_rate": optimizer.learning_rate,
            "beta1": optimizer.beta1,
            "beta2": optimizer.beta2,
            "epsilon": optimizer.epsilon,
            "max_iterations": optimizer.max_iterations,
            "plateau_window": optimizer.plateau_window,
            "plateau_tol": optimizer.plateau_tol,
            "target_rel_error": optimizer.target_rel_error,
        },
        "run": {"seed": seed},
    }
    return ExperimentConfig(
        chain=chain,
        encoding_variant=variant,
        initial_labels=labels,
        boundary_values=bounds,
        optimizer=optimizer,
        seed=seed,
        output_dir=output_dir,
        resolved=resolved,
    )


def load_config(path: str, seed_override: int | None = None) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid TOML: {exc}") from None
    if seed_override is not None:
        data.setdefault("run", {})["seed"] = seed_override
    return parse_config(data)
