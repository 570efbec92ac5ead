"""Command-line runs end to end: artifacts, exit codes, reproducibility.

Everything calls main() in process; nothing shells out.  The variational run
is shared by the measure and export tests through a module-scoped fixture.
"""

import json

import numpy as np
import pytest

from rsosvqe.ansatz import build_layout
from rsosvqe.cli import main
from rsosvqe.config import load_config
from rsosvqe.oracle import ground_state
from rsosvqe.qasm import parse_qasm

SMALL_RUN = """\
[chain]
p = 4
num_sites = 3
boundary = "open"

[ansatz]
layers_start = 1
layers_max = 3

[optimizer]
max_iterations = 400

[run]
seed = 5
"""

PERIODIC_RUN = """\
[chain]
p = 4
num_sites = 4
boundary = "periodic"
"""


@pytest.fixture(scope="module")
def vqe_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("vqe")
    config = root / "run.toml"
    config.write_text(SMALL_RUN)
    out = root / "out"
    code = main(["optimize", "--config", str(config), "--output-dir", str(out)])
    return config, out, code


def test_optimize_artifacts(vqe_run):
    config, out, code = vqe_run
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["converged"] is True
    assert summary["rel_error"] <= 5e-3
    assert summary["stages"]
    assert {"stage", "num_layers", "stop_reason", "accepted"} <= set(
        summary["stages"][0]
    )
    assert len(summary["timings"]["stage_seconds"]) == len(summary["stages"])

    params = json.loads((out / "params.json").read_text())
    assert params["num_qubits"] == 6
    layout = build_layout(6, params["num_layers"])
    assert len(params["angles"]) == layout.parameter_count

    history = (out / "history.csv").read_text().splitlines()
    assert history[0] == "stage,iteration,energy,rel_error,grad_norm"
    assert len(history) > 1

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["subcommand"] == "optimize"
    assert manifest["config_digest"] == load_config(str(config)).digest
    assert set(manifest["versions"]) == {"rsosvqe", "numpy", "scipy", "python"}
    assert "timestamp" not in manifest


def test_measure_roundtrip(vqe_run, tmp_path):
    config, out, _ = vqe_run
    code = main([
        "measure", "--config", str(config),
        "--params", str(out / "params.json"),
        "--output-dir", str(tmp_path),
    ])
    assert code == 0
    obs = json.loads((tmp_path / "observables.json").read_text())
    summary = json.loads((out / "summary.json").read_text())
    assert obs["energy"] == pytest.approx(summary["energy"], abs=1e-12)
    # open chain: no topological symmetry entries
    assert obs["yu"] is None and obs["yu_lattice_value"] is None
    assert obs["sector_overlap"] >= 0.9
    assert len(obs["parity_profile"]) == 3
    assert max(obs["disallowed_site_mass"]) <= 0.1
    parity = (tmp_path / "parity_profile.csv").read_text().splitlines()
    assert parity[0] == "site,value"
    assert len(parity) == 1 + 3
    probs = (tmp_path / "site_probs.csv").read_text().splitlines()
    assert probs[0] == "site,a,prob"
    assert len(probs) == 1 + 3 * 4


def test_export_circuit(vqe_run, tmp_path):
    config, out, _ = vqe_run
    code = main([
        "export-circuit", "--config", str(config),
        "--params", str(out / "params.json"),
        "--output-dir", str(tmp_path),
    ])
    assert code == 0
    text = (tmp_path / "circuit.qasm").read_text()
    assert text.startswith("OPENQASM 2.0;")
    assert "qreg q[6];" in text
    assert "// layer 1" in text
    num_layers = json.loads((out / "params.json").read_text())["num_layers"]
    num_qubits, gates = parse_qasm(text)
    assert num_qubits == 6
    # 6 qubits: 12 single-qubit frames plus 5 two-qubit blocks of 10 per layer
    assert len(gates) == 62 * num_layers
    assert sum(g.kind == "cx" for g in gates) == 15 * num_layers


def test_exact_artifacts_are_reproducible(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text(PERIODIC_RUN)
    outs = (tmp_path / "a", tmp_path / "b")
    for out in outs:
        assert main(["exact", "--config", str(config),
                     "--output-dir", str(out)]) == 0
    payload = json.loads((outs[0] / "exact.json").read_text())
    assert payload["energy"] == pytest.approx(-1.7816261830585716, abs=1e-12)
    # one of the two isospectral alternation sectors, 7 of 14 configurations
    assert payload["basis_size"] == 7
    assert payload["multiplicity"] == 2
    spectrum = (outs[0] / "spectrum.csv").read_text().splitlines()
    assert spectrum[0] == "index,energy"
    for name in ("exact.json", "spectrum.csv", "manifest.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_seed_override_changes_digest(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text(PERIODIC_RUN)
    manifests = []
    for seed in (1, 2):
        out = tmp_path / f"s{seed}"
        assert main(["exact", "--config", str(config), "--seed", str(seed),
                     "--output-dir", str(out)]) == 0
        manifests.append(json.loads((out / "manifest.json").read_text()))
    assert manifests[0]["seed"] == 1 and manifests[1]["seed"] == 2
    assert manifests[0]["config_digest"] != manifests[1]["config_digest"]


def test_verify_algebra_cli(tmp_path, capsys):
    config = tmp_path / "run.toml"
    config.write_text('[chain]\np = 3\nnum_sites = 3\nboundary = "open"\n')
    code = main(["verify-algebra", "--config", str(config),
                 "--output-dir", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "algebra_report.json").read_text())
    assert report["passed"] is True
    assert report["max_deviation"] <= 1e-12
    assert report["relations"]
    assert "max deviation" in capsys.readouterr().out


def test_tci_exact_matches_generic_sector(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text(
        "[chain]\np = 4\nnum_sites = 4\nboundary = \"open\"\n"
        "encoding = \"tci-appendix\"\nboundary_values = [2, 3]\n"
    )
    assert main(["exact", "--config", str(config),
                 "--output-dir", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "exact.json").read_text())
    from rsosvqe.algebra import build_chain

    reference = ground_state(build_chain(4, 4, "open"), (2, 3)).energy
    assert payload["energy"] == pytest.approx(reference, abs=1e-9)
    assert payload["encoding"] == "tci-appendix"


def test_exit_one_usage_and_config_errors(tmp_path):
    assert main(["exact", "--config", str(tmp_path / "nope.toml")]) == 1
    bad = tmp_path / "bad.toml"
    bad.write_text("[chain\n")
    assert main(["exact", "--config", str(bad)]) == 1
    assert main(["no-such-subcommand"]) == 1
    assert main(["reproduce", "fig9"]) == 1

    config = tmp_path / "run.toml"
    config.write_text(SMALL_RUN)
    # valid config, missing parameter file
    assert main(["measure", "--config", str(config),
                 "--params", str(tmp_path / "missing.json"),
                 "--output-dir", str(tmp_path)]) == 1

    tci = tmp_path / "tci.toml"
    tci.write_text(
        '[chain]\np = 4\nnum_sites = 4\nboundary = "open"\n'
        'encoding = "tci-appendix"\n'
    )
    assert main(["measure", "--config", str(tci),
                 "--output-dir", str(tmp_path)]) == 1


def test_exit_two_when_state_is_unphysical(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text(PERIODIC_RUN)
    layout = build_layout(8, 1)
    params = tmp_path / "params.json"
    # fixed garbage angles: far from any eigenstate, so the <Yu> imaginary
    # residue blows through the measurement ceiling
    params.write_text(json.dumps({
        "num_qubits": 8,
        "num_layers": 1,
        "angles": [0.3] * layout.parameter_count,
    }))
    code = main(["measure", "--config", str(config),
                 "--params", str(params), "--output-dir", str(tmp_path)])
    assert code == 2


def test_exit_three_when_target_unreached(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text(
        '[chain]\np = 4\nnum_sites = 3\nboundary = "open"\n\n'
        "[ansatz]\nlayers_start = 1\nlayers_max = 1\n\n"
        "[optimizer]\nmax_iterations = 5\ntarget_rel_error = 1e-12\n"
    )
    out = tmp_path / "out"
    code = main(["optimize", "--config", str(config), "--output-dir", str(out)])
    assert code == 3
    summary = json.loads((out / "summary.json").read_text())
    assert summary["converged"] is False


def test_reproduce_fig2_profiles(tmp_path):
    out = tmp_path / "fig2"
    assert main(["reproduce", "fig2", "--output-dir", str(out)]) == 0
    for p in (4, 5, 6, 7, 8):
        unit = out / f"p{p}"
        obs = json.loads((unit / "observables.json").read_text())
        assert obs["sector_overlap"] == pytest.approx(1.0, abs=1e-10)
        assert obs["energy"] == pytest.approx(obs["exact_energy"], abs=1e-9)
        assert (unit / "parity_profile.csv").exists()
        assert (unit / "site_probs.csv").exists()
    assert json.loads((out / "manifest.json").read_text())["seed"] == 7
