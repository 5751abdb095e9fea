import csv
import json

import numpy as np
import pytest

from sqdrift.cli import main
from sqdrift.driver import (
    ConfigError,
    RunConfig,
    RunResult,
    correlation_energy,
    emit_report,
    load_result,
    run_pipeline,
)
from sqdrift.errors import StageError
from sqdrift.hamiltonian import hf_energy
from sqdrift.subspace import fci_oracle


def _strip_timings(text):
    data = json.loads(text)
    data.pop("timings")
    return data


def _cfg(fcidump_path, tmp_path, name="h2", **kw):
    return RunConfig(input=str(fcidump_path(name)), output_dir=str(tmp_path / "out"), **kw)


def test_config_defaults_and_validation():
    cfg = RunConfig()
    assert cfg.shots == 10_000 and cfg.realizations == 8 and cfg.method == "sqdrift"
    for bad in ({"shots": -1}, {"dt": 0.0}, {"noise_probability": 0.6}, {"method": "vqe"}, {"subspace_cap": 0}):
        with pytest.raises(ConfigError):
            RunConfig(**bad)


def test_config_unknown_keys(tmp_path):
    with pytest.raises(ConfigError, match="shot_count"):
        RunConfig.from_dict({"shot_count": 5})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"active_spaces": [{"frozen": [0], "actve": [1]}]})
    p = tmp_path / "c.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        RunConfig.from_json(p)


def test_config_json_resolves_relative_input(tmp_path):
    p = tmp_path / "sub" / "c.json"
    p.parent.mkdir()
    p.write_text(json.dumps({"input": "mol.fcidump", "active_spaces": [{"frozen": [0]}]}))
    cfg = RunConfig.from_json(p)
    assert cfg.input == str((p.parent / "mol.fcidump").resolve())
    assert cfg.active_spaces[0].frozen == [0]
    assert RunConfig.from_dict(cfg.to_dict()) == cfg


def test_correlation_energy(h2, hf_det):
    assert correlation_energy(-1.0, -1.0) == 0
    assert correlation_energy(-1.1, -1.0) == pytest.approx(-0.1)
    e = correlation_energy(fci_oracle(h2).ground_energy, hf_energy(h2, hf_det(h2)))
    assert e < 0


def test_skqd_exact_h2_reaches_fci(fcidump_path, tmp_path, references):
    res = run_pipeline(_cfg(fcidump_path, tmp_path, method="skqd-exact", krylov_depth=2, shots=10_000))
    assert abs(res.final_energy - references["h2"]["e_fci"]) < 1e-6
    assert res.final_correlation_energy < 0


def test_zero_shots_gives_hf(fcidump_path, tmp_path, h4, hf_det):
    res = run_pipeline(_cfg(fcidump_path, tmp_path, "h4", shots=0), write=False)
    assert res.spaces[0].dimension == 1
    assert res.final_energy == pytest.approx(hf_energy(h4, hf_det(h4)), abs=1e-12)
    assert res.final_correlation_energy == pytest.approx(0.0, abs=1e-12)


def test_runs_are_bit_identical(fcidump_path, tmp_path):
    kw = dict(shots=500, realizations=3, krylov_depth=2, qdrift_samples=50, seed=7)
    a = run_pipeline(_cfg(fcidump_path, tmp_path / "a", "h4", **kw))
    b = run_pipeline(_cfg(fcidump_path, tmp_path / "a", "h4", **kw))
    out = tmp_path / "a" / "out" / "result.json"
    assert _strip_timings(a.to_json()) == _strip_timings(b.to_json()) == _strip_timings(out.read_text())
    c = run_pipeline(_cfg(fcidump_path, tmp_path / "c", "h4", **{**kw, "seed": 8}), write=False)
    assert c.spaces[0].samples != a.spaces[0].samples


def test_metadata_recorded(fcidump_path, tmp_path, h2_pauli):
    res = run_pipeline(_cfg(fcidump_path, tmp_path, shots=100, realizations=1, krylov_depth=1), write=False)
    meta = res.spaces[0].metadata
    assert meta["ordering"] == "blocked" and meta["n_terms"] == len(h2_pauli)
    assert meta["times"][1] == pytest.approx(1.0 / meta["lambda"])
    assert meta["total_shots"] == 200


def test_extsqdrift_mode_runs(fcidump_path, tmp_path, references):
    res = run_pipeline(_cfg(fcidump_path, tmp_path, "h4", method="extsqdrift", shots=200, realizations=2,
                            krylov_depth=1, qdrift_samples=30), write=False)
    assert res.final_energy >= references["h4"]["e_fci"] - 1e-10
    assert res.final_energy < references["h4"]["e_scf"]


def test_active_space_sweep_rows(fcidump_path, tmp_path):
    cfg = _cfg(fcidump_path, tmp_path, "h2o", method="skqd-exact", shots=500, krylov_depth=1,
               active_spaces=[{"frozen": [0, 1], "active": [2, 3, 4, 5]}, {"frozen": [0], "active": [1, 2, 3, 4, 5]}])
    run_pipeline(cfg)
    rows = list(csv.DictReader(open(tmp_path / "out" / "plotdata.csv")))
    assert [r["n_active_orbitals"] for r in rows] == ["4", "5"]
    assert [r["label"] for r in rows] == ["4o6e", "5o8e"]


def test_emit_report_empty(tmp_path):
    paths = emit_report(RunResult(config={}), tmp_path)
    data = json.loads(paths["result"].read_text())
    assert data["iterations"] == []
    assert paths["convergence"].read_text().splitlines() == ["space,iteration,energy,correlation_energy,dimension"]


def test_emit_report_one_iteration_and_roundtrip(fcidump_path, tmp_path):
    res = run_pipeline(_cfg(fcidump_path, tmp_path, method="skqd-exact", shots=100, krylov_depth=1,
                            recovery_iterations=1))
    lines = (tmp_path / "out" / "convergence.csv").read_text().splitlines()
    assert len(lines) == 2 and len(res.iterations) == 1
    assert float(lines[1].split(",")[2]) == res.iterations[0].energy
    assert load_result(tmp_path / "out" / "result.json") == res


def test_emit_report_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        emit_report(RunResult(config={}), blocker / "sub")


def test_partial_result_written_on_failure(fcidump_path, tmp_path):
    cfg = _cfg(fcidump_path, tmp_path, "h2o", shots=10, active_spaces=[{"frozen": [0, 1], "active": [2, 3, 4, 5]},
                                                                         {"frozen": [0], "active": [0, 1]}])
    with pytest.raises(StageError) as info:
        run_pipeline(cfg)
    assert info.value.stage == "active_space"
    saved = json.loads((tmp_path / "out" / "result.json").read_text())
    assert len(saved["spaces"]) == 1 and "active_space" in saved["error"]


# command line

def test_cli_fci(fcidump_path, capsys, references):
    assert main(["fci", str(fcidump_path("h2"))]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["fci_energy"] == pytest.approx(references["h2"]["e_fci"], abs=1e-10)


def test_cli_map(fcidump_path, tmp_path, capsys, h2_pauli):
    assert main(["map", str(fcidump_path("h2"))]) == 0
    text = capsys.readouterr().out
    assert len(text.splitlines()) == len(h2_pauli) + 1
    assert main(["map", str(fcidump_path("h2")), "-o", str(tmp_path / "t.txt")]) == 0
    assert (tmp_path / "t.txt").read_text() == text


def test_cli_run_with_overrides(fcidump_path, tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"input": str(fcidump_path("h2")), "method": "skqd-exact", "shots": 200,
                               "krylov_depth": 1}))
    assert main(["run", str(cfg), "--seed", "3", "--out-dir", str(tmp_path / "o")]) == 0
    assert "2o2e" in capsys.readouterr().out
    assert json.loads((tmp_path / "o" / "result.json").read_text())["config"]["seed"] == 3


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.fcidump"
    bad.write_text("&FCI NORB=2,NELEC=2 &END\n 1.0 1 1 x 0\n")
    assert main(["fci", str(bad)]) == 2
    big = tmp_path / "big.fcidump"
    big.write_text("&FCI NORB=15,NELEC=14,MS2=0 &END\n" + "".join(f" -1.0 {i} {i} 0 0\n" for i in range(1, 16)) + " 0.0 0 0 0 0\n")
    assert main(["fci", str(big)]) == 3
    assert main(["fci", str(tmp_path / "missing")]) == 5
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"input": str(tmp_path / "missing")}))
    assert main(["run", str(cfg), "--out-dir", str(tmp_path / "o")]) == 5
    cfg.write_text(json.dumps({"shots": -3}))
    assert main(["run", str(cfg)]) == 2
    assert "error" in capsys.readouterr().err


def test_module_entry_point(fcidump_path):
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "sqdrift", "fci", str(fcidump_path("h2"))],
                         capture_output=True, text=True, check=True)
    assert np.isclose(json.loads(out.stdout)["dimension"], 4)
