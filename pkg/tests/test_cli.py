"""End-to-end command-line checks: schemas, gates, determinism, errors."""

import json
import math

import numpy as np
import pytest

import triquart as tq
from triquart import cli

PAYLOAD_KEYS = {"schema", "tool", "version", "command", "config", "seed", "runtime_seconds", "results"}


def run(capsys, *args):
    code = cli.main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *args):
    code, out, err = run(capsys, *args)
    assert err == ""
    return code, json.loads(out)


def column(tbl, name):
    return [row[tbl["columns"].index(name)] for row in tbl["rows"]]


# ------------------------------------------------------------- devices-check


def test_devices_check_schema_and_gate(capsys):
    code, payload = run_json(capsys, "devices-check")
    assert code == 0
    assert set(payload) == PAYLOAD_KEYS
    assert payload["schema"] == 1
    assert payload["tool"] == "triquart"
    assert payload["version"] == tq.__version__
    assert payload["command"] == "devices-check"
    assert payload["seed"] is None
    assert payload["results"]["passed"] is True
    assert payload["results"]["max_residual"] < 1e-10
    devices = payload["results"]["devices"]
    assert devices["tritter"]["entries"]["columns"] == ["row", "col", "real", "imag"]
    assert "involution_residual" in devices["quarter"]


def test_devices_check_fault_injection(capsys):
    code, payload = run_json(capsys, "devices-check", "--inject-fault")
    assert code == 1
    assert payload["results"]["passed"] is False
    assert payload["results"]["max_residual"] > 1e-7


def test_devices_check_byte_identical_reruns(capsys, tmp_path, monkeypatch):
    # the config echo embeds --out, so rerun with the same relative path
    # from two different working directories
    d1, d2 = tmp_path / "d1", tmp_path / "d2"
    d1.mkdir()
    d2.mkdir()
    monkeypatch.chdir(d1)
    assert cli.main(["devices-check", "--out", "run.json"]) == 0
    monkeypatch.chdir(d2)
    assert cli.main(["devices-check", "--out", "run.json"]) == 0
    capsys.readouterr()
    assert (d1 / "run.json").read_bytes() == (d2 / "run.json").read_bytes()


# ------------------------------------------------------------------- fringes


def test_fringes_default_table(capsys):
    code, payload = run_json(capsys, "fringes")
    assert code == 0
    tbl = payload["results"]["fringes"]
    assert len(tbl["rows"]) == 720
    assert len(tbl["columns"]) == 11  # phi plus the ten three-photon outcomes
    # probabilities over the full basis sum to one at every grid point
    sums = np.array([sum(r[1:]) for r in tbl["rows"]])
    assert np.allclose(sums, 1.0, atol=1e-10)
    # the default 720-point grid hits pi/3 exactly at index 120
    p210 = column(tbl, "p_2,1,0")
    assert tbl["rows"][120][0] == pytest.approx(math.pi / 3, abs=1e-15)
    assert p210[120] == pytest.approx(8 / 81, abs=1e-12)


def test_fringes_closed_form_gate(capsys):
    code, payload = run_json(capsys, "fringes", "--check-closed-form")
    assert code == 0
    checks = payload["results"]["closed_form_max_deviation"]
    assert set(checks) == {"3,0,0", "2,1,0", "1,1,1"}
    assert all(v < 1e-9 for v in checks.values())


def test_fringes_single_outcome_quarter(capsys):
    code, payload = run_json(
        capsys, "fringes", "--device", "quarter", "--input", "1,1,1,1",
        "--outcome", "3,1,0,0", "--grid", f"0:{2 * math.pi}:8",
    )
    assert code == 0
    tbl = payload["results"]["fringes"]
    assert tbl["columns"] == ["phi", "p_3,1,0,0"]
    phis = np.array(column(tbl, "phi"))
    assert np.allclose(column(tbl, "p_3,1,0,0"), 3 * np.sin(phis) ** 4 / 128, atol=1e-12)


def test_fringes_csv_format(capsys):
    code, out, err = run(capsys, "fringes", "--format", "csv", "--grid", "0:1:4")
    assert code == 0 and err == ""
    lines = out.splitlines()
    assert lines[0] == "# schema: 1"
    assert "\r" not in out
    assert "# table: results.fringes" in lines
    header = lines[lines.index("# table: results.fringes") + 1]
    assert '"p_3,0,0"' in header  # signature cells carry commas, so they are quoted


def test_fringes_rejects_bad_arguments(capsys):
    for args in (
        ("fringes", "--grid", "1:2"),
        ("fringes", "--input", "1,x,0"),
        ("fringes", "--outcome", "9,9,9"),
        ("fringes", "--input", "2,1,0", "--check-closed-form"),
        ("fringes", "--grid", "0:1:0"),
    ):
        code, out, err = run(capsys, *args)
        assert code == 2
        assert err.startswith("error:")
        assert out == ""


# ---------------------------------------------------------------- visibility


def test_visibility_stored_bounds(capsys):
    code, payload = run_json(capsys, "visibility")
    assert code == 0
    assert payload["results"]["bounds_source"] == "stored"
    tbl = payload["results"]["visibility"]
    assert column(tbl, "outcome") == ["3,0,0", "2,1,0", "1,1,1"]
    assert column(tbl, "multiplicity") == [3, 6, 1]
    vis = column(tbl, "visibility")
    assert vis[0] == pytest.approx(2 / 7, abs=1e-9)
    assert vis[1] == pytest.approx(1.0, abs=1e-9)
    assert vis[2] == pytest.approx(16 / 29, abs=1e-9)
    assert column(tbl, "nonclassical") == [True, True, False]


def test_visibility_recomputed_agrees_with_stored(capsys):
    code_s, stored = run_json(capsys, "visibility")
    code_r, recomputed = run_json(capsys, "visibility", "--recompute-bounds")
    assert code_s == code_r == 0
    assert recomputed["results"]["bounds_source"] == "recomputed"
    ts, tr = stored["results"]["visibility"], recomputed["results"]["visibility"]
    assert column(ts, "visibility") == column(tr, "visibility")
    assert column(ts, "nonclassical") == column(tr, "nonclassical")
    for b_s, b_r in zip(column(ts, "classical_bound"), column(tr, "classical_bound")):
        assert b_r == pytest.approx(b_s, abs=1e-7)


def test_visibility_respects_golden_dir_override(capsys, tmp_path, monkeypatch):
    fake = {"bounds": {"tritter": {"3,0,0": 0.99, "2,1,0": 0.99, "1,1,1": 0.99}}}
    (tmp_path / "classical_bounds.json").write_text(json.dumps(fake))
    monkeypatch.setenv("TRIQUART_GOLDEN_DIR", str(tmp_path))
    code, payload = run_json(capsys, "visibility")
    assert code == 0
    tbl = payload["results"]["visibility"]
    assert column(tbl, "classical_bound") == [0.99, 0.99, 0.99]
    assert column(tbl, "nonclassical") == [False, True, False]


# -------------------------------------------------------------------- fisher


def test_fisher_fock_default(capsys):
    code, payload = run_json(capsys, "fisher")
    assert code == 0
    tbl = payload["results"]["fisher"]
    quantum = column(tbl, "quantum_information")
    assert np.allclose(quantum, 16 / 3, atol=1e-12)
    classical = column(tbl, "classical_information")
    assert classical[0] == pytest.approx(16 / 3, abs=1e-8)
    assert np.all(np.array(classical) <= 16 / 3 + 1e-8)
    norm = payload["results"]["normalization"]
    assert norm["total_photons"] == pytest.approx(3.0)
    assert norm["mean_photons_on_phase_mode"] == pytest.approx(1.0)


def test_fisher_fock_quarter(capsys):
    code, payload = run_json(capsys, "fisher", "--device", "quarter", "--grid", "0:1:5")
    assert code == 0
    tbl = payload["results"]["fisher"]
    assert np.allclose(column(tbl, "quantum_information"), 6.0, atol=1e-12)
    assert column(tbl, "classical_information")[0] == pytest.approx(6.0, abs=1e-8)


def test_fisher_coherent(capsys):
    code, payload = run_json(capsys, "fisher", "--probe", "coherent", "--grid", "0:1:3")
    assert code == 0
    tbl = payload["results"]["fisher"]
    assert np.allclose(column(tbl, "quantum_information_with_reference"), 4.0, atol=1e-9)
    assert np.allclose(column(tbl, "quantum_information_phase_averaged"), 8 / 3, atol=1e-6)


# ------------------------------------------------------------------ protocol


def test_protocol_nonadaptive_schema_and_determinism(capsys, tmp_path, monkeypatch):
    args = ["protocol", "--mode", "nonadaptive", "--trials", "60", "--M", "1000",
            "--phis", "1.0:2.0:1", "--out", "run.json"]
    d1, d2 = tmp_path / "d1", tmp_path / "d2"
    d1.mkdir()
    d2.mkdir()
    monkeypatch.chdir(d1)
    assert cli.main(args) == 0
    monkeypatch.chdir(d2)
    assert cli.main(args) == 0
    capsys.readouterr()
    assert (d1 / "run.json").read_bytes() == (d2 / "run.json").read_bytes()
    payload = json.loads((d1 / "run.json").read_text())
    assert payload["seed"] == 5
    assert payload["config"]["mode"] == "nonadaptive"
    results = payload["results"]
    assert set(results) == {"protocol", "sql", "qcr_bound", "trials", "M"}
    tbl = results["protocol"]
    assert tbl["columns"] == ["phi", "rms_nonadaptive", "bias", "bias_se", "cr_bound"]
    assert len(tbl["rows"]) == 1
    assert results["sql"] == pytest.approx(1 / math.sqrt(3 * 1000))
    assert results["qcr_bound"] == pytest.approx(1 / math.sqrt(1000 * 16 / 3))


def test_protocol_adaptive_run(capsys):
    code, payload = run_json(
        capsys, "protocol", "--mode", "adaptive", "--trials", "100", "--M", "1000",
        "--phis", "0.9:1.1:1",
    )
    assert code == 0
    results = payload["results"]
    tbl = results["protocol"]
    assert tbl["columns"] == ["phi", "rms_adaptive", "bias", "bias_se", "cr_bound"]
    assert "pooled_bias" in results and "pooled_bias_se" in results
    rms = column(tbl, "rms_adaptive")[0]
    assert 0.0 < rms < results["sql"]


def test_protocol_rejects_small_budget(capsys):
    code, out, err = run(capsys, "protocol", "--M", "5")
    assert code == 2
    assert "need M >= 9" in err


# ---------------------------------------------------------------- multiparam


def test_multiparam_default(capsys):
    code, payload = run_json(capsys, "multiparam")
    assert code == 0
    results = payload["results"]
    assert results["weak_commutativity_residual"] < 1e-10
    assert results["sld_hermiticity_residual"] < 1e-12
    assert results["bounds_fock"]["effective_qfi"] == pytest.approx([4.0, 4.0], abs=1e-9)
    assert results["bounds_fock"]["per_parameter"] == pytest.approx([0.005, 0.005], abs=1e-12)
    assert results["bounds_coherent_phase_averaged"]["effective_qfi"] == pytest.approx(
        [2.0, 2.0], abs=1e-5
    )
    assert results["fock_vs_coherent"]["fock_advantage"] is True
    rows = {(r[0], r[1]): r[2] for r in results["qfim_fock"]["matrix"]["rows"]}
    assert rows[(1, 1)] == pytest.approx(16 / 3, abs=1e-10)
    assert rows[(1, 2)] == pytest.approx(-8 / 3, abs=1e-10)


def test_multiparam_quarter(capsys):
    code, payload = run_json(capsys, "multiparam", "--device", "quarter")
    assert code == 0
    results = payload["results"]
    assert results["bounds_fock"]["effective_qfi"] == pytest.approx([16 / 3, 16 / 3], abs=1e-9)
    assert results["bounds_coherent_phase_averaged"]["effective_qfi"] == pytest.approx(
        [8 / 3, 8 / 3], abs=1e-5
    )


def test_multiparam_rejects_duplicate_modes(capsys):
    code, out, err = run(capsys, "multiparam", "--modes", "3,3")
    assert code == 2
    assert "must be distinct" in err


# ------------------------------------------------------------------- general


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert tq.__version__ in capsys.readouterr().out


def test_bad_choices_exit_2(capsys):
    for args in (["fringes", "--device", "pentagon"], ["nonsense"], []):
        with pytest.raises(SystemExit) as exc:
            cli.main(args)
        assert exc.value.code == 2
        capsys.readouterr()
