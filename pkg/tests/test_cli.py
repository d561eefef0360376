import json
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from optel.cli import main, read_state, write_state
from optel.errors import InvalidStateError
from optel.fstar import family_state
from optel.qmat import I4, PSI_PLUS, projector, random_density


@pytest.fixture
def family_file(tmp_path):
    path = tmp_path / "rho.json"
    write_state(path, family_state(0.4))
    return path


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_state_roundtrip(tmp_path, rng):
    rho = random_density(rng)
    path = tmp_path / "s.json"
    write_state(path, rho)
    assert_allclose(read_state(path), rho, atol=0)


def test_read_state_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InvalidStateError, match="not valid JSON"):
        read_state(bad)
    bad.write_text(json.dumps({"re": np.eye(4).tolist(), "im": np.zeros((4, 4)).tolist()}))
    with pytest.raises(InvalidStateError, match="trace"):
        read_state(bad)
    bad.write_text(json.dumps({"re": (I4.real / 4).tolist(), "basis": "BA"}))
    with pytest.raises(InvalidStateError, match="basis"):
        read_state(bad)
    with pytest.raises(InvalidStateError, match="cannot read"):
        read_state(tmp_path / "missing.json")


def test_analyze(capsys, family_file):
    code, out, _ = _run(capsys, "analyze", family_file)
    assert code == 0
    rep = json.loads(out)
    assert rep["singlet_fraction"] == pytest.approx(0.4)
    assert rep["concurrence"] == pytest.approx(0.4)
    assert rep["entangled"] is True
    assert len(rep["psi_max"]["re"]) == 4


def test_fstar(capsys, family_file, tmp_path):
    out_path = tmp_path / "report.json"
    code, out, _ = _run(capsys, "fstar", family_file, "--out", out_path)
    assert code == 0 and out == ""
    rep = json.loads(out_path.read_text())
    assert rep["fstar"] == pytest.approx(8 / 15, abs=1e-8)
    assert rep["dual"]["g"] == pytest.approx(8 / 15, abs=1e-8)
    assert rep["primal_dual_mismatch"] < 1e-8
    a = np.array(rep["filter_A"]["re"]) + 1j * np.array(rep["filter_A"]["im"])
    assert_allclose(a, np.diag([1 / 3, 1]), atol=1e-5)
    assert rep["xpt_min_eigenvalue"] >= -0.5 - 1e-8


def test_normal_form(capsys, family_file, tmp_path):
    code, out, _ = _run(capsys, "normal-form", family_file)
    assert code == 0
    rep = json.loads(out)
    assert rep["fidelity_nf"] == pytest.approx(1, abs=1e-8)
    product = tmp_path / "product.json"
    write_state(product, np.diag([1.0, 0, 0, 0]))
    code, _, err = _run(capsys, "normal-form", product)
    assert code == 4
    assert "degenerate" in err


def test_invalid_input_exit_code(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"re": np.eye(4).tolist()}))
    for cmd in ("analyze", "fstar", "normal-form"):
        code, out, err = _run(capsys, cmd, path)
        assert code == 2
        assert out == ""
        assert "trace" in err


def test_bloch_image_is_deterministic(capsys, tmp_path):
    state = tmp_path / "bell.json"
    write_state(state, projector(PSI_PLUS))
    csv1, csv2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert _run(capsys, "bloch-image", state, "--n", 50, "--seed", 3, "--out", csv1)[0] == 0
    assert _run(capsys, "bloch-image", state, "--n", 50, "--seed", 3, "--out", csv2)[0] == 0
    assert csv1.read_bytes() == csv2.read_bytes()
    data = np.loadtxt(csv1, delimiter=",", skiprows=1)
    assert data.shape == (50, 6)
    assert_allclose(data[:, 3:], data[:, :3], atol=1e-12)
    summary = json.loads(csv1.with_suffix(".json").read_text())
    assert summary["avg_fidelity"] == pytest.approx(1)
    assert summary["mode"] == "LU"


def test_bloch_image_locc(capsys, family_file, tmp_path):
    out = tmp_path / "locc.csv"
    assert _run(capsys, "bloch-image", family_file, "--mode", "LOCC", "--out", out)[0] == 0
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["avg_fidelity"] == pytest.approx(31 / 45, abs=1e-6)


def test_random(capsys, tmp_path):
    out = tmp_path / "states"
    assert _run(capsys, "random", "--count", 3, "--rank", 2, "--seed", 5, "--out", out)[0] == 0
    files = sorted(out.glob("state_*.json"))
    assert len(files) == 3
    for f in files:
        rho = read_state(f)
        assert np.linalg.matrix_rank(rho, tol=1e-10) == 2
    assert _run(capsys, "random", "--rank", 7, "--out", out)[0] == 2


def test_verify_small(capsys):
    code, out, _ = _run(capsys, "verify", "--n", 3, "--seed", 1)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)


def test_module_entry_point(family_file):
    proc = subprocess.run(
        [sys.executable, "-m", "optel", "analyze", str(family_file)],
        capture_output=True,
        text=True,
        check=True,
    )
    assert json.loads(proc.stdout)["negativity"] == pytest.approx(np.sqrt(0.52) - 0.6)
