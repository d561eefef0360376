import json

import numpy as np
import pytest

import optel.teleport as tp
from optel import verify
from optel.cli import main
from optel.fstar import family_state, solve_primal
from optel.qmat import partial_transpose_A, projector, PSI_PLUS


def test_run_all_small():
    results = verify.run_all(n=5, seed=2)
    assert len(results) == len(verify.SUITES)
    for r in results:
        assert r.passed, (r.name, r.detail)
        assert r.checked > 0


def test_k_cost_suite_catches_wrong_partial_transpose(monkeypatch):
    monkeypatch.setattr(tp, "partial_transpose_B", partial_transpose_A)
    res = verify.suite_k_cost(20, np.random.default_rng(0))
    assert not res.passed
    assert "disagree" in res.detail
    assert set(res.case) == {"rho", "a", "b"}
    assert len(res.case["rho"]["re"]) == 4


def test_cli_verify_reports_failure(monkeypatch, capsys):
    monkeypatch.setattr(tp, "partial_transpose_B", partial_transpose_A)
    monkeypatch.setattr(verify, "SUITES", (verify.suite_k_cost,))
    monkeypatch.setattr(
        verify, "run_all", lambda n, seed: [verify.suite_k_cost(n, np.random.default_rng(seed))]
    )
    assert main(["verify", "--n", "10"]) == 1
    out = capsys.readouterr().out
    assert out.startswith("FAIL")
    dumped = json.loads(out[out.index("{"):])
    assert dumped["case"]["rho"]["re"]


def test_brute_force_oracle_family():
    rng = np.random.default_rng(11)
    best, a = verify.brute_force_fstar(family_state(0.4), rng, n_samples=20_000)
    assert best == pytest.approx(8 / 15, abs=1e-6)
    assert best <= 8 / 15 + 1e-10
    a = a / a[np.unravel_index(np.argmax(np.abs(a)), a.shape)]
    assert np.allclose(np.abs(a), np.diag([1 / 3, 1]), atol=1e-2)


def test_brute_force_oracle_bell():
    best, _ = verify.brute_force_fstar(projector(PSI_PLUS), np.random.default_rng(0), n_samples=5000)
    assert best == pytest.approx(solve_primal(projector(PSI_PLUS)).fstar, abs=1e-8)
