import json
import math
import os
import pathlib

import numpy as np
import pytest

import qrobust

CORPUS = pathlib.Path(os.environ.get("QROBUST_CORPUS_DIR", pathlib.Path(__file__).parents[2] / "corpus"))


def test_qbf_derivation():
    r = qrobust.analyze(CORPUS / "qbf.qw")
    assert r["schema_version"] == qrobust.REPORT_SCHEMA_VERSION
    assert r["exit_code"] == 0
    assert qrobust.result(r, "derived_epsilon") == pytest.approx(1.875e-5, rel=1e-9)
    assert r["loops"][0]["a"] == 0.5 and r["loops"][0]["n"] == 1
    assert r["derivation"]["verified"]


def test_semantic_robustness_of_p2():
    r = qrobust.analyze(CORPUS / "p2.qw", params={"p": 0.1}, semantic=True)
    assert qrobust.result(r, "semantic_epsilon") == pytest.approx(0.028, abs=1e-6)


def test_validation_failure_is_reported():
    r = qrobust.analyze(CORPUS / "bad.qw")
    assert r["exit_code"] == 2
    assert any("not complete" in d for d in r["diagnostics"])


def test_diamond_specs():
    r = qrobust.diamond("H", "H;Z", q="proj0", lam=0.75)
    assert qrobust.result(r, "diamond_norm") == pytest.approx(math.sqrt(3) / 2, abs=1e-5)
    assert qrobust.result(r, "sampled_lower_bound") <= qrobust.result(r, "diamond_norm") + 1e-9


def test_diamond_from_kraus_lists():
    h = qrobust.matrix("H")
    z = qrobust.matrix("Z")
    assert qrobust.q_lambda_diamond_norm([h], [h @ z]) == pytest.approx(1.0, abs=1e-5)
    paulis = [qrobust.matrix(n) / 2 for n in ("I", "X", "Y", "Z")]
    assert qrobust.q_lambda_diamond_norm(paulis, [np.eye(2)]) == pytest.approx(0.75, abs=1e-5)
    proj0 = np.diag([1.0, 0.0])
    assert qrobust.q_lambda_diamond_norm([h], [h @ z], q=proj0, lam=0.75) == pytest.approx(math.sqrt(3) / 2, abs=1e-5)


def test_choi_of_identity():
    j = qrobust.choi([np.eye(2)])
    v = np.array([1, 0, 0, 1], dtype=complex)
    assert np.allclose(j, np.outer(v, v))


def test_bounded_and_simulate():
    b = qrobust.bounded(CORPUS / "qw6.qw", n_max=10)
    assert b["loops"][0]["bounded"] and b["loops"][0]["n"] <= 5 and b["loops"][0]["a"] <= 5 / 6 + 1e-12
    s = qrobust.simulate(CORPUS / "noisy-bse.qw", "|1>")
    out = next(m["value"] for m in s["matrices"] if m["name"] == "output")
    assert out[0][0][0] == pytest.approx(0.91, abs=1e-12)
    assert out[1][1][0] == pytest.approx(0.09, abs=1e-12)
    assert len(s["trace"]) == 4


def test_reports_are_plain_json():
    r = qrobust.simulate(CORPUS / "bse.qw", "|1>")
    assert json.loads(json.dumps(r)) == r


def test_bad_matrix_expression_raises():
    with pytest.raises(qrobust.Error):
        qrobust.matrix("NOT_A_GATE")
