import json
from pathlib import Path

import numpy as np
import pytest

from qcpm.cli import EXIT_BUDGET, EXIT_INPUT, EXIT_OK, EXIT_VALIDATION, main
from qcpm.reports import read_body, read_header

FIX = Path(__file__).resolve().parents[1] / "fixtures"


def _run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_embed_writes_tables(tmp_path):
    assert _run(tmp_path, "embed", "--problem", str(FIX / "lp_1x1.json")) == EXIT_OK
    head = read_header(tmp_path / "embedding.csv")
    for key in ("h_mode", "log_base", "constants_mode", "config"):
        assert key in head
    assert head["config"]["seed"] == 0
    body = read_body(tmp_path / "invariants.csv")
    assert "skew_symmetric,true" in body


def test_trace_outputs_extraction(tmp_path):
    assert _run(tmp_path, "trace", "--problem", str(FIX / "lp_2x2.json"), "--epsilon", "0.01") == EXIT_OK
    assert "duality_gap" in read_body(tmp_path / "extraction.csv")
    assert read_body(tmp_path / "path.csv").startswith("mu,")


def test_estimate(tmp_path, capsys):
    assert _run(tmp_path, "estimate", "--problem", str(FIX / "lp_1x1.json"), "--r1", "4") == EXIT_OK
    assert "nnz(A)" in capsys.readouterr().err
    assert read_header(tmp_path / "crossover.csv")["omega"] == pytest.approx(2.371552)
    assert (tmp_path / "resources.csv").exists()


@pytest.mark.parametrize("args", [
    ["embed", "--problem", "/nonexistent.json"],
    ["embed", "--problem", str(FIX / "lp_1x1.json"), "--epsilon", "1.5"],
    ["embed", "--problem", str(FIX / "lp_1x1.json"), "--grid-n", "7"],
    ["embed"],
])
def test_input_errors(tmp_path, args):
    assert _run(tmp_path, *args) == EXIT_INPUT


def test_norm_violation_strict_vs_rescale(tmp_path):
    src = tmp_path / "big.json"
    src.write_text(json.dumps({"m": 1, "n": 1, "A": [[2.0]], "b": [1.0], "c": [1.0]}))
    assert _run(tmp_path, "embed", "--problem", str(src)) == EXIT_INPUT
    assert _run(tmp_path, "embed", "--problem", str(src), "--normalize", "rescale") == EXIT_OK


def test_bad_json(tmp_path):
    src = tmp_path / "bad.json"
    src.write_text("{not json")
    assert _run(tmp_path, "embed", "--problem", str(src)) == EXIT_INPUT


def test_budget_exit(tmp_path):
    rng = np.random.default_rng(0)
    A = rng.uniform(-1, 1, (3, 3)) / 3
    src = tmp_path / "p.json"
    src.write_text(json.dumps({"m": 3, "n": 3, "A": A.tolist(), "b": [0.2] * 3, "c": [0.3] * 3}))
    assert _run(tmp_path, "simulate", "--problem", str(src), "--grid-n", "64") == EXIT_BUDGET


def test_embed_flags_row_norm_violation(tmp_path):
    src = tmp_path / "p.json"
    half = 0.5
    src.write_text(json.dumps({"m": 4, "n": 4, "A": np.zeros((4, 4)).tolist(),
                               "b": [-half] * 4, "c": [half] * 4}))
    assert _run(tmp_path, "embed", "--problem", str(src)) == EXIT_VALIDATION
    assert "max_row_norm_le_3,false" in read_body(tmp_path / "invariants.csv")


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        main([])
