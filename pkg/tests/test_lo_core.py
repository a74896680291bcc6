import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcpm import checks
from qcpm.lo_core import (NotSolvableError, ProblemError, embed, extract_solution, load_problem,
                          make_problem, max_row_norm, slack)


def test_fixture_embedding_matches_hand_evaluation(emb1):
    expect = np.array([[0, 1, -1, 1], [-1, 0, 1, 1], [1, -1, 0, 1], [-1, -1, -1, 0]], dtype=float)
    np.testing.assert_array_equal(emb1.M, expect)
    np.testing.assert_array_equal(emb1.q, [0, 0, 0, 4])
    np.testing.assert_array_equal(emb1.r, [1, 1, 1])


def test_load_examples(fixtures_dir):
    p = load_problem(fixtures_dir / "lp_1x1.json")
    assert (p.m, p.n, p.nnz_A) == (1, 1, 1)
    p2 = load_problem(fixtures_dir / "lp_2x2.json")
    assert (p2.m, p2.n, p2.nnz_A) == (2, 2, 3)


def test_strict_mode_rejects_large_row():
    with pytest.raises(ProblemError, match="norm"):
        make_problem([[2.0]], [1.0], [1.0])


def test_rescale_mode_records_factors():
    p = make_problem([[2.0]], [1.0], [3.0], mode="rescale")
    assert p.row_scale == 2.0 and p.obj_scale == 3.0
    assert p.A[0, 0] == 1.0 and p.b[0] == 0.5 and p.c[0] == 1.0


@pytest.mark.parametrize("bad", [
    {"A": [[1.0, 0.0]], "b": [1.0], "c": [1.0]},
    {"A": [[float("nan")]], "b": [0.0], "c": [0.0]},
])
def test_bad_inputs_rejected(bad):
    with pytest.raises(ProblemError):
        make_problem(bad["A"], bad["b"], bad["c"])


def test_coo_and_dense_agree(tmp_path):
    dense = {"m": 2, "n": 2, "A": [[0.6, 0.8], [0.0, 0.5]], "b": [0.5, 0.1], "c": [0.3, 0.4]}
    coo = dict(dense, A={"coo": [[0, 0, 0.6], [0, 1, 0.8], [1, 1, 0.5]]})
    path = tmp_path / "coo.json"
    path.write_text(json.dumps(coo))
    np.testing.assert_array_equal(load_problem(path).A, load_problem(dense).A)


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_problem("/definitely/not/here.json")


def test_slack_linearity(emb2):
    e = np.ones(emb2.nbar)
    np.testing.assert_allclose(slack(emb2, e), e, atol=1e-15)
    np.testing.assert_array_equal(slack(emb2, np.zeros(emb2.nbar)), emb2.q)
    np.testing.assert_allclose(slack(emb2, 2 * e), 2 * e - emb2.q, atol=1e-14)


def test_split_join_round_trip(emb2):
    z = np.random.default_rng(0).random(emb2.nbar)
    assert np.array_equal(emb2.join(emb2.split(z)), z)


def test_extract_at_ones(emb2):
    ex = extract_solution(emb2, np.ones(emb2.nbar))
    assert ex.beta == 1.0 and ex.vartheta == 1.0
    np.testing.assert_array_equal(ex.x, [1, 1])
    np.testing.assert_array_equal(ex.y, [1, 1])


def test_extract_beta_zero(emb1):
    with pytest.raises(NotSolvableError):
        extract_solution(emb1, np.array([1.0, 1.0, 0.0, 1.0]))


problems = st.integers(0, 2 ** 32 - 1).map(lambda s: checks.random_problem(np.random.default_rng(s)))


@settings(max_examples=60, deadline=None)
@given(problems)
def test_embedding_invariants(p):
    emb = embed(p)
    assert np.array_equal(emb.M.T, -emb.M)
    np.testing.assert_allclose(emb.M @ np.ones(emb.nbar) + emb.q, 1.0, atol=1e-12)
    assert emb.q[-1] == emb.nbar and not emb.q[:-1].any()


@settings(max_examples=60, deadline=None)
@given(problems)
def test_row_norm_corrected_bound(p):
    # entries of A, b, c are at most 1 in size, so every residual entry is at most 2 + max(m, n)
    assert max_row_norm(embed(p)) <= 2.0 + 2.0 + max(p.m, p.n) + np.sqrt(p.m + p.n)


def test_row_norm_can_exceed_three():
    # b and c of unit norm with opposite-sign sums push the beta-row residual to 1 + sqrt(m) + sqrt(n)
    m = n = 4
    b = -np.ones(m) / 2.0
    c = np.ones(n) / 2.0
    p = make_problem(np.zeros((m, n)), b, c)
    emb = embed(p)
    beta_row = emb.M[emb.nbar - 2]
    assert beta_row[-1] == pytest.approx(1 + 2 + 2)
    assert max_row_norm(emb) > 3.0


@settings(max_examples=40, deadline=None)
@given(problems, st.floats(0.1, 3.0))
def test_extraction_gap_nonnegative_on_feasible_points(p, scale):
    # z with beta = 1 and (x, y) feasible for (P) and (D) gives a nonnegative gap
    from qcpm.oracles import vertex_enumeration_lp

    if p.m > 3 or p.n > 3:
        return
    sol = vertex_enumeration_lp(p)
    if sol.status != "optimal":
        return
    emb = embed(p)
    z = emb.join({"y": sol.y_opt.clip(0), "x": sol.x_opt.clip(0) * 1.0, "beta": np.array([1.0]),
                  "vartheta": np.array([scale])})
    ex = extract_solution(emb, z)
    assert ex.duality_gap >= -1e-9
