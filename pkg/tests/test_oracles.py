import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcpm.lo_core import make_problem
from qcpm.oracles import (dense_ground_state, gaussian_amplitude, overlap, spectral_second_derivative,
                          synthetic_2d, synthetic_nodes, synthetic_quartic, vertex_enumeration_lp)


def test_spectral_derivative_of_cosine():
    N, D = 32, 2 * math.pi
    x = np.arange(N) * D / N
    np.testing.assert_allclose(spectral_second_derivative(N, D) @ np.cos(3 * x), -9 * np.cos(3 * x), atol=1e-10)


def test_free_particle_gap():
    D, h = 5.0, 0.1
    gs = dense_ground_state(1, 64, D, np.zeros(64), h * h / 2)
    assert gs.energy0 == pytest.approx(0.0, abs=1e-12)
    assert gs.gap == pytest.approx(h * h / 2 * (2 * math.pi / D) ** 2, rel=1e-10)


def test_harmonic_gap_matches_frozen(frozen):
    D, N, h = 8.0, 256, 1e-2
    x = synthetic_nodes(N, D, 1)[..., 0]
    gs = dense_ground_state(1, N, D, 0.5 * (x - D / 2) ** 2, h * h / 2)
    assert gs.gap == pytest.approx(frozen["harmonic_gap_h1e-2_N256"], abs=1e-9)
    assert gs.gap == pytest.approx(h, rel=0.01)


def test_2d_gap_and_gaussian_overlap():
    sysm = synthetic_2d()
    N, D, h, mu = 48, 4.0, 0.02, 0.5
    nodes = synthetic_nodes(N, D, 2)
    gs = dense_ground_state(2, N, D, sysm.potential(nodes, mu), h * h / 2)
    lam = np.linalg.eigvalsh(sysm.hessian(mu))
    assert gs.gap == pytest.approx(h * math.sqrt(lam[0]), rel=0.05)
    g = gaussian_amplitude(nodes, sysm.center(mu), sysm.hessian(mu), h, (D / N) ** 2)
    assert overlap(gs.state0, g, (D / N) ** 2) > 0.98


def test_quartic_overlap_high():
    sysm = synthetic_quartic()
    N, D, h = 128, 2.0, 1e-3
    nodes = synthetic_nodes(N, D, 1)
    gs = dense_ground_state(1, N, D, sysm.potential(nodes, 0.0), h * h / 2)
    g = gaussian_amplitude(nodes, [1.0], np.eye(1), h, D / N)
    assert overlap(gs.state0, g, D / N) >= 0.99


def test_dense_budget_and_dims():
    with pytest.raises(ValueError):
        dense_ground_state(2, 256, 1.0, np.zeros((256, 256)), 1.0)
    with pytest.raises(ValueError):
        dense_ground_state(3, 8, 1.0, np.zeros((8, 8, 8)), 1.0)


def test_vertex_lp_examples():
    sol = vertex_enumeration_lp(make_problem([[1.0]], [0.5], [0.0]))
    assert sol.status == "optimal" and sol.value == 0.0
    assert vertex_enumeration_lp(make_problem([[0.0]], [1.0], [1.0])).status == "infeasible"
    assert vertex_enumeration_lp(make_problem([[1.0]], [0.0], [-1.0])).status == "unbounded"
    sol = vertex_enumeration_lp(make_problem([[1.0, 0.0], [0.0, 1.0]], [0.5, 0.25], [0.6, 0.8]))
    np.testing.assert_allclose(sol.x_opt, [0.5, 0.25])
    assert sol.value == pytest.approx(0.5)


def test_vertex_lp_fixtures_match_frozen(frozen):
    import json
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "fixtures"
    for name in ("1x1", "2x2"):
        p = make_problem(**{k: v for k, v in json.loads((root / f"lp_{name}.json").read_text()).items()
                            if k in "Abc"})
        sol = vertex_enumeration_lp(p)
        assert sol.value == pytest.approx(frozen[f"lp_{name}"]["value"], abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_vertex_lp_duality(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 4, size=2)
    A = rng.uniform(-1, 1, (m, n)) / math.sqrt(n)
    b = rng.uniform(-1, 1, m) / math.sqrt(m)
    c = rng.uniform(-1, 1, n) / math.sqrt(n)
    sol = vertex_enumeration_lp(make_problem(A, b, c))
    for x in sol.primal_vertices:
        for y in sol.dual_vertices:
            assert c @ x >= b @ y - 1e-9
    if sol.status == "optimal":
        assert float(c @ sol.x_opt) == pytest.approx(float(b @ sol.y_opt), abs=1e-9)
