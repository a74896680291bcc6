"""Acceptance checks A1-A10, shared by the test suite and ``qcpm validate``."""
from __future__ import annotations

import math
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.stats import chi2

from . import oracles, qsim
from .central_path import hessian_at, newton_center, point_rinf, sigma_min_check, trace_path
from .estimator import oracle_gate_count, query_count, total_gate_count, vnorm_bound
from .hamiltonian import build_harmonic, hsu_tail, neighborhood_tail_check
from .lo_core import LOProblem, embed, extract_solution, make_problem, max_row_norm
from .pipeline import simulate
from .reports import read_body
from .schedule import AdiabaticSchedule, fourier_truncation, g

FIXTURE_1X1 = {"A": [[1.0]], "b": [1.0], "c": [1.0]}
FIXTURE_2X2 = {"A": [[0.6, 0.8], [0.0, 0.5]], "b": [0.5, 0.1], "c": [0.3, 0.4]}

# end-to-end configuration for the LP fixture
E2E = {"epsilon": 0.25, "gamma": 0.25, "delta": 0.2, "N": 24, "seed": 0}
# the tail proposition's h carries no gamma; test at the top of the admissible range
TAIL_GAMMA = 0.99
TAIL_DELTA = 0.2


def fixture(name: str) -> LOProblem:
    data = {"1x1": FIXTURE_1X1, "2x2": FIXTURE_2X2}[name]
    return make_problem(data["A"], data["b"], data["c"])


@dataclass
class CheckResult:
    name: str
    passed: bool
    elapsed: float = 0.0
    budget: float = math.inf
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"{self.name} {tag} ({self.elapsed:.2f}s / {self.budget:g}s) {info}"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _timed(name: str, budget: float, body: Callable[[dict], bool]) -> CheckResult:
    details: dict = {}
    t0 = time.perf_counter()
    ok = bool(body(details))
    elapsed = time.perf_counter() - t0
    details["within_time"] = elapsed <= budget
    return CheckResult(name, ok and elapsed <= budget, elapsed, budget, details)


def random_problem(rng: np.random.Generator, max_dim: int = 4) -> LOProblem:
    """Random sparse LO problem scaled to satisfy the unit-norm assumptions."""
    m, n = rng.integers(1, max_dim + 1, size=2)
    A = rng.normal(size=(m, n)) * (rng.random((m, n)) < 0.7)
    A /= np.maximum(np.linalg.norm(A, axis=1, keepdims=True), 1.0) / rng.uniform(0.2, 1.0)
    A /= max(1.0, float(np.linalg.norm(A, axis=1).max()))
    b = rng.normal(size=m)
    b *= rng.uniform(0.1, 1.0) / max(float(np.linalg.norm(b)), 1e-12)
    c = rng.normal(size=n)
    c *= rng.uniform(0.1, 1.0) / max(float(np.linalg.norm(c)), 1e-12)
    return make_problem(A, b, c)


# -- A1 -------------------------------------------------------------------------

def check_a1(count: int = 20, seed: int = 1) -> CheckResult:
    def body(d):
        rng = np.random.default_rng(seed)
        skew = ones = qok = rows = True
        worst_row = 0.0
        for _ in range(count):
            emb = embed(random_problem(rng))
            skew &= bool(np.array_equal(emb.M.T, -emb.M))
            ones &= bool(np.max(np.abs(emb.M @ np.ones(emb.nbar) + emb.q - 1.0)) <= 1e-12)
            expect_q = np.zeros(emb.nbar)
            expect_q[-1] = emb.nbar
            qok &= bool(np.array_equal(emb.q, expect_q))
            worst_row = max(worst_row, max_row_norm(emb))
        rows = worst_row <= 3.0
        d.update(problems=count, skew_exact=skew, Me_plus_q_is_e=ones, q_ok=qok, max_row_norm=worst_row)
        return skew and ones and qok and rows

    return _timed("A1", 1.0, body)


# -- A2 -------------------------------------------------------------------------

def check_a2() -> CheckResult:
    def body(d):
        p = fixture("1x1")
        emb = embed(p)
        trace = trace_path(emb, 1e-6, gamma=0.25)
        worst = max(pt.d2 / pt.mu for pt in trace.points)
        ex = extract_solution(emb, trace.points[-1].z)
        ref = oracles.vertex_enumeration_lp(p)
        err = max(float(np.max(np.abs(ex.x - ref.x_opt))), float(np.max(np.abs(ex.y - ref.y_opt))))
        d.update(points=len(trace.points), max_d2_over_mu=worst, solution_error=err,
                 duality_gap=ex.duality_gap, oracle_status=ref.status)
        return worst <= 0.25 and err <= 1e-4 and abs(ex.duality_gap) <= 1e-4 and ref.status == "optimal"

    return _timed("A2", 5.0, body)


# -- A3 -------------------------------------------------------------------------

def check_a3() -> CheckResult:
    def body(d):
        ok = True
        worst_ratio = math.inf
        mus = np.logspace(-3, 0, 10)
        for name in ("1x1", "2x2"):
            emb = embed(fixture(name))
            trace = trace_path(emb, 1e-3)
            pts = [newton_center(emb, trace.at(mu).z, float(mu)) for mu in mus]
            rinf = max(trace.empirical_bounds()["R_inf"], max(point_rinf(pt) for pt in pts))
            for pt in pts:
                lam0 = float(np.linalg.eigvalsh(hessian_at(emb, pt.z))[0])
                bound = (pt.mu / rinf) ** 2
                worst_ratio = min(worst_ratio, lam0 / bound)
                ok &= lam0 >= bound and sigma_min_check(emb, pt, rinf).holds
            d[f"R_inf_{name}"] = rinf
        d["min_lambda0_over_bound"] = worst_ratio
        return ok

    return _timed("A3", 5.0, body)


# -- A4 -------------------------------------------------------------------------

A4_GRID = (2.0, 512)
A4_MU = 0.25


def check_a4() -> CheckResult:
    def body(d):
        D, N = A4_GRID
        system = oracles.synthetic_1d()
        nodes = oracles.synthetic_nodes(N, D, 1)
        values = system.potential(nodes, A4_MU)
        lam0 = float(np.linalg.eigvalsh(system.hessian(A4_MU))[0])
        errs, overlaps = [], []
        for h in (1e-1, 1e-2, 1e-3):
            gs = oracles.dense_ground_state(1, N, D, values, h * h / 2.0)
            predicted = h * math.sqrt(lam0)
            errs.append(abs(gs.gap - predicted) / predicted)
            gauss = oracles.gaussian_amplitude(nodes, system.center(A4_MU), system.hessian(A4_MU), h, D / N)
            overlaps.append(oracles.overlap(gs.state0, gauss, D / N))
        d.update(rel_gap_error=errs, overlap=overlaps)
        return errs[1] <= 0.05 and errs[0] > errs[1] > errs[2] and min(overlaps[1:]) >= 0.99

    return _timed("A4", 30.0, body)


# -- A5 -------------------------------------------------------------------------

def check_a5() -> CheckResult:
    def body(d):
        D, N = 20.0, 128
        grid = qsim.Grid(1, D, N)
        z = grid.points()[..., 0]
        V = 0.5 * (z - D / 2) ** 2
        moving = qsim.WaveFunction(np.exp(-((z - D / 2 - 1.5) ** 2) / 2).astype(complex), grid).normalized()

        drift = abs(qsim.propagate(moving, V, 0.5, 1.0, 0.01, 1000).norm - 1.0)

        runs = [qsim.propagate(moving, V, 0.5, 1.0, 1.0 / n, n) for n in (10, 20, 40)]

        def dist(a, b):
            return math.sqrt(float(np.sum(np.abs(a.amplitudes - b.amplitudes) ** 2)) * grid.cell_volume)

        ratio = dist(runs[0], runs[1]) / dist(runs[1], runs[2])

        gs = oracles.dense_ground_state(1, N, D, V, 0.5)
        psi = qsim.WaveFunction(gs.state0, grid)
        fid = qsim.fidelity(psi, qsim.propagate(psi, V, 0.5, 1.0, 0.01, 1000))
        d.update(norm_drift=drift, richardson_ratio=ratio, frozen_fidelity=fid)
        return drift <= 1e-9 and 3.5 <= ratio <= 4.5 and fid >= 1 - 1e-6

    return _timed("A5", 60.0, body)


# -- A6 -------------------------------------------------------------------------

ETA_SWEEP = (1.0, 0.5, 0.25, 0.125)
SYNTHETIC_SETUP = {1: (4.0, 256), 2: (4.0, 64)}  # dims -> (D, N)


def synthetic_adiabatic_infidelity(dims: int, eta: float, R1: float = 0.1, mu_f: float = 0.25) -> float:
    """Final infidelity to the dense ground state at mu_f after adiabatic evolution."""
    D, N = SYNTHETIC_SETUP[dims]
    system = oracles.synthetic_1d() if dims == 1 else oracles.synthetic_2d()
    grid = qsim.Grid(dims, D, N)
    pts = grid.points()
    sched = AdiabaticSchedule(mu_f=mu_f, gamma=0.5, delta=0.2, R1=R1, nbar=dims, eta=eta)

    def pot(mu):
        return system.potential(pts, mu)

    h0, h1 = sched.h(0.0), sched.h(1.0)
    start = oracles.dense_ground_state(dims, N, D, pot(1.0), h0 * h0 / 2.0)
    target = oracles.dense_ground_state(dims, N, D, pot(mu_f), h1 * h1 / 2.0)
    steps = qsim.step_budget(sched, grid, lambda mu: np.linalg.eigvalsh(system.hessian(mu)))
    run = qsim.make_run(sched, grid, steps)
    out = qsim.evolve(run, pot, qsim.WaveFunction(start.state0, grid), checkpoints=4)
    return 1.0 - qsim.fidelity(out, qsim.WaveFunction(target.state0, grid))


def check_a6(seed: int = E2E["seed"]) -> CheckResult:
    def body(d):
        ok = True
        for dims in (1, 2):
            inf = [synthetic_adiabatic_infidelity(dims, eta) for eta in ETA_SWEEP]
            mono = all(a > b for a, b in zip(inf, inf[1:]))
            d[f"infidelity_{dims}d"] = inf
            ok &= mono
        emb = embed(fixture("1x1"))
        res = simulate(emb, E2E["epsilon"], E2E["gamma"], E2E["delta"], E2E["N"], seed)
        delta = E2E["delta"]
        shots = len(res.single_shot)
        sigma = math.sqrt(delta * (1 - delta) / shots)
        need = 1 - delta - 3 * sigma
        d.update(best_d2=res.best.d2, gamma_eps=E2E["gamma"] * E2E["epsilon"],
                 single_shot_rate=res.single_shot_rate, rate_needed=need, steps=res.run.steps,
                 final_fidelity=res.run.diagnostics[-1].fidelity_to_harmonic)
        return ok and res.verdict and res.single_shot_rate >= need

    return _timed("A6", 600.0, body)


# -- A7 -------------------------------------------------------------------------

def check_a7(samples: int = 100_000, seed: int = 7) -> CheckResult:
    def body(d):
        emb = embed(fixture("1x1"))
        R1 = trace_path(emb, 0.25).empirical_bounds()["R1"]
        sched = AdiabaticSchedule(mu_f=0.25, gamma=TAIL_GAMMA, delta=TAIL_DELTA, R1=R1, nbar=emb.nbar,
                                  h_mode="proposition2")
        ok = True
        rates = []
        for mu in (0.25, 0.5, 1.0):
            model = build_harmonic(emb, mu, sched.h_at_mu(mu))
            tc = neighborhood_tail_check(emb, model, TAIL_GAMMA, TAIL_DELTA, samples, seed, "proposition2")
            rates.append(tc.empirical)
            ok &= tc.holds
        tail = hsu_tail(np.eye(1), 1.0)
        x = np.random.default_rng(seed).standard_normal(samples)
        mc = float(np.mean(x * x > tail.threshold))
        exact = float(chi2.sf(tail.threshold, 1))
        d.update(gamma=TAIL_GAMMA, delta=TAIL_DELTA, exceedance=rates, hsu_threshold=tail.threshold,
                 chi2_tail_mc=mc, chi2_tail_exact=exact, hsu_bound=tail.bound)
        ok &= tail.threshold == 5.0 and abs(exact - 0.0253) < 5e-4 and mc <= tail.bound
        return ok

    return _timed("A7", 30.0, body)


# -- A8 -------------------------------------------------------------------------

def _forward_difference(f, x0: float, step: float, k: int) -> float:
    return sum((-1) ** (k - j) * math.comb(k, j) * f(x0 + j * step) for j in range(k + 1)) / step ** k


def check_a8() -> CheckResult:
    def body(d):
        ends = [abs(g(0.0)), abs(g(1.0) - 1.0), abs(g(0.5) - 0.5)]
        sched = AdiabaticSchedule(mu_f=0.25, gamma=0.25, delta=0.2, R1=4.0, nbar=4)
        step = 0.01
        derivs = []
        for k in (1, 2, 3):
            derivs.append(abs(_forward_difference(sched.mu, 0.0, step, k)))
            derivs.append(abs(_forward_difference(sched.mu, 1.0, -step, k)))
        sweep_ok = True
        for r in np.linspace(0.05, 0.45, 10):
            for target in (0.5, 1e-3):
                n = fourier_truncation(target, float(r))
                sweep_ok &= 2 * r ** (n / 2 + 1) <= target
        d.update(endpoint_errors=max(ends), max_fd_derivative=max(derivs), fourier_sweep=sweep_ok)
        return max(ends) <= 1e-10 and max(derivs) <= 1e-6 and sweep_ok

    return _timed("A8", 5.0, body)


# -- A9 -------------------------------------------------------------------------

def check_a9(seed: int = 9) -> CheckResult:
    def body(d):
        og = oracle_gate_count(fixture("1x1"), 16)
        q1 = query_count(4.0, 0.25, 4, 0.1)
        q10 = query_count(40.0, 0.25, 4, 0.1)
        rng = np.random.default_rng(seed)
        mono = True
        for _ in range(200):
            R1, eps, nbar, dl = rng.uniform(0.5, 50), rng.uniform(0.01, 0.9), int(rng.integers(3, 10_000)), rng.uniform(0.01, 0.9)
            base = query_count(R1, eps, nbar, dl)
            mono &= query_count(R1 * 1.5, eps, nbar, dl) > base
            mono &= query_count(R1, eps * 0.7, nbar, dl) > base
            mono &= query_count(R1, eps, nbar + 5, dl) > base
            mono &= query_count(R1, eps, nbar, dl * 0.7) > base
            sched = AdiabaticSchedule(mu_f=eps, gamma=0.5, delta=dl, R1=R1, nbar=nbar)
            twice = AdiabaticSchedule(mu_f=eps, gamma=0.5, delta=dl, R1=2 * R1, nbar=nbar)
            mono &= math.isclose(vnorm_bound(twice, 1.0), 2 * vnorm_bound(sched, 1.0), rel_tol=1e-12)
        sparse = make_problem([[0.6, 0.0], [0.0, 0.5]], [0.5, 0.1], [0.3, 0.4])
        dense = fixture("2x2")
        mono &= total_gate_count(dense, 4.0, 0.25, 0.1).total > total_gate_count(sparse, 4.0, 0.25, 0.1).total
        d.update(multipliers=og.multipliers, query_ratio=q10 / q1, monotone=mono)
        return og.multipliers == 17 and q10 == 10 * q1 and mono

    return _timed("A9", 1.0, body)


# -- A10 ------------------------------------------------------------------------

A10_GRID_N = 16


def _simulate_cli(problem: Path, out: Path, seed: int) -> int:
    cmd = [sys.executable, "-m", "qcpm", "simulate", "--problem", str(problem),
           "--epsilon", str(E2E["epsilon"]), "--gamma", str(E2E["gamma"]), "--delta", str(E2E["delta"]),
           "--grid-n", str(A10_GRID_N), "--seed", str(seed), "--out", str(out)]
    return subprocess.run(cmd, capture_output=True).returncode


def check_a10(seed: int = 3) -> CheckResult:
    def body(d):
        import json

        with tempfile.TemporaryDirectory() as tmp:
            tmp = Path(tmp)
            problem = tmp / "problem.json"
            problem.write_text(json.dumps(FIXTURE_1X1))
            codes = [_simulate_cli(problem, tmp / f"run{k}", seed) for k in (0, 1)]
            names = sorted(p.name for p in (tmp / "run0").glob("*.csv"))
            same = bool(names) and all(
                read_body(tmp / "run0" / nm) == read_body(tmp / "run1" / nm) for nm in names)
        d.update(exit_codes=codes, csv_files=names, identical=same)
        return same and codes[0] == codes[1] and codes[0] in (0, 1)

    return _timed("A10", 600.0, body)


ALL_CHECKS: dict[str, Callable[[], CheckResult]] = {
    "A1": check_a1, "A2": check_a2, "A3": check_a3, "A4": check_a4, "A5": check_a5,
    "A6": check_a6, "A7": check_a7, "A8": check_a8, "A9": check_a9, "A10": check_a10,
}
QUICK = ("A1", "A2", "A3", "A4", "A5", "A7", "A8", "A9")
