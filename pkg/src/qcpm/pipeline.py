"""End-to-end central path simulation: embed, trace, evolve, sample, extract."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import qsim
from .central_path import PathTrace, proximity, trace_path
from .hamiltonian import PotentialField, build_harmonic
from .lo_core import Extraction, NotSolvableError, SelfDualEmbedding, extract_solution, slack
from .schedule import AdiabaticSchedule

SINGLE_SHOT_SEEDS = 50
SAMPLE_COLUMNS_PREFIX = ["kind", "index"]


def n_samples(delta: float) -> int:
    """Repetitions for success amplification: ceil(log(1/delta) / log 2)."""
    return max(1, math.ceil(math.log(1.0 / delta) / math.log(2.0)))


@dataclass
class SampleRecord:
    kind: str  # "amplified" or "single_shot"
    index: int
    z: np.ndarray
    d2: float
    inside: bool


@dataclass
class SimulationResult:
    embedding: SelfDualEmbedding
    trace: PathTrace
    schedule: AdiabaticSchedule
    run: qsim.PropagatorRun
    final_state: qsim.WaveFunction
    samples: list[SampleRecord] = field(default_factory=list)
    epsilon: float = 0.0
    gamma: float = 0.0
    queries: int = 0
    extraction: Extraction | None = None
    extraction_error: str | None = None

    @property
    def amplified(self) -> list[SampleRecord]:
        return [s for s in self.samples if s.kind == "amplified"]

    @property
    def single_shot(self) -> list[SampleRecord]:
        return [s for s in self.samples if s.kind == "single_shot"]

    @property
    def best(self) -> SampleRecord:
        return min(self.amplified, key=lambda s: s.d2)

    @property
    def single_shot_rate(self) -> float:
        shots = self.single_shot
        return sum(s.inside for s in shots) / len(shots) if shots else math.nan

    @property
    def verdict(self) -> bool:
        return self.best.d2 <= self.gamma * self.epsilon

    def sample_rows(self) -> tuple[list[str], list[list]]:
        nbar = self.embedding.nbar
        cols = SAMPLE_COLUMNS_PREFIX + [f"z_{i + 1}" for i in range(nbar)] + ["d2", "in_neighborhood"]
        rows = [[s.kind, s.index, *map(float, s.z), s.d2, s.inside] for s in self.samples]
        return cols, rows

    def summary(self) -> dict:
        best = self.best
        out = {
            "grid": self.run.grid.as_dict(),
            "steps": self.run.steps,
            "eta": self.schedule.eta,
            "oracle_queries": self.queries,
            "n_samples": len(self.amplified),
            "best_d2": best.d2,
            "gamma_eps": self.gamma * self.epsilon,
            "verdict": "pass" if self.verdict else "fail",
            "single_shot_rate": self.single_shot_rate,
            "single_shot_seeds": len(self.single_shot),
            "final_fidelity_to_harmonic": self.run.diagnostics[-1].fidelity_to_harmonic,
        }
        if self.extraction is not None:
            out["duality_gap"] = self.extraction.duality_gap
            out["x"] = self.extraction.x.tolist()
            out["y"] = self.extraction.y.tolist()
        if self.extraction_error is not None:
            out["extraction_error"] = self.extraction_error
        return out


def _record(emb: SelfDualEmbedding, z: np.ndarray, epsilon: float, gamma: float, kind: str, k: int) -> SampleRecord:
    s = slack(emb, z)
    d2 = proximity(z, s, epsilon)
    inside = bool(np.all(z > 0) and np.all(s > 0) and d2 <= gamma * epsilon)
    return SampleRecord(kind, k, z, d2, inside)


def simulate(
    emb: SelfDualEmbedding,
    epsilon: float,
    gamma: float,
    delta: float,
    N: int,
    seed: int,
    R1: float | None = None,
    h_mode: str = "algorithm1",
    C_adiabatic: float = 1.0,
    eta: float | None = None,
    checkpoints: int = 32,
    single_shot_seeds: int = SINGLE_SHOT_SEEDS,
    memory_budget: int = qsim.MEMORY_BUDGET,
) -> SimulationResult:
    """Run the adiabatic central path simulation on an embedded problem.

    ``R1=None`` uses the l1 size measured along the traced path.
    """
    trace = trace_path(emb, epsilon, gamma)
    if R1 is None:
        R1 = trace.empirical_bounds()["R1"]
    sched = AdiabaticSchedule(mu_f=epsilon, gamma=gamma, delta=delta, R1=R1, nbar=emb.nbar,
                              C_adiabatic=C_adiabatic, h_mode=h_mode, eta=eta)
    grid = qsim.build_grid(emb, trace, sched, N, memory_budget=memory_budget)
    ref = qsim.lp_reference(emb, trace)
    steps = qsim.step_budget(sched, grid, lambda mu: np.linalg.eigvalsh(ref(mu)[1]))
    psi0 = qsim.initial_state(grid, build_harmonic(emb, 1.0, sched.h(0.0)))
    field_ = PotentialField(emb)
    run = qsim.make_run(sched, grid, steps)
    final = qsim.evolve(run, field_, psi0, reference=ref, checkpoints=checkpoints)

    res = SimulationResult(emb, trace, sched, run, final, epsilon=epsilon, gamma=gamma)
    pts = qsim.sample(final, [seed, 1], size=n_samples(delta))
    res.samples = [_record(emb, z, epsilon, gamma, "amplified", k) for k, z in enumerate(pts)]
    for k in range(single_shot_seeds):
        z = qsim.sample(final, [seed, 2, k])
        res.samples.append(_record(emb, z, epsilon, gamma, "single_shot", k))
    res.queries = field_.queries
    try:
        res.extraction = extract_solution(emb, res.best.z)
    except (NotSolvableError, ValueError) as exc:
        res.extraction_error = str(exc)
    return res
