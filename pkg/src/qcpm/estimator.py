"""Resource accounting: oracle queries, gate counts and Hamiltonian norm bounds.

Every big-O constant is set to 1, so the numbers are constants-mode
estimates meant for scaling comparisons, not absolute predictions.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .lo_core import LOProblem, embed
from .schedule import AdiabaticSchedule

CONSTANTS_MODE = "constants-mode estimate: every big-O constant set to 1"
DEFAULT_OMEGA = 2.371552
LOG3 = math.log2(3.0)


def _theta_at(schedule: AdiabaticSchedule, epsilon: float) -> float:
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    return schedule.h_at_mu(epsilon) / epsilon


def vnorm_bound(schedule: AdiabaticSchedule, K: float, epsilon: float | None = None) -> float:
    """K gamma^2 / (theta eta) with theta = h/mu taken at the worst case mu = epsilon.

    R1, nbar and delta are read from ``schedule``.
    """
    eps = schedule.mu_f if epsilon is None else epsilon
    return K * schedule.gamma ** 2 / (_theta_at(schedule, eps) * schedule.eta)


def lipschitz_bound(schedule: AdiabaticSchedule, K: float, epsilon: float | None = None) -> float:
    """2 K gamma^2 / theta^2 at mu = epsilon."""
    eps = schedule.mu_f if epsilon is None else epsilon
    return 2.0 * K * schedule.gamma ** 2 / _theta_at(schedule, eps) ** 2


def _check_positive(**kw) -> None:
    for k, v in kw.items():
        if not v > 0:
            raise ValueError(f"{k} must be positive, got {v}")


def query_count(R1: float, epsilon: float, nbar: float, delta: float) -> float:
    """(R1/eps) (sqrt(nbar) + ln(1/delta)) ln(1/delta) ln(nbar/delta)."""
    _check_positive(R1=R1, nbar=nbar)
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError("epsilon and delta must lie in (0, 1)")
    # the R1/eps factor goes last so that scaling it is exact in floating point
    return _query_factor(nbar, delta) * (R1 / epsilon)


def _query_factor(nbar: float, delta: float) -> float:
    L = math.log(1.0 / delta)
    return (math.sqrt(nbar) + L) * L * math.log(nbar / delta)


def _additional_factor(nbar: float, delta: float) -> float:
    L = math.log(1.0 / delta)
    rn = math.sqrt(nbar)
    return (rn + math.log(nbar / delta) ** 2.5) * (rn + L) * L * math.log(rn / delta)


def additional_gates(R1: float, epsilon: float, nbar: float, delta: float) -> float:
    """Gates of the simulation outside the oracle calls."""
    return _additional_factor(nbar, delta) * (R1 / epsilon)


@dataclass(frozen=True)
class OracleGates:
    multipliers: int
    adders: int
    slack_adders: int
    mu_queries: int
    ell: int
    gates: float
    nnz_M: int
    nnz_A: int

    @property
    def nnz_ratio(self) -> float:
        """nnz(M) / nnz(A); bounded when b, c are sparse relative to A."""
        return self.nnz_M / self.nnz_A if self.nnz_A else math.inf


def gates_from_counts(multipliers: int, adders: int, ell: int) -> float:
    return multipliers * ell ** LOG3 + adders * ell


def oracle_gate_count(p: LOProblem, ell: int) -> OracleGates:
    """Arithmetic cost of one evaluation of f_mu on ``ell``-bit registers.

    One multiplier per nonzero of M for s = Mz + q, one per coordinate for
    z_j s_j, and one for the final square. Adders: two per coordinate for the
    residual and the sum, plus the slack sums (reported separately and
    included in ``gates``).
    """
    if ell < 1:
        raise ValueError("ell must be at least 1")
    emb = embed(p)
    nbar = emb.nbar
    nnz_M = int(np.count_nonzero(emb.M))
    mult = 1 + nbar + nnz_M
    adders = 2 * nbar
    return OracleGates(
        multipliers=mult,
        adders=adders,
        slack_adders=nnz_M,
        mu_queries=nbar,
        ell=ell,
        gates=gates_from_counts(mult, adders + nnz_M, ell),
        nnz_M=nnz_M,
        nnz_A=p.nnz_A,
    )


@dataclass(frozen=True)
class TotalGates:
    total: float
    queries: float
    per_query: float
    additional: float
    assumption_ok: bool


def total_gate_count(p: LOProblem, R1: float, epsilon: float, delta: float, ell: int = 32) -> TotalGates:
    """queries x oracle gates + additional gates.

    ``assumption_ok`` is False when nnz(A) < sqrt(m + n); the value is still
    computed.
    """
    nbar = p.m + p.n + 2
    q = query_count(R1, epsilon, nbar, delta)
    og = oracle_gate_count(p, ell)
    extra = additional_gates(R1, epsilon, nbar, delta)
    per_unit = _query_factor(nbar, delta) * og.gates + _additional_factor(nbar, delta)
    return TotalGates(
        total=per_unit * (R1 / epsilon),
        queries=q,
        per_query=og.gates,
        additional=extra,
        assumption_ok=p.nnz_A >= math.sqrt(p.m + p.n),
    )


@dataclass(frozen=True)
class ResourceReport:
    queries: float
    gates_oracle: float
    gates_total: float
    vnorm: float
    lipschitz: float
    m: int
    n: int
    nnz_A: int
    R1: float
    epsilon: float
    delta: float
    gamma: float
    K: float
    ell: int
    multipliers: int
    adders: int
    nnz_assumption_ok: bool
    mode: str = CONSTANTS_MODE

    def as_dict(self) -> dict:
        return asdict(self)


def resource_report(
    p: LOProblem,
    R1: float,
    epsilon: float,
    delta: float,
    gamma: float = 0.25,
    K: float = 1.0,
    ell: int = 32,
    C_adiabatic: float = 1.0,
    h_mode: str = "algorithm1",
) -> ResourceReport:
    nbar = p.m + p.n + 2
    sched = AdiabaticSchedule(mu_f=epsilon, gamma=gamma, delta=delta, R1=R1, nbar=nbar,
                              C_adiabatic=C_adiabatic, h_mode=h_mode)
    og = oracle_gate_count(p, ell)
    tg = total_gate_count(p, R1, epsilon, delta, ell)
    return ResourceReport(
        queries=tg.queries,
        gates_oracle=og.gates,
        gates_total=tg.total,
        vnorm=vnorm_bound(sched, K),
        lipschitz=lipschitz_bound(sched, K),
        m=p.m,
        n=p.n,
        nnz_A=p.nnz_A,
        R1=R1,
        epsilon=epsilon,
        delta=delta,
        gamma=gamma,
        K=K,
        ell=ell,
        multipliers=og.multipliers,
        adders=og.adders + og.slack_adders,
        nnz_assumption_ok=tg.assumption_ok,
    )


def with_schedule_params(schedule: AdiabaticSchedule, **changes) -> AdiabaticSchedule:
    """Copy of ``schedule`` with fields replaced; eta is recomputed when delta changes."""
    if "delta" in changes and "eta" not in changes:
        changes["eta"] = None
    return replace(schedule, **changes)


# -- crossover tables ----------------------------------------------------------

CROSSOVER_COLUMNS = ["m_plus_n", "density", "nnz_A", "R1_over_eps", "qcpm_queries",
                     "qcpm_gates", "ipm", "qmmwu"]


def embedded_nnz(m: int, n: int, nnz_A: int) -> int:
    """Nonzeros of M when b, c and the residual column are dense."""
    return 2 * (nnz_A + m + n) + 2 * (m + n + 1)


def crossover_rows(
    sizes,
    densities,
    ratios,
    delta: float = 0.1,
    ell: int = 32,
    omega: float = DEFAULT_OMEGA,
    R1: float = 1.0,
) -> list[list[float]]:
    """Constants-mode QCPM gate estimate next to the IPM and QMMWU rows.

    ``sizes`` are m + n with m = n = size/2; ``ratios`` are values of R1/eps
    realized with the given R1.
    """
    rows = []
    for size in sizes:
        m = n = int(size) // 2
        nbar = m + n + 2
        for dens in densities:
            nnz = max(1, int(round(dens * m * n)))
            nnz_M = embedded_nnz(m, n, nnz)
            per_query = gates_from_counts(1 + nbar + nnz_M, 2 * nbar + nnz_M, ell)
            for ratio in ratios:
                eps = R1 / ratio
                q = query_count(R1, eps, nbar, delta)
                gates = q * per_query + additional_gates(R1, eps, nbar, delta)
                ipm = float(m + n) ** omega
                qmmwu = math.sqrt(m + n) * ratio ** 2.5 + ratio ** 3
                rows.append([m + n, dens, nnz, ratio, q, gates, ipm, qmmwu])
    return rows
