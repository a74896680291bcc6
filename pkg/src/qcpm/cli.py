"""Batch command-line front end: ``qcpm {embed,trace,simulate,validate,estimate}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import checks, estimator, qsim
from .central_path import NewtonError, sigma_min_check, trace_path
from .lo_core import (NotSolvableError, ProblemError, embed, extract_solution, load_problem,
                      max_row_norm, problem_to_dict)
from .pipeline import n_samples, simulate
from .reports import header_for, prefixed, write_csv
from .schedule import H_MODES

EXIT_OK, EXIT_VALIDATION, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3
SUBCOMMANDS = ("embed", "trace", "simulate", "validate", "estimate")

log = logging.getLogger("qcpm")


class InputError(ValueError):
    pass


def _auto_or_positive(text: str):
    if text == "auto":
        return "auto"
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number or 'auto', got {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


@dataclass
class RunConfig:
    subcommand: str
    problem_path: str | None
    epsilon: float
    gamma: float
    delta: float
    R1: float | str
    R_inf: float | str
    grid_n: int
    seed: int
    h_mode: str
    C_adiabatic: float
    K: float
    output_dir: str
    normalize: str = "strict"
    ell: int = 32
    full: bool = False

    def validate(self) -> None:
        for name in ("epsilon", "gamma", "delta"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise InputError(f"{name} must lie in (0, 1), got {v}")
        if self.C_adiabatic <= 0 or self.K <= 0:
            raise InputError("--c-adiabatic and --k-const must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise InputError("seed must be a 64-bit unsigned integer")
        if self.grid_n < 8 or self.grid_n % 2:
            raise InputError("--grid-n must be even and at least 8")
        if self.ell < 1:
            raise InputError("--ell must be positive")
        if self.subcommand in ("embed", "trace", "simulate", "estimate") and not self.problem_path:
            raise InputError(f"{self.subcommand} needs --problem")

    def echo(self) -> dict:
        return asdict(self)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", help="problem file (JSON with A, b, c)")
    common.add_argument("--epsilon", type=float, default=0.25)
    common.add_argument("--gamma", type=float, default=0.25)
    common.add_argument("--delta", type=float, default=0.2)
    common.add_argument("--r1", type=_auto_or_positive, default="auto")
    common.add_argument("--rinf", type=_auto_or_positive, default="auto")
    common.add_argument("--grid-n", type=int, default=24)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--h-mode", choices=H_MODES, default="algorithm1")
    common.add_argument("--c-adiabatic", type=float, default=1.0)
    common.add_argument("--k-const", type=float, default=1.0)
    common.add_argument("--out", default="qcpm_out")
    common.add_argument("--normalize", choices=("strict", "rescale"), default="strict")
    common.add_argument("--ell", type=int, default=32, help="bit precision for gate counts")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="qcpm", description="Classical emulation of the quantum central path method")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("embed", parents=[common], help="build the self-dual embedding")
    sub.add_parser("trace", parents=[common], help="trace the central path classically")
    sub.add_parser("simulate", parents=[common], help="run the adiabatic simulation and sample")
    val = sub.add_parser("validate", parents=[common], help="run the acceptance checks")
    val.add_argument("--full", action="store_true", help="include the slow end-to-end checks A6 and A10")
    est = sub.add_parser("estimate", parents=[common], help="resource estimates")
    est.add_argument("--omega", type=float, default=estimator.DEFAULT_OMEGA)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        subcommand=ns.subcommand,
        problem_path=ns.problem,
        epsilon=ns.epsilon,
        gamma=ns.gamma,
        delta=ns.delta,
        R1=ns.r1,
        R_inf=ns.rinf,
        grid_n=ns.grid_n,
        seed=ns.seed,
        h_mode=ns.h_mode,
        C_adiabatic=ns.c_adiabatic,
        K=ns.k_const,
        output_dir=ns.out,
        normalize=ns.normalize,
        ell=ns.ell,
        full=getattr(ns, "full", False),
    )


def _kv_rows(d: dict) -> list[list]:
    return [[k, json.dumps(v) if isinstance(v, (dict, list)) else v] for k, v in d.items()]


def _problem(cfg: RunConfig):
    return load_problem(Path(cfg.problem_path), mode=cfg.normalize)


def cmd_embed(cfg: RunConfig, out: Path, head: dict) -> int:
    p = _problem(cfg)
    emb = embed(p)
    nb = emb.nbar
    rows = [[i, *emb.M[i].tolist(), float(emb.q[i])] for i in range(nb)]
    write_csv(out / "embedding.csv", head, ["row"] + [f"M_{j + 1}" for j in range(nb)] + ["q"], rows)
    e = np.ones(nb)
    checks_ = {
        "skew_symmetric": bool(np.array_equal(emb.M.T, -emb.M)),
        "slack_at_ones_is_ones": bool(np.max(np.abs(emb.M @ e + emb.q - e)) <= 1e-12),
        "q_is_nbar_unit": bool(np.array_equal(emb.q[:-1], np.zeros(nb - 1)) and emb.q[-1] == nb),
        "max_row_norm_le_3": max_row_norm(emb) <= 3.0,
    }
    write_csv(out / "invariants.csv", head, ["invariant", "holds"], list(checks_.items()))
    write_csv(out / "problem.csv", head, ["key", "value"], _kv_rows(problem_to_dict(p)))
    for k, v in checks_.items():
        print(f"{k}: {'ok' if v else 'VIOLATED'}")
    return EXIT_OK if all(checks_.values()) else EXIT_VALIDATION


def cmd_trace(cfg: RunConfig, out: Path, head: dict) -> int:
    emb = embed(_problem(cfg))
    trace = trace_path(emb, cfg.epsilon, cfg.gamma)
    (out / "path.csv").write_text(prefixed(head, trace.to_csv()))
    bounds = trace.empirical_bounds()
    report = {"continuation_steps": trace.continuation_steps, "newton_total": trace.newton_total,
              "R1_measured": bounds["R1"], "R_inf_measured": bounds["R_inf"]}
    status = EXIT_OK
    if cfg.R_inf != "auto":
        sig = sigma_min_check(emb, trace.points[-1], float(cfg.R_inf))
        report.update(sigma_min=sig.sigma_min, sigma_bound=sig.bound, sigma_check=sig.holds)
        if not sig.holds:
            status = EXIT_VALIDATION
    try:
        report.update(extract_solution(emb, trace.points[-1].z).as_dict())
    except NotSolvableError as exc:
        report["extraction_error"] = str(exc)
    write_csv(out / "extraction.csv", head, ["key", "value"], _kv_rows(report))
    for k, v in report.items():
        print(f"{k}: {v}")
    return status


def cmd_simulate(cfg: RunConfig, out: Path, head: dict) -> int:
    emb = embed(_problem(cfg))
    R1 = None if cfg.R1 == "auto" else float(cfg.R1)
    res = simulate(emb, cfg.epsilon, cfg.gamma, cfg.delta, cfg.grid_n, cfg.seed, R1=R1,
                   h_mode=cfg.h_mode, C_adiabatic=cfg.C_adiabatic)
    head = dict(head, schedule=res.schedule.header(), n_samples=n_samples(cfg.delta))
    (out / "diagnostics.csv").write_text(prefixed(head, res.run.diagnostics_csv()))
    cols, rows = res.sample_rows()
    write_csv(out / "samples.csv", head, cols, rows)
    summary = res.summary()
    write_csv(out / "summary.csv", head, ["key", "value"], _kv_rows(summary))
    print(f"best d2 = {summary['best_d2']:.6g} vs gamma*eps = {summary['gamma_eps']:.6g}: {summary['verdict']}")
    print(f"single-shot in-neighborhood rate over {summary['single_shot_seeds']} seeds: "
          f"{summary['single_shot_rate']:.3f}")
    return EXIT_OK if res.verdict else EXIT_VALIDATION


def cmd_validate(cfg: RunConfig, out: Path, head: dict) -> int:
    names = list(checks.ALL_CHECKS) if cfg.full else list(checks.QUICK)
    results = [checks.ALL_CHECKS[n]() for n in names]
    rows = [[r.name, r.passed, r.elapsed, r.budget, json.dumps(r.details, default=str)] for r in results]
    write_csv(out / "validation.csv", head, ["criterion", "passed", "seconds", "budget", "details"], rows)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def cmd_estimate(cfg: RunConfig, out: Path, head: dict, omega: float) -> int:
    p = _problem(cfg)
    if cfg.R1 == "auto":
        R1 = trace_path(embed(p), cfg.epsilon, cfg.gamma).empirical_bounds()["R1"]
    else:
        R1 = float(cfg.R1)
    rep = estimator.resource_report(p, R1, cfg.epsilon, cfg.delta, gamma=cfg.gamma, K=cfg.K, ell=cfg.ell,
                                    C_adiabatic=cfg.C_adiabatic, h_mode=cfg.h_mode)
    d = rep.as_dict()
    write_csv(out / "resources.csv", head, list(d), [list(d.values())])
    rows = estimator.crossover_rows([10, 100, 1000, 10_000], [0.01, 0.1, 1.0], [10.0, 100.0, 1000.0],
                                    delta=cfg.delta, ell=cfg.ell, omega=omega)
    write_csv(out / "crossover.csv", dict(head, omega=omega), estimator.CROSSOVER_COLUMNS, rows)
    if not rep.nnz_assumption_ok:
        print("warning: nnz(A) < sqrt(m + n); total gate count outside its stated regime", file=sys.stderr)
    for k in ("queries", "gates_oracle", "gates_total", "vnorm", "lipschitz"):
        print(f"{k}: {d[k]:.6g}")
    return EXIT_OK


def run(cfg: RunConfig, omega: float = estimator.DEFAULT_OMEGA) -> int:
    cfg.validate()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    head = header_for(cfg.echo())
    if cfg.subcommand == "embed":
        return cmd_embed(cfg, out, head)
    if cfg.subcommand == "trace":
        return cmd_trace(cfg, out, head)
    if cfg.subcommand == "simulate":
        return cmd_simulate(cfg, out, head)
    if cfg.subcommand == "validate":
        return cmd_validate(cfg, out, head)
    return cmd_estimate(cfg, out, head, omega)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return run(config_from_args(ns), getattr(ns, "omega", estimator.DEFAULT_OMEGA))
    except (FileNotFoundError, ProblemError, InputError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except qsim.ResourceBudgetError as exc:
        print(f"resource budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (qsim.GridError, NewtonError, qsim.NormDriftError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
