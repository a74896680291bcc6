"""LP problem data, normalization, and the self-dual embedding."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

BETA_MIN = 1e-8


class ProblemError(ValueError):
    """Malformed or inadmissible problem input."""


class NotSolvableError(RuntimeError):
    """Homogenizing variable beta is at or below the solvability threshold."""


@dataclass(frozen=True)
class LOProblem:
    """Primal ``min c.x s.t. Ax >= b, x >= 0`` and its dual.

    ``row_scale`` and ``obj_scale`` are 1 unless the problem was rescaled on
    load: A and b were divided by ``row_scale``, c by ``obj_scale``.
    """

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    nnz_A: int
    row_scale: float = 1.0
    obj_scale: float = 1.0

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class SelfDualEmbedding:
    M: np.ndarray
    q: np.ndarray
    r: np.ndarray
    problem: LOProblem
    index_map: dict[str, slice] = field(default_factory=dict)

    @property
    def nbar(self) -> int:
        return self.M.shape[0]

    def split(self, z: np.ndarray) -> dict[str, np.ndarray]:
        return {name: z[sl] for name, sl in self.index_map.items()}

    def join(self, parts: Mapping[str, np.ndarray]) -> np.ndarray:
        return np.concatenate([np.atleast_1d(parts[k]) for k in ("y", "x", "beta", "vartheta")])


def _dense_from_source(raw: Any, m: int, n: int) -> np.ndarray:
    if isinstance(raw, Mapping):
        triples = raw.get("coo")
        if triples is None:
            raise ProblemError("sparse A needs a 'coo' list of [row, col, value] triples")
        A = np.zeros((m, n))
        for t in triples:
            if len(t) != 3:
                raise ProblemError(f"bad COO triple {t!r}")
            i, j, v = int(t[0]), int(t[1]), float(t[2])
            if not (0 <= i < m and 0 <= j < n):
                raise ProblemError(f"COO index ({i}, {j}) outside {m}x{n}")
            A[i, j] += v
        return A
    try:
        A = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"cannot read A: {exc}") from exc
    if A.ndim != 2 or A.shape != (m, n):
        raise ProblemError(f"A has shape {A.shape}, expected ({m}, {n})")
    return A


def make_problem(A, b, c, mode: str = "strict") -> LOProblem:
    """Validate (A, b, c) and enforce the unit-norm assumptions.

    In ``strict`` mode any row of A, b or c with norm above 1 is rejected.
    In ``rescale`` mode A and b share one divisor (keeping the primal
    feasible set) and c gets its own (keeping the primal minimizers).
    """
    A = np.array(A, dtype=float, ndmin=2)
    b = np.array(b, dtype=float).ravel()
    c = np.array(c, dtype=float).ravel()
    m, n = A.shape
    if m < 1 or n < 1:
        raise ProblemError("need m >= 1 and n >= 1")
    if b.shape != (m,) or c.shape != (n,):
        raise ProblemError(f"dimension mismatch: A {A.shape}, b {b.shape}, c {c.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
        raise ProblemError("non-finite entry in problem data")

    row_norms = np.linalg.norm(A, axis=1)
    primal_norm = max(float(row_norms.max()), float(np.linalg.norm(b)))
    obj_norm = float(np.linalg.norm(c))
    row_scale = obj_scale = 1.0
    if primal_norm > 1.0 or obj_norm > 1.0:
        if mode == "strict":
            raise ProblemError(
                f"norm violation: max row/b norm {primal_norm:.6g}, |c| {obj_norm:.6g} (must be <= 1)"
            )
        if mode != "rescale":
            raise ProblemError(f"unknown normalization mode {mode!r}")
        row_scale = max(1.0, primal_norm)
        obj_scale = max(1.0, obj_norm)
        A, b, c = A / row_scale, b / row_scale, c / obj_scale
    return LOProblem(A=A, b=b, c=c, nnz_A=int(np.count_nonzero(A)),
                     row_scale=row_scale, obj_scale=obj_scale)


def load_problem(source: str | Path | Mapping, mode: str = "strict") -> LOProblem:
    """Read a problem from a JSON file path, a JSON string, or a mapping.

    Fields: ``m``, ``n``, ``A`` (dense rows or ``{"coo": [[i, j, v], ...]}``),
    ``b``, ``c``.
    """
    if isinstance(source, Mapping):
        doc = source
    else:
        text = source
        if isinstance(source, Path) or not str(source).lstrip().startswith("{"):
            path = Path(source)
            if not path.is_file():
                raise FileNotFoundError(f"problem file not found: {path}")
            text = path.read_text(encoding="utf-8")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ProblemError(f"cannot parse problem: {exc}") from exc
    try:
        b = doc["b"]
        c = doc["c"]
        m = int(doc.get("m", len(b)))
        n = int(doc.get("n", len(c)))
        A = _dense_from_source(doc["A"], m, n)
    except KeyError as exc:
        raise ProblemError(f"missing field {exc}") from exc
    return make_problem(A, b, c, mode=mode)


def problem_to_dict(p: LOProblem) -> dict:
    return {"m": p.m, "n": p.n, "A": p.A.tolist(), "b": p.b.tolist(), "c": p.c.tolist()}


def embed(p: LOProblem) -> SelfDualEmbedding:
    """Build the skew-symmetric self-dual embedding of ``p``.

    The strictly upper triangle is filled and mirrored with a sign flip so
    that ``M.T == -M`` holds bit-for-bit.
    """
    m, n = p.m, p.n
    k = m + n + 1
    nbar = k + 1
    Mbar = np.zeros((k, k))
    Mbar[:m, m:m + n] = p.A
    Mbar[:m, k - 1] = -p.b
    Mbar[m:m + n, k - 1] = p.c
    Mbar = np.triu(Mbar, 1)
    Mbar = Mbar - Mbar.T

    ebar = np.ones(k)
    r = ebar - Mbar @ ebar

    upper = np.zeros((nbar, nbar))
    upper[:k, :k] = np.triu(Mbar, 1)
    upper[:k, k] = r
    M = upper - upper.T

    q = np.zeros(nbar)
    q[-1] = nbar
    index_map = {
        "y": slice(0, m),
        "x": slice(m, m + n),
        "beta": slice(m + n, m + n + 1),
        "vartheta": slice(m + n + 1, m + n + 2),
    }
    return SelfDualEmbedding(M=M, q=q, r=r, problem=p, index_map=index_map)


def slack(emb: SelfDualEmbedding, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != emb.nbar:
        raise ValueError(f"z has length {z.shape[-1]}, embedding has nbar={emb.nbar}")
    return z @ emb.M.T + emb.q


def max_row_norm(emb: SelfDualEmbedding) -> float:
    """Largest Euclidean row norm of M over all rows but the last."""
    return float(np.linalg.norm(emb.M[:-1], axis=1).max())


@dataclass(frozen=True)
class Extraction:
    x: np.ndarray
    y: np.ndarray
    beta: float
    vartheta: float
    duality_gap: float
    primal_residuals: np.ndarray
    dual_residuals: np.ndarray

    def as_dict(self) -> dict:
        return {
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "beta": self.beta,
            "vartheta": self.vartheta,
            "duality_gap": self.duality_gap,
            "max_primal_residual": float(self.primal_residuals.max(initial=0.0)),
            "max_dual_residual": float(self.dual_residuals.max(initial=0.0)),
        }


def extract_solution(emb: SelfDualEmbedding, z, beta_min: float = BETA_MIN) -> Extraction:
    """Recover the primal-dual pair ``(x/beta, y/beta)`` from an embedding point."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("extract_solution needs z >= 0")
    parts = emb.split(z)
    beta = float(parts["beta"][0])
    vartheta = float(parts["vartheta"][0])
    if beta <= beta_min:
        raise NotSolvableError(
            f"beta = {beta:.3e} <= {beta_min:.1e}: no optimal solution with beta > 0 detected"
        )
    p = emb.problem
    x = parts["x"] / beta
    y = parts["y"] / beta
    gap = float(p.c @ x - p.b @ y)
    return Extraction(
        x=x,
        y=y,
        beta=beta,
        vartheta=vartheta,
        duality_gap=gap,
        primal_residuals=np.maximum(0.0, p.b - p.A @ x),
        dual_residuals=np.maximum(0.0, p.A.T @ y - p.c),
    )
