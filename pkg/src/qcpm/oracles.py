"""Brute-force reference computations kept independent of the main code paths.

Nothing here calls the propagator, the Newton corrector, or the Gaussian
helpers of the implementation modules; the Laplacian is assembled from an
explicit cosine sum and the LP is solved by enumerating vertices.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.stats import chi2

from .central_path import CentralPathPoint, PathTrace
from .lo_core import LOProblem, SelfDualEmbedding

DENSE_BUDGET = 2 ** 14


# -- dense eigensolver -------------------------------------------------------

def spectral_second_derivative(N: int, D: float) -> np.ndarray:
    """Periodic Fourier-spectral d^2/dx^2 on N equispaced nodes of [0, D)."""
    x = np.arange(N) * (D / N)
    ints = np.arange(N)
    ints = np.where(ints <= N // 2, ints, ints - N)
    k = 2.0 * math.pi * ints / D
    diff = x[:, None] - x[None, :]
    mat = np.zeros((N, N))
    for kk in k:
        mat -= kk * kk * np.cos(kk * diff)
    return mat / N


@dataclass(frozen=True)
class GroundState:
    energy0: float
    energy1: float
    state0: np.ndarray  # continuum-normalized, shape (N,)*dims

    @property
    def gap(self) -> float:
        return self.energy1 - self.energy0


def dense_ground_state(dims: int, N: int, D: float, potential_values: np.ndarray, kinetic_coeff: float) -> GroundState:
    """Two lowest eigenpairs of  kinetic_coeff * (-Laplacian) + V  on a periodic grid."""
    if dims not in (1, 2):
        raise ValueError("dense oracle supports 1 or 2 dimensions")
    if N ** dims > DENSE_BUDGET:
        raise ValueError(f"{N}^{dims} grid points exceed the dense budget {DENSE_BUDGET}")
    T = -kinetic_coeff * spectral_second_derivative(N, D)
    if dims == 2:
        eye = np.eye(N)
        T = np.kron(T, eye) + np.kron(eye, T)
    Hm = T + np.diag(np.asarray(potential_values, dtype=float).ravel())
    w, v = scipy.linalg.eigh(Hm, subset_by_index=[0, 1])
    state = v[:, 0]
    state = state * np.sign(state[np.argmax(np.abs(state))])
    state = state / math.sqrt((D / N) ** dims)
    return GroundState(float(w[0]), float(w[1]), state.reshape((N,) * dims).astype(complex))


def gaussian_amplitude(nodes: np.ndarray, center, hessian: np.ndarray, h: float, cell_volume: float) -> np.ndarray:
    """Harmonic ground state exp(-(x-c)^T sqrt(H) (x-c) / (2h)), normalized on the nodes."""
    lam, Q = np.linalg.eigh(np.atleast_2d(hessian))
    root = Q @ np.diag(np.sqrt(lam)) @ Q.T
    d = nodes - np.asarray(center, dtype=float)
    quad = np.einsum("...i,ij,...j->...", d, root, d)
    amp = np.exp(-quad / (2.0 * h))
    return (amp / math.sqrt(np.sum(amp ** 2) * cell_volume)).astype(complex)


def overlap(a: np.ndarray, b: np.ndarray, cell_volume: float) -> float:
    return float(abs(np.vdot(a, b)) * cell_volume)


# -- synthetic stand-ins for f_mu ---------------------------------------------

@dataclass(frozen=True)
class SyntheticSystem:
    dims: int
    potential: Callable[[np.ndarray, float], np.ndarray]  # points (..., dims), mu -> values
    center: Callable[[float], np.ndarray]
    hessian: Callable[[float], np.ndarray]
    description: str


def synthetic_1d() -> SyntheticSystem:
    """V(z) = (z (0 z + 1) - mu)^2 / 2: the one-dimensional embedding with M = 0, q = 1."""

    def pot(pts, mu):
        z = np.asarray(pts)[..., 0]
        return 0.5 * (z * (0.0 * z + 1.0) - mu) ** 2

    return SyntheticSystem(
        dims=1,
        potential=pot,
        center=lambda mu: np.array([mu]),
        hessian=lambda mu: np.array([[1.0]]),
        description="1-d complementarity potential, M=0, q0=1; z(mu)=mu, Hessian 1",
    )


def synthetic_2d(kappa: float = 0.5) -> SyntheticSystem:
    """V(z) = |z * (K z + e) - mu e|^2 / 2 with K = [[0, kappa], [-kappa, 0]]."""
    K = np.array([[0.0, kappa], [-kappa, 0.0]])
    e = np.ones(2)

    def pot(pts, mu):
        z = np.asarray(pts)
        r = z * (z @ K.T + e) - mu
        return 0.5 * np.sum(r * r, axis=-1)

    def center(mu):
        # z1 (1 + kappa z2) = mu and z2 (1 - kappa z1) = mu; eliminate z2 and bisect on z1
        def resid(z1):
            z2 = mu / (1.0 - kappa * z1)
            return z1 * (1.0 + kappa * z2) - mu

        lo, hi = 0.0, min(mu, 1.0 / kappa - 1e-12)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if resid(lo) * resid(mid) <= 0:
                hi = mid
            else:
                lo = mid
        z1 = 0.5 * (lo + hi)
        return np.array([z1, mu / (1.0 - kappa * z1)])

    def hess(mu):
        z = center(mu)
        s = K @ z + e
        J = np.diag(z) @ K + np.diag(s)
        return J.T @ J

    return SyntheticSystem(2, pot, center, hess,
                           f"2-d skew complementarity potential, kappa={kappa}")


def synthetic_quartic(lam: float = 1.0, quartic: float = 0.5, c0: float = 1.0) -> SyntheticSystem:
    """V(z) = lam (z - c0)^2 / 2 + quartic (z - c0)^4, independent of mu."""

    def pot(pts, mu):
        d = np.asarray(pts)[..., 0] - c0
        return 0.5 * lam * d * d + quartic * d ** 4

    return SyntheticSystem(1, pot, lambda mu: np.array([c0]), lambda mu: np.array([[lam]]),
                           "1-d quartic-plus-quadratic well")


def synthetic_nodes(N: int, D: float, dims: int) -> np.ndarray:
    ax = np.arange(N) * (D / N)
    return np.stack(np.meshgrid(*([ax] * dims), indexing="ij"), axis=-1)


# -- vertex enumeration LP -----------------------------------------------------

@dataclass(frozen=True)
class VertexSolution:
    x_opt: np.ndarray | None
    y_opt: np.ndarray | None
    value: float | None
    status: str
    primal_vertices: list
    dual_vertices: list


def _vertices(G: np.ndarray, h: np.ndarray, tol: float = 1e-10) -> list[np.ndarray]:
    """All basic feasible points of {v : G v >= h}."""
    k, d = G.shape
    out = []
    for rows in itertools.combinations(range(k), d):
        sub = G[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        v = np.linalg.solve(sub, h[list(rows)])
        if np.all(G @ v >= h - tol):
            if not any(np.allclose(v, w, atol=1e-10) for w in out):
                out.append(v)
    return out


def vertex_enumeration_lp(p: LOProblem) -> VertexSolution:
    """Solve min c.x s.t. Ax >= b, x >= 0 and its dual by exhaustive enumeration."""
    m, n = p.m, p.n
    if m > 3 or n > 3:
        raise ValueError("vertex enumeration limited to m, n <= 3")
    prim = _vertices(np.vstack([p.A, np.eye(n)]), np.concatenate([p.b, np.zeros(n)]))
    dual = _vertices(np.vstack([-p.A.T, np.eye(m)]), np.concatenate([-p.c, np.zeros(m)]))
    if not prim:
        return VertexSolution(None, None, None, "infeasible", prim, dual)
    if not dual:
        return VertexSolution(None, None, None, "unbounded", prim, dual)
    x = min(prim, key=lambda v: float(p.c @ v))
    y = max(dual, key=lambda v: float(p.b @ v))
    return VertexSolution(x, y, float(p.c @ x), "optimal", prim, dual)


# -- high precision path tracer ----------------------------------------------

def _center_newton(M: np.ndarray, q: np.ndarray, z: np.ndarray, mu: float, tol: float) -> tuple[np.ndarray, int]:
    for it in range(100):
        s = M @ z + q
        r = mu - z * s
        floor = 256 * np.finfo(float).eps * np.linalg.norm(np.abs(z) * (np.abs(M) @ np.abs(z) + np.abs(q)))
        if np.linalg.norm(r) <= max(tol * mu, floor):
            return z, it
        J = np.diag(z) @ M + np.diag(s)
        dz = np.linalg.solve(J, r)
        ds = M @ dz
        step = 1.0
        for v, dv in ((z, dz), (s, ds)):
            neg = dv < 0
            if np.any(neg):
                step = min(step, 0.9 * float(np.min(-v[neg] / dv[neg])))
        z = z + step * dz
    raise RuntimeError(f"oracle Newton failed at mu={mu:.3e}")


def high_precision_trace(emb: SelfDualEmbedding, mu_final: float, extra_mus=(), shrink: float = 0.99,
                         tol: float = 1e-14) -> PathTrace:
    """Slow continuation (factor 0.99) with a tight Newton tolerance.

    ``extra_mus`` are inserted into the mu sequence so callers can compare
    against another trace at identical parameters.
    """
    M, q = emb.M, emb.q
    mus = [1.0]
    while mus[-1] > mu_final:
        mus.append(max(mus[-1] * shrink, mu_final))
    mus = sorted(set(mus) | {float(u) for u in extra_mus if mu_final <= u <= 1.0}, reverse=True)
    z = np.ones(emb.nbar)
    pts = []
    for mu in mus:
        z, its = _center_newton(M, q, z, mu, tol)
        pts.append(CentralPathPoint(z=z.copy(), s=M @ z + q, mu=mu, newton_iters=its))
    return PathTrace(points=pts)


# -- frozen fixture values ---------------------------------------------------------

def vnorm_closed_form(R1: float, nbar: int, epsilon: float, delta: float, K: float = 1.0, C: float = 1.0) -> float:
    """K gamma^2 / (theta eta) with gamma cancelled by hand: 2 K R1 (sqrt(nbar)/2 + 3 ln(2/delta)/4) ln(8C/delta) / eps."""
    return 2.0 * K * R1 * (math.sqrt(nbar) / 2.0 + 0.75 * math.log(2.0 / delta)) * math.log(8.0 * C / delta) / epsilon


def query_closed_form(R1: float, epsilon: float, nbar: int, delta: float) -> float:
    L = math.log(1.0 / delta)
    return R1 / epsilon * (nbar ** 0.5 + L) * L * math.log(nbar / delta)


def _entry(value, oracle: str, tolerance: float, seed=None) -> dict:
    return {"value": value, "oracle": oracle, "tolerance": tolerance, "seed": seed}


def frozen_values(problems: dict[str, LOProblem], embed_fn) -> dict:
    """Oracle outputs for the fixture problems, with provenance for each entry."""
    out: dict = {}
    for name, p in problems.items():
        sol = vertex_enumeration_lp(p)
        out[f"lp_{name}"] = _entry(
            {"x": sol.x_opt.tolist(), "y": sol.y_opt.tolist(), "value": sol.value, "status": sol.status},
            "vertex_enumeration_lp", 1e-12)
        mus = [0.5, 0.25, 0.1, 0.01]
        tr = high_precision_trace(embed_fn(p), 0.01, extra_mus=mus)
        out[f"path_{name}"] = _entry({repr(mu): tr.at(mu).z.tolist() for mu in mus},
                                     "high_precision_trace", 1e-8)
    out["vnorm_K1_g05_d01_R4_n4_e025"] = _entry(vnorm_closed_form(4.0, 4, 0.25, 0.1), "closed form", 1e-12)
    out["queries_R4_e025_n4_d01"] = _entry(query_closed_form(4.0, 0.25, 4, 0.1), "closed form", 1e-12)
    D, N, h = 8.0, 256, 1e-2
    x = synthetic_nodes(N, D, 1)
    gs = dense_ground_state(1, N, D, 0.5 * (x[..., 0] - D / 2) ** 2, h * h / 2)
    out["harmonic_gap_h1e-2_N256"] = _entry(gs.gap, "dense_ground_state", 1e-9)
    out["chi2_1_sf_5"] = _entry(float(chi2.sf(5.0, 1)), "scipy chi2 survival function", 1e-12)
    return out


def write_fixture(path, values: dict) -> None:
    Path(path).write_text(json.dumps(values, indent=1, sort_keys=True) + "\n")
