"""Classical reference for the central path of the self-dual embedding."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .lo_core import SelfDualEmbedding, slack

DEFAULT_GAMMA = 0.25
FRACTION_TO_BOUNDARY = 0.99
MAX_COND = 1e14


class NewtonError(RuntimeError):
    pass


def complementarity(emb: SelfDualEmbedding, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return z * slack(emb, z)


def jacobian(emb: SelfDualEmbedding, z) -> np.ndarray:
    """J(z) = diag(z) M + diag(s(z))."""
    z = np.asarray(z, dtype=float)
    return z[:, None] * emb.M + np.diag(slack(emb, z))


def hessian_at(emb: SelfDualEmbedding, z) -> np.ndarray:
    J = jacobian(emb, z)
    H = J.T @ J
    return 0.5 * (H + H.T)


def proximity(z, s, mu: float) -> float:
    return float(np.linalg.norm(np.asarray(z) * np.asarray(s) - mu))


def in_neighborhood(z, s, mu: float, gamma: float) -> bool:
    z, s = np.asarray(z), np.asarray(s)
    return bool(np.all(z > 0) and np.all(s > 0) and proximity(z, s, mu) <= gamma * mu)


@dataclass(frozen=True)
class CentralPathPoint:
    z: np.ndarray
    s: np.ndarray
    mu: float
    newton_iters: int = 0

    @property
    def d2(self) -> float:
        return proximity(self.z, self.s, self.mu)


def _roundoff_floor(emb: SelfDualEmbedding, z: np.ndarray) -> float:
    # size of the rounding noise in evaluating F(z) in double precision
    scale = np.abs(z) * (np.abs(emb.M) @ np.abs(z) + np.abs(emb.q))
    return 64.0 * np.finfo(float).eps * float(np.linalg.norm(scale))


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(-v[neg] / dv[neg]))


def newton_center(
    emb: SelfDualEmbedding,
    z0,
    mu_target: float,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> CentralPathPoint:
    """Newton's method on ``z * s(z) = mu e`` with the quadratic term dropped.

    Steps are damped by the fraction-to-boundary rule so that z and s stay
    strictly positive. Convergence is ``|F(z) - mu e| <= tol * mu`` or, when
    that is below double-precision resolution, the rounding floor of F.
    """
    z = np.array(z0, dtype=float)
    if mu_target <= 0:
        raise ValueError("mu_target must be positive")
    s = slack(emb, z)
    if np.any(z <= 0) or np.any(s <= 0):
        raise ValueError("newton_center needs a strictly positive start")
    target = mu_target * np.ones_like(z)
    for it in range(max_iter + 1):
        resid = target - z * s
        res_norm = float(np.linalg.norm(resid))
        if res_norm <= max(tol * mu_target, _roundoff_floor(emb, z)):
            return CentralPathPoint(z=z, s=s, mu=mu_target, newton_iters=it)
        if it == max_iter:
            break
        J = z[:, None] * emb.M + np.diag(s)
        U, sv, Vt = np.linalg.svd(J)
        if sv[-1] == 0 or sv[0] / sv[-1] > MAX_COND:
            raise NewtonError(f"Jacobian numerically singular (cond {sv[0] / max(sv[-1], 1e-300):.2e})")
        dz = Vt.T @ ((U.T @ resid) / sv)
        ds = emb.M @ dz
        alpha = min(1.0, FRACTION_TO_BOUNDARY * min(_max_step(z, dz), _max_step(s, ds)))
        z = z + alpha * dz
        s = slack(emb, z)
    raise NewtonError(
        f"no convergence in {max_iter} iterations at mu={mu_target:.3e} (residual {res_norm:.3e})"
    )


@dataclass
class PathTrace:
    points: list[CentralPathPoint] = field(default_factory=list)
    gamma: float = DEFAULT_GAMMA

    @property
    def mus(self) -> np.ndarray:
        return np.array([p.mu for p in self.points])

    @property
    def continuation_steps(self) -> int:
        return len(self.points) - 1

    @property
    def newton_total(self) -> int:
        return sum(p.newton_iters for p in self.points)

    def at(self, mu: float) -> CentralPathPoint:
        """Point with the traced mu closest to ``mu``."""
        i = int(np.argmin(np.abs(np.log(self.mus) - math.log(mu))))
        return self.points[i]

    def empirical_bounds(self) -> dict[str, float]:
        """Measured l1 / l_inf sizes over every traced z and s."""
        zs = np.array([p.z for p in self.points])
        ss = np.array([p.s for p in self.points])
        r1 = max(np.abs(zs).sum(axis=1).max(), np.abs(ss).sum(axis=1).max())
        rinf = max(np.abs(zs).max(), np.abs(ss).max(), (1 / zs).max(), (1 / ss).max())
        return {"R1": float(r1), "R_inf": float(rinf)}

    def to_csv(self) -> str:
        nbar = len(self.points[0].z) if self.points else 0
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mu"] + [f"z_{i + 1}" for i in range(nbar)]
                   + [f"s_{i + 1}" for i in range(nbar)] + ["d2", "newton_iters"])
        for p in self.points:
            w.writerow([repr(p.mu)] + [repr(float(v)) for v in p.z]
                       + [repr(float(v)) for v in p.s] + [repr(p.d2), p.newton_iters])
        return buf.getvalue()


def default_shrink(nbar: int) -> float:
    return 1.0 - 0.1 / math.sqrt(nbar)


def trace_path(
    emb: SelfDualEmbedding,
    mu_final: float,
    gamma: float = DEFAULT_GAMMA,
    shrink: float | None = None,
    tol: float = 1e-12,
) -> PathTrace:
    """Short-step continuation from (e, e, 1) down to ``mu_final``."""
    if not 0 < mu_final <= 1:
        raise ValueError("mu_final must lie in (0, 1]")
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    shrink = default_shrink(emb.nbar) if shrink is None else shrink
    if not 0 < shrink < 1:
        raise ValueError("shrink must lie in (0, 1)")
    e = np.ones(emb.nbar)
    trace = PathTrace(points=[CentralPathPoint(z=e, s=slack(emb, e), mu=1.0)], gamma=gamma)
    mu = 1.0
    while mu > mu_final:
        mu = max(shrink * mu, mu_final)
        pt = newton_center(emb, trace.points[-1].z, mu, tol=tol)
        if pt.d2 > gamma * mu:
            raise NewtonError(f"centered point left N2(gamma) at mu={mu:.3e}")
        trace.points.append(pt)
    return trace


@dataclass(frozen=True)
class SigmaCheck:
    sigma_min: float
    bound: float
    holds: bool


def point_rinf(point: CentralPathPoint) -> float:
    z, s = point.z, point.s
    return float(max(np.abs(z).max(), np.abs(s).max(), (1 / z).max(), (1 / s).max()))


def sigma_min_check(emb: SelfDualEmbedding, point: CentralPathPoint, R_inf: float) -> SigmaCheck:
    """Compare the smallest singular value of J(z(mu)) with mu / R_inf."""
    needed = point_rinf(point)
    if R_inf < needed * (1 - 1e-12):
        raise ValueError(f"R_inf={R_inf:.6g} is below the observed component bound {needed:.6g}")
    sig = float(np.linalg.svd(jacobian(emb, point.z), compute_uv=False)[-1])
    bound = point.mu / R_inf
    return SigmaCheck(sigma_min=sig, bound=bound, holds=sig >= bound * (1 - 1e-12))
