"""Central-path potential, its harmonic model, and Gaussian tail checks."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .central_path import CentralPathPoint, hessian_at, jacobian, newton_center
from .lo_core import SelfDualEmbedding, slack


class PotentialField:
    """Zeroth-order oracle for f_mu with a thread-safe evaluation counter.

    Every point at which f_mu is evaluated counts as one query; gradient
    calls are not counted.
    """

    def __init__(self, embedding: SelfDualEmbedding):
        self.embedding = embedding
        self._count = 0
        self._lock = threading.Lock()

    @property
    def queries(self) -> int:
        return self._count

    def _tally(self, k: int) -> None:
        with self._lock:
            self._count += k

    def residual(self, z, mu: float) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return z * slack(self.embedding, z) - mu

    def complementarity_moments(self, z) -> tuple[np.ndarray, np.ndarray]:
        """Return (|F(z)|^2, sum F(z)) so that f_mu = (a - 2 mu b + nbar mu^2) / 2.

        Lets a fixed set of points be re-evaluated for many mu cheaply; each
        later evaluation must still be tallied through :meth:`from_moments`.
        """
        z = np.asarray(z, dtype=float)
        F = z * slack(self.embedding, z)
        return np.einsum("...i,...i->...", F, F), F.sum(axis=-1)

    def from_moments(self, moments, mu: float) -> np.ndarray:
        sq, tot = moments
        self._tally(int(np.size(sq)))
        nbar = self.embedding.nbar
        return np.maximum(0.5 * (sq - 2.0 * mu * tot + nbar * mu * mu), 0.0)


def potential(field: PotentialField, z, mu: float):
    """f_mu(z) = |F(z) - mu e|^2 / 2; accepts a batch of points on the last axis."""
    r = field.residual(z, mu)
    field._tally(int(np.prod(r.shape[:-1], dtype=int)) if r.ndim > 1 else 1)
    val = 0.5 * np.einsum("...i,...i->...", r, r)
    return float(val) if np.ndim(val) == 0 else val


def potential_gradient(field: PotentialField, z, mu: float) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return jacobian(field.embedding, z).T @ field.residual(z, mu)


@dataclass(frozen=True)
class HarmonicModel:
    center: CentralPathPoint
    H: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    h: float

    @property
    def mu(self) -> float:
        return self.center.mu

    @property
    def gap(self) -> float:
        return self.h * math.sqrt(self.eigenvalues[0])

    @property
    def cov_eigenvalues(self) -> np.ndarray:
        return (self.h / 2.0) / np.sqrt(self.eigenvalues)

    @property
    def covariance(self) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * self.cov_eigenvalues) @ Q.T

    @property
    def sigma_max(self) -> float:
        return float(np.sqrt(self.cov_eigenvalues.max()))

    def as_dict(self) -> dict:
        return {
            "mu": self.mu,
            "h": self.h,
            "center": self.center.z.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "gap": self.gap,
        }


def harmonic_from_point(emb: SelfDualEmbedding, point: CentralPathPoint, h: float) -> HarmonicModel:
    if h <= 0:
        raise ValueError("h must be positive")
    H = hessian_at(emb, point.z)
    lam, Q = np.linalg.eigh(H)
    return HarmonicModel(center=point, H=H, eigenvalues=lam, eigenvectors=Q, h=h)


def build_harmonic(emb: SelfDualEmbedding, mu: float, h: float, z0=None) -> HarmonicModel:
    """Harmonic (Gaussian) model of the ground state at the mu-center."""
    if not 0 < mu <= 1:
        raise ValueError("mu must lie in (0, 1]")
    z0 = np.ones(emb.nbar) if z0 is None else np.asarray(z0, dtype=float)
    return harmonic_from_point(emb, _continue_to(emb, z0, mu), h)


def _continue_to(emb: SelfDualEmbedding, z0: np.ndarray, mu: float) -> CentralPathPoint:
    # short-step continuation from z0 (assumed near its own center) to mu
    s0 = slack(emb, z0)
    mu_now = float(np.mean(z0 * s0))
    shrink = 1.0 - 0.1 / math.sqrt(emb.nbar)
    z = z0
    while True:
        mu_now = max(mu_now * shrink, mu) if mu_now > mu else mu
        pt = newton_center(emb, z, mu_now, tol=1e-12)
        z = pt.z
        if mu_now == mu:
            return pt


def gaussian_sample(model: HarmonicModel, seed, size: int | None = None) -> np.ndarray:
    """Draw from N(center, (h/2) H^{-1/2}) through the eigenbasis."""
    rng = np.random.default_rng(seed)
    n = model.center.z.shape[0]
    shape = (n,) if size is None else (size, n)
    xi = rng.standard_normal(shape)
    scaled = xi * np.sqrt(model.cov_eigenvalues)
    return model.center.z + scaled @ model.eigenvectors.T


@dataclass(frozen=True)
class HsuTail:
    threshold: float
    bound: float


def hsu_tail(V_mat, t: float) -> HsuTail:
    """Tail threshold for |Vx|^2 with x isotropic standard normal."""
    if t <= 0:
        raise ValueError("t must be positive")
    V = np.atleast_2d(np.asarray(V_mat, dtype=float))
    Sigma = V.T @ V
    tr = float(np.trace(Sigma))
    tr2 = float(np.trace(Sigma @ Sigma))
    op = float(np.linalg.norm(Sigma, 2)) if Sigma.size else 0.0
    return HsuTail(threshold=tr + 2.0 * math.sqrt(tr2 * t) + 2.0 * op * t, bound=math.exp(-t))


@dataclass(frozen=True)
class TailCheck:
    empirical: float
    target: float
    sigma: float
    holds: bool
    mode: str | None = None


def neighborhood_tail_check(
    emb: SelfDualEmbedding,
    model: HarmonicModel,
    gamma: float,
    delta: float,
    samples: int = 100_000,
    seed=0,
    mode: str | None = None,
) -> TailCheck:
    """Monte Carlo estimate of Pr[f_mu(x) > gamma^2 mu^2 / 2] under the model Gaussian."""
    field = PotentialField(emb)
    x = gaussian_sample(model, seed, size=samples)
    mu = model.mu
    f = potential(field, x, mu)
    empirical = float(np.mean(f > 0.5 * gamma ** 2 * mu ** 2))
    sigma = math.sqrt(delta * (1 - delta) / samples)
    return TailCheck(empirical=empirical, target=delta, sigma=sigma,
                     holds=empirical <= delta + 3 * sigma, mode=mode)
