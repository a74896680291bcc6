"""Closed-form time schedules for the adiabatic evolution."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

H_MODES = ("algorithm1", "proposition2")
LOG_BASE_NOTE = "natural log (base e) in h(t), eta and the query formulas"


def _bump(tau: float) -> float:
    if tau <= 0.0 or tau >= 1.0:
        return 0.0
    return math.exp(-1.0 / (tau * (1.0 - tau)))


@lru_cache(maxsize=None)
def _half_integral() -> float:
    val, _ = quad(_bump, 0.0, 0.5, epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def c_e() -> float:
    """Normalization constant: integral of exp(-1/(t(1-t))) over [0, 1]."""
    return 2.0 * _half_integral()


def g(t: float) -> float:
    """Smooth step from 0 to 1 with every derivative vanishing at both ends.

    Evaluated on [0, 1/2] by adaptive quadrature and mirrored through
    ``g(t) = 1 - g(1 - t)``, so the symmetry holds exactly.
    """
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"g(t) is defined on [0, 1], got t={t}")
    if t > 0.5:
        return 1.0 - g(1.0 - t)
    if t == 0.0:
        return 0.0
    if t == 0.5:
        return 0.5
    val, _ = quad(_bump, 0.0, t, epsabs=0.0, epsrel=1e-13, limit=200)
    return val / c_e()


def eta_choice(delta: float, C_adiabatic: float = 1.0) -> float:
    arg = 8.0 * C_adiabatic / delta
    if not 0 < delta or C_adiabatic <= 0 or arg <= 1.0:
        raise ValueError(f"eta undefined: 8C/delta = {arg:.6g} must exceed 1")
    return 1.0 / math.log(arg)


def fourier_truncation(eta_err: float, r: float) -> int:
    """Truncation number n with 2 r^(n/2 + 1) <= eta_err, clamped at 0."""
    if not 0 < r < 0.5:
        raise ValueError("r must lie in (0, 1/2)")
    if not 0 < eta_err < 1:
        raise ValueError("eta_err must lie in (0, 1)")
    n = math.ceil(2.0 * (math.log(4.0 / eta_err) / math.log(1.0 / r) - 1.0))
    return max(0, n)


@dataclass(frozen=True)
class AdiabaticSchedule:
    mu_f: float
    gamma: float
    delta: float
    R1: float
    nbar: int
    C_adiabatic: float = 1.0
    h_mode: str = "algorithm1"
    eta: float | None = None
    m_plus_n: int | None = field(default=None)

    def __post_init__(self):
        for name in ("mu_f", "gamma", "delta"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.R1 <= 0:
            raise ValueError("R1 must be positive")
        if self.h_mode not in H_MODES:
            raise ValueError(f"h_mode must be one of {H_MODES}")
        if self.eta is None:
            object.__setattr__(self, "eta", eta_choice(self.delta, self.C_adiabatic))
        if self.m_plus_n is None:
            object.__setattr__(self, "m_plus_n", self.nbar - 2)

    @property
    def c_e(self) -> float:
        return c_e()

    def g(self, t: float) -> float:
        return g(t)

    def mu(self, t: float) -> float:
        return 1.0 - (1.0 - self.mu_f) * g(t)

    def h_at_mu(self, mu: float) -> float:
        if self.h_mode == "algorithm1":
            denom = 2.0 * self.R1 * (math.sqrt(self.nbar) / 2.0 + 3.0 * math.log(2.0 / self.delta) / 4.0)
            return self.gamma ** 2 * mu ** 2 / denom
        return mu ** 2 / (math.sqrt(2.0 * self.m_plus_n) * self.R1)

    def h(self, t: float) -> float:
        return self.h_at_mu(self.mu(t))

    def theta(self, t: float) -> float:
        return self.h(t) / self.mu(t)

    def header(self) -> dict:
        return {
            "mu_f": self.mu_f,
            "gamma": self.gamma,
            "delta": self.delta,
            "eta": self.eta,
            "C_adiabatic": self.C_adiabatic,
            "R1": self.R1,
            "nbar": self.nbar,
            "c_e": self.c_e,
            "h_mode": self.h_mode,
            "log_base": LOG_BASE_NOTE,
            "h_formula_note": "algorithm1 h(t) used; theta in the complexity proof has a different denominator",
        }


def mu_of_t(t: float, schedule: AdiabaticSchedule) -> float:
    return schedule.mu(t)


def h_of_t(t: float, schedule: AdiabaticSchedule) -> float:
    return schedule.h(t)


def theta(t: float, schedule: AdiabaticSchedule) -> float:
    return schedule.theta(t)


def mu_grid(schedule: AdiabaticSchedule, ts) -> np.ndarray:
    return np.array([schedule.mu(float(t)) for t in ts])
