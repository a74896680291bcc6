"""Periodic grid, wave functions, and the split-step Schroedinger propagator."""
from __future__ import annotations

import csv
import io
import logging
import math
import os
import struct
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np
import scipy.fft as sfft
from scipy.special import erfc

from .central_path import PathTrace, newton_center
from .hamiltonian import HarmonicModel, PotentialField, harmonic_from_point
from .lo_core import SelfDualEmbedding
from .schedule import AdiabaticSchedule

log = logging.getLogger(__name__)

MEMORY_BUDGET = 2 ** 31
STATE_MAGIC = b"QCPMPSI1"
DIAGNOSTIC_COLUMNS = ["t", "mu", "h", "norm", "fidelity_to_harmonic", "energy"]


class GridError(ValueError):
    pass


class ResourceBudgetError(RuntimeError):
    pass


class NormDriftError(RuntimeError):
    pass


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("QCPM_THREADS", "1")))
    except ValueError:
        return 1


def _fftn(a):
    return sfft.fftn(a, workers=_workers())


def _ifftn(a):
    return sfft.ifftn(a, workers=_workers())


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, D]^dims with N nodes per axis at j * D / N."""

    dims: int
    D: float
    N: int

    def __post_init__(self):
        if self.N < 8 or self.N % 2:
            raise GridError(f"N must be even and >= 8, got {self.N}")
        if self.D <= 0:
            raise GridError("D must be positive")

    @property
    def spacing(self) -> float:
        return self.D / self.N

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.dims

    @property
    def size(self) -> int:
        return self.N ** self.dims

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dims

    @property
    def axis(self) -> np.ndarray:
        return np.arange(self.N) * self.spacing

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.spacing)

    def k_squared(self) -> np.ndarray:
        k2 = self.wavenumbers ** 2
        out = np.zeros(self.shape)
        for ax in range(self.dims):
            shape = [1] * self.dims
            shape[ax] = self.N
            out = out + k2.reshape(shape)
        return out

    def points(self) -> np.ndarray:
        """Node coordinates, shape ``(N,)*dims + (dims,)``."""
        mesh = np.meshgrid(*([self.axis] * self.dims), indexing="ij")
        return np.stack(mesh, axis=-1)

    def node(self, flat_index: int) -> np.ndarray:
        idx = np.unravel_index(flat_index, self.shape)
        return np.array(idx, dtype=float) * self.spacing

    def offsets(self, center) -> list[np.ndarray]:
        """Per-axis broadcastable displacements of the nodes from ``center``."""
        out = []
        for ax in range(self.dims):
            shape = [1] * self.dims
            shape[ax] = self.N
            out.append((self.axis - center[ax]).reshape(shape))
        return out

    def as_dict(self) -> dict:
        return {"dims": self.dims, "D": self.D, "N": self.N, "spacing": self.spacing}


@dataclass
class WaveFunction:
    amplitudes: np.ndarray
    grid: Grid

    @property
    def norm(self) -> float:
        return math.sqrt(float(np.vdot(self.amplitudes, self.amplitudes).real) * self.grid.cell_volume)

    def probabilities(self) -> np.ndarray:
        return (np.abs(self.amplitudes) ** 2 * self.grid.cell_volume).ravel()

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.amplitudes / self.norm, self.grid)


def fidelity(psi1: WaveFunction, psi2: WaveFunction) -> float:
    if psi1.amplitudes.shape != psi2.amplitudes.shape:
        raise ValueError("wave functions live on different grids")
    ov = np.vdot(psi1.amplitudes, psi2.amplitudes) * psi1.grid.cell_volume
    return float(min(1.0, abs(ov)))


def _round_up_tenth(x: float) -> float:
    return math.ceil(x * 10.0 - 1e-9) / 10.0


def build_grid(
    emb: SelfDualEmbedding,
    trace: PathTrace,
    schedule: AdiabaticSchedule,
    N: int,
    margin_sigmas: float = 4.0,
    memory_budget: int = MEMORY_BUDGET,
) -> Grid:
    """Size [0, D]^nbar to hold every traced center plus ``margin_sigmas`` harmonic widths."""
    if not trace.points:
        raise GridError("empty trace")
    dims = emb.nbar
    if N < 8 or N % 2:
        raise GridError(f"N must be even and >= 8, got {N}")
    if N ** dims > memory_budget:
        raise ResourceBudgetError(f"grid needs {N}^{dims} = {N ** dims} entries, budget {memory_budget}")
    top = 0.0
    for pt in trace.points:
        if pt.mu < schedule.mu_f * (1 - 1e-12):
            continue
        sig = harmonic_from_point(emb, pt, schedule.h_at_mu(pt.mu)).sigma_max
        if np.any(pt.z - margin_sigmas * sig < 0):
            raise GridError(f"path neighborhood exits [0, D] at mu={pt.mu:.3e}")
        top = max(top, float(pt.z.max() + margin_sigmas * sig))
    return Grid(dims=dims, D=_round_up_tenth(top), N=N)


def gaussian_state(grid: Grid, center, H: np.ndarray, h: float) -> WaveFunction:
    """Normalized discretization of the harmonic ground state at ``center``.

    |psi|^2 is the N(center, (h/2) H^{-1/2}) density.
    """
    lam, Q = np.linalg.eigh(H)
    prec = (Q * np.sqrt(lam)) @ Q.T * (2.0 / h)
    d = grid.offsets(np.asarray(center, dtype=float))
    quad = np.zeros(grid.shape)
    for i in range(grid.dims):
        quad = quad + prec[i, i] * d[i] * d[i]
        for j in range(i + 1, grid.dims):
            quad = quad + 2.0 * prec[i, j] * d[i] * d[j]
    amp = np.exp(-0.25 * quad).astype(complex)
    return WaveFunction(amp, grid).normalized()


def initial_state(grid: Grid, model: HarmonicModel, max_outside: float = 1e-8) -> WaveFunction:
    """Ground state of the mu = 1 harmonic model, checked to fit on the grid."""
    c = model.center.z
    sd = np.sqrt(np.diag(model.covariance))
    lo = 0.5 * erfc(c / (sd * math.sqrt(2)))
    hi = 0.5 * erfc((grid.D - c) / (sd * math.sqrt(2)))
    outside = float(np.sum(lo + hi))
    if outside > max_outside:
        raise GridError(f"Gaussian mass outside the grid is {outside:.2e} > {max_outside:.0e}")
    return gaussian_state(grid, c, model.H, model.h)


def kinetic_half_step(psi: WaveFunction, coeff: float, dt: float) -> WaveFunction:
    phase = np.exp(-1j * coeff * psi.grid.k_squared() * dt / 2.0)
    return WaveFunction(_ifftn(_fftn(psi.amplitudes) * phase), psi.grid)


def propagate(psi: WaveFunction, values: np.ndarray, kinetic: float, potential_coeff: float,
              dt: float, steps: int) -> WaveFunction:
    """Strang steps for  i dPsi/dt = [-kinetic Lap + potential_coeff V] Psi  with frozen coefficients."""
    half = np.exp(-1j * kinetic * psi.grid.k_squared() * dt / 2.0)
    phase = np.exp(-1j * potential_coeff * np.asarray(values) * dt)
    spec = _fftn(psi.amplitudes)
    for _ in range(steps):
        spec *= half
        amps = _ifftn(spec) * phase
        spec = _fftn(amps)
        spec *= half
    return WaveFunction(_ifftn(spec), psi.grid)


class GridPotential(Protocol):
    def __call__(self, mu: float) -> np.ndarray: ...


class LPGridPotential:
    """f_mu on every grid node, re-evaluated per mu from cached moments of F."""

    def __init__(self, field: PotentialField, grid: Grid):
        self.field = field
        self.grid = grid
        self._moments = field.complementarity_moments(grid.points())

    def __call__(self, mu: float) -> np.ndarray:
        return self.field.from_moments(self._moments, mu)


def as_grid_potential(field, grid: Grid) -> GridPotential:
    if isinstance(field, PotentialField):
        return LPGridPotential(field, grid)
    return field


def potential_step(psi: WaveFunction, field, mu: float, scale: float, dt: float) -> WaveFunction:
    values = as_grid_potential(field, psi.grid)(mu)
    return WaveFunction(psi.amplitudes * np.exp(-1j * scale * values * dt), psi.grid)


def energy(psi: WaveFunction, values: np.ndarray, h: float) -> float:
    """<psi| -(h^2/2) Laplacian + V |psi> for normalized psi."""
    g = psi.grid
    spec = _fftn(psi.amplitudes)
    kin = float(np.sum(g.k_squared() * np.abs(spec) ** 2)) / g.size * g.cell_volume
    pot = float(np.sum(values * np.abs(psi.amplitudes) ** 2)) * g.cell_volume
    return 0.5 * h * h * kin + pot


Reference = Callable[[float], "tuple[np.ndarray, np.ndarray]"]


def lp_reference(emb: SelfDualEmbedding, trace: PathTrace | None = None) -> Reference:
    """Center z(mu) and Hessian H(mu), warm-started from the nearest traced point."""

    def ref(mu: float):
        start = trace.at(mu).z if trace is not None and trace.points else np.ones(emb.nbar)
        pt = newton_center(emb, start, mu, tol=1e-12)
        return pt.z, harmonic_from_point(emb, pt, 1.0).H

    return ref


@dataclass
class CheckpointRecord:
    t: float
    mu: float
    h: float
    norm: float
    fidelity_to_harmonic: float
    energy: float

    def row(self) -> list:
        return [repr(float(getattr(self, c))) for c in DIAGNOSTIC_COLUMNS]


@dataclass
class PropagatorRun:
    schedule: AdiabaticSchedule
    grid: Grid
    steps: int
    diagnostics: list[CheckpointRecord] = field(default_factory=list)

    @property
    def dt(self) -> float:
        return 1.0 / self.steps

    def diagnostics_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(DIAGNOSTIC_COLUMNS)
        for rec in self.diagnostics:
            w.writerow(rec.row())
        return buf.getvalue()


def step_budget(
    schedule: AdiabaticSchedule,
    grid: Grid,
    hessian_eigs: Callable[[float], np.ndarray],
    margin_sigmas: float = 4.0,
    samples: int = 65,
    safety: float = 0.02,
) -> int:
    """Number of steps keeping each split phase below ``safety`` radians on the packet.

    Both the potential and the kinetic energy of the harmonic ground state,
    taken ``margin_sigmas`` standard deviations out in position or momentum,
    equal ``margin^2 h sqrt(lambda_max) / 4``; the step is sized against that
    rather than against the grid's highest wavenumber, which the packet never
    reaches.
    """
    dt = 1.0
    for t in np.linspace(0.0, 1.0, samples):
        mu, h = schedule.mu(t), schedule.h(t)
        lam_max = float(np.max(hessian_eigs(mu)))
        support = margin_sigmas ** 2 * h * math.sqrt(lam_max) / 4.0
        dt = min(dt, safety * schedule.eta * mu * h / support)
    return int(math.ceil(1.0 / dt))


def make_run(schedule: AdiabaticSchedule, grid: Grid, steps: int) -> PropagatorRun:
    if steps < 1:
        raise ValueError("steps must be positive")
    return PropagatorRun(schedule=schedule, grid=grid, steps=steps)


def evolve(
    run: PropagatorRun,
    field,
    psi0: WaveFunction,
    reference: Reference | None = None,
    checkpoints: int = 32,
    fidelity_floor: float = 0.0,
    max_drift: float = 1e-6,
) -> WaveFunction:
    """Strang splitting of  i eta dPsi/dt = [-(h/(2 eta mu)) Lap + f_mu / (eta h mu)] Psi.

    Coefficients are frozen at each step midpoint. ``field`` is a
    :class:`PotentialField` or any callable ``mu -> values on grid``.
    """
    sched, grid = run.schedule, run.grid
    pot = as_grid_potential(field, grid)
    k2 = grid.k_squared()
    k2_levels, k2_index = np.unique(k2, return_inverse=True)
    k2_index = k2_index.reshape(k2.shape)
    dt, eta = run.dt, sched.eta
    every = max(1, run.steps // max(1, checkpoints))
    run.diagnostics.clear()

    def record(t: float, amps: np.ndarray) -> None:
        psi = WaveFunction(amps, grid)
        mu, h = sched.mu(t), sched.h(t)
        nrm = psi.norm
        if abs(nrm - 1.0) > max_drift:
            raise NormDriftError(f"norm drifted to {nrm!r} at t={t:.4f}; reduce dt")
        fid = math.nan
        if reference is not None:
            c, H = reference(mu)
            fid = fidelity(psi, gaussian_state(grid, c, H, h))
            if fid < fidelity_floor:
                log.warning("fidelity to harmonic model %.4f below floor %.4f at t=%.4f", fid, fidelity_floor, t)
        run.diagnostics.append(CheckpointRecord(t, mu, h, nrm, fid, energy(psi, pot(mu), h)))

    amps = psi0.amplitudes.astype(complex, copy=True)
    record(0.0, amps)
    spec = _fftn(amps)
    for n in range(run.steps):
        tm = (n + 0.5) * dt
        mu, h = sched.mu(tm), sched.h(tm)
        half = np.exp(-1j * (h / (2.0 * eta * mu)) * k2_levels * dt / 2.0)[k2_index]
        spec *= half
        amps = _ifftn(spec)
        amps *= np.exp(-1j * (1.0 / (eta * h * mu)) * pot(mu) * dt)
        spec = _fftn(amps)
        spec *= half
        if (n + 1) % every == 0 or n + 1 == run.steps:
            amps = _ifftn(spec)
            record((n + 1) * dt, amps)
    final = WaveFunction(_ifftn(spec), grid)
    if abs(final.norm - 1.0) > max_drift:
        raise NormDriftError(f"final norm {final.norm!r}")
    return final


def sample(psi: WaveFunction, seed, size: int | None = None) -> np.ndarray:
    """Draw grid nodes with probability |psi|^2 * cell volume (inverse CDF)."""
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(psi.probabilities())
    u = rng.random(1 if size is None else size) * cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)
    pts = np.stack(np.unravel_index(idx, psi.grid.shape), axis=-1) * psi.grid.spacing
    return pts[0] if size is None else pts


def write_state(psi: WaveFunction, path) -> None:
    g = psi.grid
    header = STATE_MAGIC + struct.pack("<qqd", g.dims, g.N, g.D)
    body = np.ascontiguousarray(psi.amplitudes, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)


def read_state(path) -> WaveFunction:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:8] != STATE_MAGIC:
        raise ValueError("not a QCPM state dump")
    dims, N, D = struct.unpack("<qqd", raw[8:32])
    grid = Grid(dims=dims, D=D, N=N)
    amps = np.frombuffer(raw[32:], dtype="<c16").reshape(grid.shape).copy()
    return WaveFunction(amps, grid)
