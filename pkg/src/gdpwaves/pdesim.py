"""Method-of-lines simulator for the divergent form of the equation.

Semidiscrete form on a periodic grid:

    (I - alpha^2 eps^2 Dxx) du/dt = -Dx{ c0 u + c1 u^2 - (c2-c3)(eps ux)^2
                                         + eps^2 Dxx(gamma u - (c3/2) u^2) }

with 2nd-order central Dx/Dxx (the third derivative composed as Dx Dxx),
classical RK4 in time, and a cyclic-tridiagonal Helmholtz inversion.
Keeping a single outer Dx on the pointwise-assembled total flux makes the
discrete mass sum(u)*dx telescope exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConfigError, NonFinite
from .params import Regime, StructuralParams, classify_wave
from .peakon import peakon_amplitude, peakon_profile
from .twave import build_profile, sample_physical_wave

RK4_IMAG_BOUND = 2.0 * np.sqrt(2.0)  # imaginary-axis stability limit


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid: x_j = j*dx, j = 0..N-1, dx = L/N."""

    L: float
    N: int

    def __post_init__(self):
        if not self.L > 0:
            raise ConfigError("domain length L must be positive")
        if self.N < 16 or self.N % 2 != 0:
            raise ConfigError("N must be an even integer >= 16")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N) * self.dx


@dataclass(frozen=True)
class GridState:
    """Field values on a grid at one instant; u must stay finite."""

    grid: Grid
    t: float
    u: np.ndarray

    def require_finite(self):
        if not np.all(np.isfinite(self.u)):
            raise NonFinite(f"non-finite field values at t = {self.t:.6g}")


@dataclass(frozen=True)
class WaveInit:
    """One initial wave: amplitude A centered at x0.

    kind = "auto" classifies (params, A) and samples the resulting smooth
    soliton or peakon; kind = "peakon" forces the closed-form peakon
    (required for the arbitrary-amplitude structural families).
    """

    A: float
    x0: float
    kind: str = "auto"


@dataclass(frozen=True)
class SimConfig:
    params: StructuralParams
    grid: Grid
    waves: tuple[WaveInit, ...]
    t_end: float
    cfl: float = 0.9
    snapshot_stride: int = 100
    seam_tol: float = 1e-8
    tail_tol: float = 1e-10
    n_samples: int = 4001
    smoothing: bool = False  # mild (1,2,1)/4 filter every 25 steps, off by default

    def __post_init__(self):
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if not 0 < self.cfl <= 1:
            raise ConfigError("cfl must lie in (0, 1]")
        if self.snapshot_stride < 1:
            raise ConfigError("snapshot_stride must be >= 1")
        if not 1 <= len(self.waves) <= 2:
            raise ConfigError("initial condition takes one or two waves")


@dataclass(frozen=True)
class Trajectory:
    """Snapshots plus per-snapshot diagnostics at strictly increasing times."""

    config: SimConfig
    dt: float
    n_steps: int
    wave_velocities: tuple[float, ...]
    snapshots: list[GridState] = field(default_factory=list)
    records: list = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])


# ---------------------------------------------------------------------------
# spatial operators

def dx_central(f: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * dx)


def dxx_central(f: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(f, -1) - 2.0 * f + np.roll(f, 1)) / (dx * dx)


# ---------------------------------------------------------------------------
# Helmholtz inversion: (I - alpha^2 eps^2 Dxx) y = rhs

class _HelmholtzFactor:
    """Cyclic tridiagonal factorization via a rank-one (corner) correction.

    A = T + u v^T where T is plain tridiagonal; y = T^{-1}rhs is corrected
    by the precomputed z = T^{-1}u:  y -= z * (v.y)/(1 + v.z).
    """

    def __init__(self, nu_over_dx2: float, n: int):
        k = nu_over_dx2
        b = 1.0 + 2.0 * k
        gamma_corner = -b  # keeps the modified diagonal well conditioned
        ab = np.zeros((3, n))
        ab[0, 1:] = -k
        ab[1, :] = b
        ab[2, :-1] = -k
        ab[1, 0] = b - gamma_corner
        ab[1, -1] = b - k * k / gamma_corner
        self.ab = ab
        u = np.zeros(n)
        u[0] = gamma_corner
        u[-1] = -k
        self.v = np.zeros(n)
        self.v[0] = 1.0
        self.v[-1] = -k / gamma_corner
        self.z = solve_banded((1, 1), ab, u)
        self.denom = 1.0 + self.v @ self.z
        assert abs(self.denom) > 1e-12, "cyclic correction became singular"

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        # check_finite=False: an overflowing field must surface as NonFinite
        # at the end-of-step require_finite (with the partial trajectory
        # attached), not as a scipy ValueError from inside a stage solve
        y = solve_banded((1, 1), self.ab, rhs, check_finite=False)
        return y - self.z * ((self.v @ y) / self.denom)


_factor_cache: dict[tuple[float, float, int], _HelmholtzFactor] = {}


def helmholtz_solve(rhs: np.ndarray, alpha: float, epsilon: float,
                    grid: Grid) -> np.ndarray:
    """Solve (I - alpha^2 eps^2 Dxx) y = rhs on the periodic grid.

    The matrix is strictly diagonally dominant for any alpha^2 eps^2 >= 0,
    so the solve cannot become singular; alpha = 0 reduces to the identity.
    """
    rhs = np.asarray(rhs, dtype=float)
    nu = (alpha * epsilon) ** 2
    if nu == 0.0:
        return rhs.copy()
    key = (nu, grid.dx, grid.N)
    fac = _factor_cache.get(key)
    if fac is None:
        fac = _HelmholtzFactor(nu / grid.dx**2, grid.N)
        _factor_cache[key] = fac
    return fac.solve(rhs)


# ---------------------------------------------------------------------------
# semidiscrete right-hand side

def _rhs_raw(u: np.ndarray, p: StructuralParams, grid: Grid) -> np.ndarray:
    dx = grid.dx
    eps2 = p.epsilon**2
    # overflow during blow-up is handled explicitly: the caller raises
    # NonFinite from the per-step finiteness check, so numpy warnings
    # here are redundant
    with np.errstate(over="ignore", invalid="ignore"):
        ux = dx_central(u, dx)
        flux = p.c0 * u + p.c1 * u * u - (p.c2 - p.c3) * eps2 * ux * ux
        w = p.gamma * u - 0.5 * p.c3 * u * u
        total = flux + eps2 * dxx_central(w, dx)
        return helmholtz_solve(-dx_central(total, dx), p.alpha, p.epsilon,
                               grid)


def semidiscrete_rhs(state: GridState, params: StructuralParams) -> np.ndarray:
    """du/dt of the divergent form; conservative single outer Dx."""
    state.require_finite()
    out = _rhs_raw(state.u, params, state.grid)
    if not np.all(np.isfinite(out)):
        raise NonFinite(f"right-hand side overflowed at t = {state.t:.6g}")
    return out


def step(state: GridState, params: StructuralParams, dt: float) -> GridState:
    """Advance one classical RK4 step."""
    if not dt > 0:
        raise ConfigError("dt must be positive")
    u, g = state.u, state.grid
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = _rhs_raw(u, params, g)
        k2 = _rhs_raw(u + 0.5 * dt * k1, params, g)
        k3 = _rhs_raw(u + 0.5 * dt * k2, params, g)
        k4 = _rhs_raw(u + dt * k3, params, g)
        u_new = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    new_state = GridState(grid=g, t=state.t + dt, u=u_new)
    new_state.require_finite()
    return new_state


# ---------------------------------------------------------------------------
# time-step selection

def stable_dt(params: StructuralParams, grid: Grid, v_max: float,
              u_max: float, cfl: float) -> float:
    """cfl * min(advective dx/v_max, RK4 dispersive bound 2*sqrt(2)/lambda).

    lambda bounds the spectral radius of the linearized semidiscrete
    operator: max over modes of |kappa*a + eps^2*b*kappa*mu/(1+alpha^2
    eps^2 mu)| with kappa = sin(phi)/dx, mu = 4 sin^2(phi/2)/dx^2,
    a = v_max, b = gamma + c3*u_max.  The advective term dominates for
    alpha of order one; the dispersive term governs as alpha -> 0.
    """
    dx = grid.dx
    a = v_max
    b = params.gamma + params.c3 * u_max
    phi = np.linspace(1e-3, np.pi, 2001)
    kappa = np.sin(phi) / dx
    mu = 4.0 * np.sin(0.5 * phi) ** 2 / dx**2
    eps2 = params.epsilon**2
    lam = np.max(np.abs(kappa * a + eps2 * b * kappa * mu
                        / (1.0 + params.alpha**2 * eps2 * mu)))
    return cfl * min(dx / v_max, RK4_IMAG_BOUND / lam)


# ---------------------------------------------------------------------------
# initial condition assembly

def _sample_wave(params: StructuralParams, wave: WaveInit, grid: Grid,
                 tail_tol: float, n_samples: int):
    """Sample one wave centered at x0; returns (values, velocity)."""
    x_rel = grid.x - wave.x0
    if wave.kind == "peakon":
        spec = peakon_amplitude(
            params, A=wave.A if _needs_amplitude(params) else None)
        return peakon_profile(spec, params, x_rel, 0.0), spec.V
    if wave.kind != "auto":
        raise ConfigError(f"unknown wave kind {wave.kind!r}")
    ws = classify_wave(params, wave.A)
    if ws.regime is Regime.PEAKON:
        spec = peakon_amplitude(
            params, A=wave.A if ws.arbitrary_amplitude else None)
        return peakon_profile(spec, params, x_rel, 0.0), spec.V
    if ws.regime is not Regime.SMOOTH_SOLITON:
        raise ConfigError(
            f"amplitude A = {wave.A} admits no solitary wave "
            f"(regime {ws.regime.value})")
    prof = build_profile(params, wave.A, tail_tol=tail_tol,
                         n_samples=n_samples)
    return sample_physical_wave(prof, params, x_rel, 0.0), prof.V


def _needs_amplitude(params: StructuralParams) -> bool:
    r = params.c3 / (params.c2 + params.c3)
    denom = params.c3 - r * params.alpha**2 * params.c1
    ga = params.gamma + params.alpha**2 * params.c0
    return abs(denom) <= 1e-9 * params.c3 and ga == 0.0


def build_initial_condition(config: SimConfig):
    """Superpose the configured waves; enforce seam and overlap tolerances.

    Seam check: each wave's sampled tail at the periodic seam (node 0)
    must sit below seam_tol.  Overlap check: no node may carry more than
    seam_tol from both waves at once (supports must be separated).
    """
    grid, tol = config.grid, config.seam_tol
    fields, velocities = [], []
    for wave in config.waves:
        vals, V = _sample_wave(config.params, wave, grid,
                               config.tail_tol, config.n_samples)
        fields.append(vals)
        velocities.append(V)
    for wave, vals in zip(config.waves, fields):
        seam = abs(vals[0])
        if seam > tol:
            raise ConfigError(
                f"wave at x0 = {wave.x0} has tail {seam:.3g} > {tol:.3g} "
                f"at the domain seam; widen the domain or recenter")
    if len(fields) == 2:
        overlap = np.max(np.minimum(np.abs(fields[0]), np.abs(fields[1])))
        if overlap > tol:
            raise ConfigError(
                f"initial supports overlap at level {overlap:.3g} > "
                f"{tol:.3g}; increase wave separation")
    u0 = np.sum(fields, axis=0)
    return u0, tuple(velocities)


# ---------------------------------------------------------------------------
# driver

def run_simulation(config: SimConfig) -> Trajectory:
    """Integrate to t_end, recording snapshots every snapshot_stride steps.

    On overflow mid-run, raises NonFinite carrying the partial trajectory
    in its .partial attribute for post-mortem dumps.
    """
    from .diagnostics import snapshot_diagnostics

    params, grid = config.params, config.grid
    u0, velocities = build_initial_condition(config)
    u_max = float(np.max(np.abs(u0)))
    v_max = max(max(abs(v) for v in velocities),
                abs(params.c0) + 2.0 * params.c1 * u_max)
    dt = stable_dt(params, grid, v_max, u_max, config.cfl)
    n_steps = int(np.ceil(config.t_end / dt))
    dt = config.t_end / n_steps

    state = GridState(grid=grid, t=0.0, u=u0)
    traj = Trajectory(config=config, dt=dt, n_steps=n_steps,
                      wave_velocities=velocities)
    traj.snapshots.append(state)
    traj.records.append(snapshot_diagnostics(state, params))
    try:
        for i in range(1, n_steps + 1):
            state = step(state, params, dt)
            # i*dt, not accumulated t: keeps snapshot times drift-free
            state = GridState(grid=grid, t=i * dt, u=state.u)
            if config.smoothing and i % 25 == 0:
                u = state.u
                u = 0.25 * (np.roll(u, 1) + 2.0 * u + np.roll(u, -1))
                state = GridState(grid=grid, t=state.t, u=u)
            if i % config.snapshot_stride == 0 or i == n_steps:
                traj.snapshots.append(state)
                traj.records.append(snapshot_diagnostics(state, params))
    except NonFinite as exc:
        raise NonFinite(str(exc), partial=traj) from None
    return traj
