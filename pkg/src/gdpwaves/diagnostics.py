"""Balance-law terms, decay-rate fitting, and collision measurement.

Everything here is a pure function over immutable snapshots.  Snapshot
arguments are duck-typed (need .t, .u and .grid with .x/.dx/.L), so the
module stays independent of the simulator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InsufficientTail, TrackingLost
from .params import StructuralParams, derive_constants


@dataclass(frozen=True)
class BalanceRecord:
    """Energy and dissipation functionals at one instant.

    E = int u^2 dx + alpha^2 int (eps u_x)^2 dx >= 0;
    D = eps^{-1} (c3 - 2c2) int (eps u_x)^3 dx, the right-hand side of
    the balance law dE/dt = D (identically zero when c3 = 2c2).
    """

    t: float
    E: float
    D: float


@dataclass(frozen=True)
class SnapshotDiagnostics:
    """Per-snapshot trajectory record: conserved/balance quantities plus
    the tracked extrema as (position, value) pairs, tallest first."""

    t: float
    mass: float
    energy: float
    dissipation: float
    peaks: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class CollisionReport:
    """Pre/post measurements for two tracked waves (index 0 = taller).

    velocities come from linear regression of unwrapped peak position
    over each window; amplitudes are window averages; phase_shift is the
    post-window position minus the pre-window free-propagation
    extrapolation, evaluated at the post-window midpoint.
    """

    pre_amplitude: tuple[float, float]
    post_amplitude: tuple[float, float]
    pre_velocity: tuple[float, float]
    post_velocity: tuple[float, float]
    amplitude_change: tuple[float, float]
    velocity_change: tuple[float, float]
    phase_shift: tuple[float, float]
    interaction: tuple[float, float] | None


def balance_terms(state, params: StructuralParams) -> BalanceRecord:
    """Rectangle-rule quadrature of E and D with central-difference u_x."""
    u = state.u
    dx = state.grid.dx
    ux = (np.roll(u, -1) - np.roll(u, 1)) / (2.0 * dx)
    eux = params.epsilon * ux
    E = float(np.sum(u * u + params.alpha**2 * eux * eux) * dx)
    D = float((params.c3 - 2.0 * params.c2) / params.epsilon
              * np.sum(eux**3) * dx)
    return BalanceRecord(t=state.t, E=E, D=D)


# ---------------------------------------------------------------------------
# peak tracking

def find_peaks(x: np.ndarray, u: np.ndarray, n_peaks: int = 2,
               min_frac: float = 0.1, cusp: bool = False):
    """Locate up to n_peaks local maxima with sub-grid refinement.

    Smooth crests get a 3-point quadratic fit; cusp=True instead
    intersects the one-sided linear fits through the flanking segments
    (a quadratic fit is biased at a slope jump).  Returns (position,
    value) pairs sorted by value, tallest first.
    """
    n = len(u)
    dx = x[1] - x[0]
    up = np.roll(u, -1)
    um = np.roll(u, 1)
    floor = min_frac * np.max(u)
    idx = np.flatnonzero((u > um) & (u >= up) & (u > floor))
    if len(idx) == 0:
        return []
    idx = idx[np.argsort(u[idx])[::-1][:n_peaks]]
    peaks = []
    for j in idx:
        u0, ul, ur = u[j], um[j], up[j]
        if cusp:
            jm2, jp2 = (j - 2) % n, (j + 2) % n
            sl = (ul - u[jm2]) / dx  # left-flank slope
            sr = (u[jp2] - ur) / dx
            if sl <= 0 or sr >= 0 or sl == sr:
                peaks.append((x[j], u0))
                continue
            # lines through (x_{j-1}, ul) and (x_{j+1}, ur)
            dxi = (ur - ul - (sl + sr) * dx) / (sl - sr)
            peaks.append((x[j] + dxi, ul + sl * (dxi + dx)))
        else:
            denom = ul - 2.0 * u0 + ur
            if denom >= 0:
                peaks.append((x[j], u0))
                continue
            delta = 0.5 * (ul - ur) / denom
            peaks.append((x[j] + delta * dx,
                          u0 - 0.25 * (ul - ur) * delta))
    peaks.sort(key=lambda p: p[1], reverse=True)
    return peaks


def snapshot_diagnostics(state, params: StructuralParams) -> SnapshotDiagnostics:
    rec = balance_terms(state, params)
    pk = find_peaks(state.grid.x, state.u)
    return SnapshotDiagnostics(t=state.t,
                               mass=float(np.sum(state.u) * state.grid.dx),
                               energy=rec.E, dissipation=rec.D,
                               peaks=tuple(pk))


# ---------------------------------------------------------------------------
# decay-rate fitting

def fit_decay_rate(profile) -> float:
    """Least-squares decay rate of the profile tail.

    Fits the slope of log omega against eta over the final resolved
    decade (omega in [10*floor, floor], floor = max(tail_tol, smallest
    positive sample)).  Requires at least two decades of decay overall.
    """
    eta = profile.eta_grid
    om = profile.omega
    right = eta >= 0
    eta, om = eta[right], om[right]
    pos = om > 0
    eta, om = eta[pos], om[pos]
    floor = max(profile.tail_tol, float(np.min(om)))
    span = np.max(om) / floor
    if span < 100.0:
        raise InsufficientTail(
            f"tail spans only a factor {span:.3g} above {floor:.3g}; "
            "need two decades for a rate fit")
    sel = (om >= floor) & (om <= 10.0 * floor)
    if np.count_nonzero(sel) < 3:
        raise InsufficientTail("fewer than 3 samples in the final decade")
    slope = np.polyfit(eta[sel], np.log(om[sel]), 1)[0]
    return float(-slope)


# ---------------------------------------------------------------------------
# collision measurement

def _track_window(snaps, params, t_lo, t_hi, L):
    """Track the two tallest maxima through one time window.

    Returns (times, positions[2, n], amplitudes[2, n]) with positions
    unwrapped across the periodic seam, index 0 = taller wave.
    """
    times, pos, amp = [], [], []
    for s in snaps:
        if not t_lo <= s.t <= t_hi:
            continue
        pk = find_peaks(s.grid.x, s.u, n_peaks=2)
        if len(pk) < 2:
            raise TrackingLost(
                f"maxima merged at t = {s.t:.6g}, inside a measurement "
                "window declared interaction-free")
        times.append(s.t)
        pos.append([pk[0][0], pk[1][0]])
        amp.append([pk[0][1], pk[1][1]])
    if len(times) < 3:
        raise ConfigError(
            f"window [{t_lo:g}, {t_hi:g}] holds {len(times)} snapshots; "
            "need at least 3 for a velocity regression")
    times = np.array(times)
    pos = np.unwrap(np.array(pos), period=L, axis=0).T
    return times, pos, np.array(amp).T


def measure_collision(traj, windows, interaction_widths: float = 10.0) -> CollisionReport:
    """Measure elasticity of a two-wave interaction.

    windows = ((pre_lo, pre_hi), (post_lo, post_hi)) are time windows
    that must be disjoint from the interaction window, detected as the
    span where peak separation drops below interaction_widths * eps/(r*beta)
    (a few intrinsic half-widths) or the maxima merge entirely.
    """
    params = traj.config.params
    dc = derive_constants(params)
    L = traj.snapshots[0].grid.L
    width = interaction_widths * params.epsilon / (dc.r * dc.beta)
    (pre_lo, pre_hi), (post_lo, post_hi) = windows
    if not (pre_lo < pre_hi <= post_lo < post_hi):
        raise ConfigError("windows must be ordered and non-overlapping")

    # interaction span from the peak-separation time series
    inter_times = []
    for s in traj.snapshots:
        pk = find_peaks(s.grid.x, s.u, n_peaks=2)
        if len(pk) < 2:
            inter_times.append(s.t)
            continue
        gap = abs(pk[0][0] - pk[1][0])
        gap = min(gap, L - gap)
        if gap < width:
            inter_times.append(s.t)
    interaction = None
    if inter_times:
        interaction = (min(inter_times), max(inter_times))
        if interaction[0] <= pre_hi or interaction[1] >= post_lo:
            raise ConfigError(
                f"interaction window {interaction} overlaps a measurement "
                "window; move the windows or lengthen the run")

    t1, p1, a1 = _track_window(traj.snapshots, params, pre_lo, pre_hi, L)
    t2, p2, a2 = _track_window(traj.snapshots, params, post_lo, post_hi, L)

    pre_v = tuple(float(np.polyfit(t1, p1[i], 1)[0]) for i in range(2))
    post_v = tuple(float(np.polyfit(t2, p2[i], 1)[0]) for i in range(2))
    pre_a = tuple(float(np.mean(a1[i])) for i in range(2))
    post_a = tuple(float(np.mean(a2[i])) for i in range(2))

    t_mid = 0.5 * (post_lo + post_hi)
    shifts = []
    for i in range(2):
        free = np.polyval(np.polyfit(t1, p1[i], 1), t_mid)
        measured = np.polyval(np.polyfit(t2, p2[i], 1), t_mid)
        # waves live on a periodic domain: compare modulo L
        d = (measured - free + 0.5 * L) % L - 0.5 * L
        shifts.append(float(d))

    return CollisionReport(
        pre_amplitude=pre_a, post_amplitude=post_a,
        pre_velocity=pre_v, post_velocity=post_v,
        amplitude_change=tuple((post_a[i] - pre_a[i]) / pre_a[i]
                               for i in range(2)),
        velocity_change=tuple((post_v[i] - pre_v[i]) / pre_v[i]
                              for i in range(2)),
        phase_shift=tuple(shifts),
        interaction=interaction)


def collision_report_text(report: CollisionReport) -> str:
    lines = ["collision report (wave 0 = taller)"]
    if report.interaction:
        lines.append(f"  interaction window: t = {report.interaction[0]:.4g}"
                     f" .. {report.interaction[1]:.4g}")
    else:
        lines.append("  no interaction detected")
    for i in range(2):
        lines.append(
            f"  wave {i}: A {report.pre_amplitude[i]:.6g} -> "
            f"{report.post_amplitude[i]:.6g} "
            f"({100 * report.amplitude_change[i]:+.2f}%), "
            f"V {report.pre_velocity[i]:.6g} -> {report.post_velocity[i]:.6g} "
            f"({100 * report.velocity_change[i]:+.2f}%), "
            f"phase shift {report.phase_shift[i]:+.4g}")
    return "\n".join(lines)


def report_to_dict(report: CollisionReport) -> dict:
    return {
        "pre_amplitude": list(report.pre_amplitude),
        "post_amplitude": list(report.post_amplitude),
        "pre_velocity": list(report.pre_velocity),
        "post_velocity": list(report.post_velocity),
        "amplitude_change": list(report.amplitude_change),
        "velocity_change": list(report.velocity_change),
        "phase_shift": list(report.phase_shift),
        "interaction": list(report.interaction) if report.interaction else None,
    }
