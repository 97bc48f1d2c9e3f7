"""Balance functionals, peak tracking, and collision measurement."""

import numpy as np
import pytest

from gdpwaves.diagnostics import (_track_window, balance_terms, find_peaks,
                                  fit_decay_rate, measure_collision,
                                  report_to_dict)
from gdpwaves.errors import ConfigError, InsufficientTail, TrackingLost
from gdpwaves.params import StructuralParams
from gdpwaves.pdesim import Grid, GridState, SimConfig, Trajectory, WaveInit
from gdpwaves.twave import Profile, build_profile, sample_physical_wave

EX2 = dict(alpha=2.0, gamma=0.0, c0=1.0, c1=3.0, c2=1.0, c3=5.0, epsilon=0.1)


def _skewed_pulse(x):
    return 0.5 * np.exp(-0.25 * (x - 20.0) ** 2) \
        * (1.0 + 0.6 * np.tanh(0.5 * (x - 20.0)))


def test_balance_terms_zero_field():
    g = Grid(L=40.0, N=256)
    rec = balance_terms(GridState(grid=g, t=0.0, u=np.zeros(256)),
                        StructuralParams(**EX2))
    assert rec.E == 0.0
    assert rec.D == 0.0


def test_dissipation_sign_follows_cubic_gradient_integral():
    # D carries the sign of (c3 - 2 c2) * int u_x^3; it vanishes exactly
    # at c3 = 2 c2 and for even pulses
    g = Grid(L=40.0, N=2048)
    u = _skewed_pulse(g.x)
    ux = (np.roll(u, -1) - np.roll(u, 1)) / (2.0 * g.dx)
    cubic = np.sum(ux ** 3) * g.dx
    assert cubic < 0.0
    for c3, sign in ((5.0, -1.0), (1.0, 1.0)):
        pars = StructuralParams(**dict(EX2, c3=c3))
        rec = balance_terms(GridState(grid=g, t=0.0, u=u), pars)
        assert np.sign(rec.D) == sign
        assert rec.E > 0.0
    pars = StructuralParams(**dict(EX2, c3=2.0))
    assert balance_terms(GridState(grid=g, t=0.0, u=u), pars).D == 0.0
    # even pulse on a grid symmetric about its crest
    pars = StructuralParams(**EX2)
    u_even = 0.5 * np.exp(-0.25 * (g.x - 20.0) ** 2)
    assert balance_terms(GridState(grid=g, t=0.0, u=u_even), pars).D == 0.0


def test_energy_additive_for_separated_waves():
    pars = StructuralParams(**EX2)
    g = Grid(L=40.0, N=2048)
    prof1 = build_profile(pars, 1.2)
    prof2 = build_profile(pars, 0.6)
    u1 = sample_physical_wave(prof1, pars, g.x - 10.0, 0.0)
    u2 = sample_physical_wave(prof2, pars, g.x - 30.0, 0.0)
    E1 = balance_terms(GridState(grid=g, t=0.0, u=u1), pars).E
    E2 = balance_terms(GridState(grid=g, t=0.0, u=u2), pars).E
    E12 = balance_terms(GridState(grid=g, t=0.0, u=u1 + u2), pars).E
    assert abs(E12 - (E1 + E2)) / (E1 + E2) <= 1e-10


def test_find_peaks_quadratic_refinement():
    g = np.linspace(0.0, 40.0, 1024, endpoint=False)
    x0 = 20.0 + 0.37 * (g[1] - g[0])  # crest off the grid nodes
    u = 0.9 * np.exp(-((g - x0) / 1.5) ** 2)
    pk = find_peaks(g, u, n_peaks=1)
    assert len(pk) == 1
    assert abs(pk[0][0] - x0) <= 1e-4
    assert abs(pk[0][1] - 0.9) <= 1e-6


def test_find_peaks_cusp_refinement():
    # flank-line intersection handles the cusp; quadratic refinement
    # underestimates the peak there
    g = np.linspace(0.0, 40.0, 1024, endpoint=False)
    x0 = 20.0 + 0.37 * (g[1] - g[0])
    u = 0.7 * np.exp(-np.abs(g - x0) / 0.8)
    pk_cusp = find_peaks(g, u, n_peaks=1, cusp=True)
    pk_quad = find_peaks(g, u, n_peaks=1)
    assert abs(pk_cusp[0][0] - x0) <= 5e-3
    assert abs(pk_cusp[0][1] - 0.7) <= 5e-3
    assert abs(pk_cusp[0][1] - 0.7) < abs(pk_quad[0][1] - 0.7)


def test_find_peaks_ordering_and_min_frac():
    g = np.linspace(0.0, 40.0, 1024, endpoint=False)
    u = (0.9 * np.exp(-((g - 12.0) / 1.5) ** 2)
         + 0.5 * np.exp(-((g - 28.0) / 1.5) ** 2)
         + 0.02 * np.exp(-((g - 35.0) / 0.8) ** 2))
    pk = find_peaks(g, u, n_peaks=3, min_frac=0.1)
    assert len(pk) == 2  # the 2% bump is below min_frac
    assert pk[0][1] > pk[1][1]
    assert abs(pk[0][0] - 12.0) <= 0.01
    assert abs(pk[1][0] - 28.0) <= 0.01
    assert find_peaks(g, np.full_like(g, 0.3), n_peaks=2) == []


def test_fit_decay_rate_exact_exponential():
    eta = np.linspace(-10.0, 10.0, 2001)
    prof = Profile(eta_grid=eta, omega=np.exp(-3.0 * np.abs(eta)), A=1.0,
                   V=1.0, decay_rate=3.0, tail_tol=1e-14, p=0.5, q=0.25,
                   r=0.5, g_star=0.5)
    np.testing.assert_allclose(fit_decay_rate(prof), 3.0, atol=1e-6)


def test_fit_decay_rate_insufficient_tail():
    eta = np.linspace(-10.0, 10.0, 2001)
    # tail spans less than two decades above the floor
    shallow = Profile(eta_grid=eta, omega=np.exp(-0.01 * np.abs(eta)),
                      A=1.0, V=1.0, decay_rate=0.01, tail_tol=1e-14, p=0.5,
                      q=0.25, r=0.5, g_star=0.5)
    with pytest.raises(InsufficientTail):
        fit_decay_rate(shallow)
    # too few samples land in the final decade
    eta_c = np.linspace(-10.0, 10.0, 9)
    coarse = Profile(eta_grid=eta_c, omega=np.exp(-3.0 * np.abs(eta_c)),
                     A=1.0, V=1.0, decay_rate=3.0, tail_tol=1e-14, p=0.5,
                     q=0.25, r=0.5, g_star=0.5)
    with pytest.raises(InsufficientTail):
        fit_decay_rate(coarse)


def _translated_two_wave_trajectory():
    """Exact free propagation of two separated solitons on the torus."""
    pars = StructuralParams(**EX2)
    g = Grid(L=40.0, N=2048)
    prof_tall = build_profile(pars, 1.2)
    prof_short = build_profile(pars, 0.6)
    cfg = SimConfig(params=pars, grid=g,
                    waves=[WaveInit(A=1.2, x0=30.0), WaveInit(A=0.6, x0=10.0)],
                    t_end=4.0)
    times = np.linspace(0.0, 4.0, 81)
    traj = Trajectory(config=cfg, dt=times[1] - times[0], n_steps=80,
                      wave_velocities=(prof_tall.V, prof_short.V))

    def place(prof, x0, t):
        x_rel = (g.x - x0 - prof.V * t + 20.0) % 40.0 - 20.0
        return sample_physical_wave(prof, pars, x_rel, 0.0)

    for t in times:
        u = place(prof_tall, 30.0, t) + place(prof_short, 10.0, t)
        traj.snapshots.append(GridState(grid=g, t=float(t), u=u))
    return traj, prof_tall, prof_short


def test_measure_collision_recovers_free_propagation():
    traj, prof_tall, prof_short = _translated_two_wave_trajectory()
    rep = measure_collision(traj, ((0.0, 1.8), (2.0, 4.0)))
    assert rep.interaction is None
    for i, prof in enumerate((prof_tall, prof_short)):
        assert abs(rep.pre_velocity[i] / prof.V - 1.0) <= 1e-3
        assert abs(rep.post_velocity[i] / prof.V - 1.0) <= 1e-3
        assert abs(rep.amplitude_change[i]) <= 1e-5
        assert abs(rep.phase_shift[i]) <= 1e-4
    np.testing.assert_allclose(rep.pre_amplitude[0], 1.2, rtol=1e-4)
    np.testing.assert_allclose(rep.pre_amplitude[1], 0.6, rtol=1e-4)
    d = report_to_dict(rep)
    assert d["interaction"] is None
    assert len(d["phase_shift"]) == 2


def test_measure_collision_rejects_bad_windows():
    traj, _, _ = _translated_two_wave_trajectory()
    with pytest.raises(ConfigError):
        measure_collision(traj, ((1.8, 0.0), (2.0, 4.0)))
    with pytest.raises(ConfigError):
        measure_collision(traj, ((0.0, 2.5), (2.0, 4.0)))


def test_measure_collision_rejects_interaction_inside_window():
    # waves start closer than the interaction gap: the detected
    # interaction span touches the pre window
    pars = StructuralParams(**EX2)
    g = Grid(L=40.0, N=2048)
    prof_tall = build_profile(pars, 1.2)
    prof_short = build_profile(pars, 0.6)
    cfg = SimConfig(params=pars, grid=g,
                    waves=[WaveInit(A=1.2, x0=11.0), WaveInit(A=0.6, x0=10.0)],
                    t_end=4.0)
    times = np.linspace(0.0, 4.0, 81)
    traj = Trajectory(config=cfg, dt=times[1] - times[0], n_steps=80,
                      wave_velocities=(prof_tall.V, prof_short.V))
    for t in times:
        x1 = (g.x - 11.0 - prof_tall.V * t + 20.0) % 40.0 - 20.0
        x2 = (g.x - 10.0 - prof_short.V * t + 20.0) % 40.0 - 20.0
        u = (sample_physical_wave(prof_tall, pars, x1, 0.0)
             + sample_physical_wave(prof_short, pars, x2, 0.0))
        traj.snapshots.append(GridState(grid=g, t=float(t), u=u))
    with pytest.raises(ConfigError):
        measure_collision(traj, ((0.0, 1.8), (2.0, 4.0)))


def test_track_window_needs_two_maxima():
    pars = StructuralParams(**EX2)
    g = Grid(L=40.0, N=1024)
    prof = build_profile(pars, 1.2)
    snaps = [GridState(grid=g, t=float(t),
                       u=sample_physical_wave(prof, pars, g.x - 20.0, 0.0))
             for t in np.linspace(0.0, 1.0, 11)]
    with pytest.raises(TrackingLost):
        _track_window(snaps, pars, 0.0, 1.0, 40.0)
    # and at least three snapshots must fall inside the window
    prof2 = build_profile(pars, 0.6)
    two = [GridState(grid=g, t=float(t),
                     u=(sample_physical_wave(prof, pars, g.x - 10.0, 0.0)
                        + sample_physical_wave(prof2, pars, g.x - 30.0, 0.0)))
           for t in (0.0, 0.5)]
    with pytest.raises(ConfigError):
        _track_window(two, pars, 0.0, 1.0, 40.0)
