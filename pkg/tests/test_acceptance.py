"""End-to-end acceptance gate: one verdict per shipped guarantee.

Each test computes its measurements, records a one-line verdict through
the shared `acceptance` fixture (printed as a terminal section after the
run), and then asserts.  The slow full-simulation criteria sit at the
end of the module.
"""

import time

import numpy as np
from scipy.integrate import solve_ivp

from gdpwaves.cli import load_scenario
from gdpwaves.diagnostics import balance_terms, find_peaks, measure_collision
from gdpwaves.params import Regime, StructuralParams, classify_wave, psi
from gdpwaves.pdesim import (Grid, GridState, SimConfig, WaveInit,
                             run_simulation, stable_dt, step)
from gdpwaves.peakon import peakon_amplitude
from gdpwaves.twave import (FPoly, build_profile, eval_F, eval_dF,
                            integrate_profile, profile_residual,
                            sample_physical_wave, solve_g_star_alpha_pos)

EX2 = dict(alpha=2.0, gamma=0.0, c0=1.0, c1=3.0, c2=1.0, c3=5.0, epsilon=0.1)
THETA2 = dict(alpha=1.0, gamma=1.0, c0=1.0, c1=1.0, c2=2.0, c3=2.0)
ALPHA0 = dict(alpha=0.0, gamma=10.0, c0=1.0, c1=1.0, c2=1.0, c3=4.0,
              epsilon=0.1)
CH = dict(alpha=1.0, gamma=0.0, c0=1.0, c1=3.0, c2=1.0, c3=2.0, epsilon=0.1)
CH_C0_ZERO = dict(alpha=1.0, gamma=0.0, c0=0.0, c1=3.0, c2=1.0, c3=2.0)
DP_C0_ZERO = dict(alpha=1.0, gamma=0.0, c0=0.0, c1=4.0, c2=2.0, c3=2.0)

GS_REF = 0.5069063318965373
V_REF = 3.4696818641861990


def test_criterion_01_reference_root(acceptance):
    # alpha=2, gamma=0, c0=c2=1, c1=3, c3=5, A=1.2: boundary value 0.5070
    pars = StructuralParams(**EX2)
    n_rep = 50
    t0 = time.perf_counter()
    for _ in range(n_rep):
        gs, _ = solve_g_star_alpha_pos(pars, 1.2)
    ms = (time.perf_counter() - t0) / n_rep * 1e3
    ok = abs(gs - 0.5070) <= 0.005 and abs(gs / GS_REF - 1.0) <= 1e-9 \
        and ms < 10.0
    acceptance(1, ok, f"g* = {gs:.10f} (0.5070 +/- 0.005), "
                      f"mean solve time {ms:.3f} ms < 10 ms")
    assert abs(gs - 0.5070) <= 0.005
    np.testing.assert_allclose(gs, GS_REF, rtol=1e-9)
    assert ms < 10.0


def test_criterion_02_closed_form_two_thirds_family(acceptance):
    # c3 = 2 c2 gives r = 2/3, where the boundary relation collapses to
    # g*^(2/3) = 1 - c3 A/(gamma_alpha + r c1 alpha^2 A); collect 100
    # admissible random sets and compare against the closed form
    rng = np.random.default_rng(42)
    t0 = time.perf_counter()
    worst = 0.0
    n_admissible = 0
    n_draws = 0
    while n_admissible < 100:
        n_draws += 1
        alpha = rng.uniform(0.3, 3.0)
        gamma = rng.uniform(0.0, 3.0)
        c0 = rng.uniform(0.0, 2.0)
        c1 = rng.uniform(0.3, 3.0)
        c2 = rng.uniform(0.3, 3.0)
        c3 = 2.0 * c2
        A = rng.uniform(0.05, 3.0)
        ga = gamma + alpha * alpha * c0
        if not c3 * A < ga + (2.0 / 3.0) * c1 * alpha * alpha * A:
            continue
        n_admissible += 1
        pars = StructuralParams(alpha=alpha, gamma=gamma, c0=c0, c1=c1,
                                c2=c2, c3=c3)
        gs, _ = solve_g_star_alpha_pos(pars, A)
        closed = 1.0 - c3 * A / (ga + (2.0 / 3.0) * c1 * alpha * alpha * A)
        worst = max(worst, abs(gs ** (2.0 / 3.0) - closed))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 1.0
    acceptance(2, ok, f"100 admissible sets from {n_draws} draws, worst "
                      f"closed-form gap {worst:.1e} <= 1e-8, "
                      f"{elapsed * 1e3:.0f} ms < 1 s")
    assert worst <= 1e-8
    assert elapsed < 1.0


def test_criterion_03_camassa_holm_special_case(acceptance):
    # c2 = c3/2, c1 = 3 c3/(2 alpha^2), gamma = 0:
    # g* = (1 + c3 A/(c0 alpha^2))^(-3/2); at c0 = 0 the root construction
    # breaks down and the classifier must hand back a peakon instead
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        alpha = rng.uniform(0.3, 3.0)
        c0 = rng.uniform(0.1, 2.0)
        c3 = rng.uniform(0.3, 3.0)
        c2 = 0.5 * c3
        c1 = 1.5 * c3 / alpha ** 2
        A = rng.uniform(0.05, 3.0)
        pars = StructuralParams(alpha=alpha, gamma=0.0, c0=c0, c1=c1,
                                c2=c2, c3=c3)
        gs, _ = solve_g_star_alpha_pos(pars, A)
        closed = (1.0 + c3 * A / (c0 * alpha ** 2)) ** -1.5
        worst = max(worst, abs(gs - closed))
    spec = classify_wave(StructuralParams(**CH_C0_ZERO), 0.8)
    peakon_ok = (spec.regime is Regime.PEAKON
                 and spec.arbitrary_amplitude is True)
    ok = worst <= 1e-8 and peakon_ok
    acceptance(3, ok, f"worst |g* - closed form| = {worst:.1e} <= 1e-8 over "
                      f"20 draws; c0 = 0 classifies as peakon with free "
                      f"amplitude")
    assert worst <= 1e-8
    assert spec.regime is Regime.PEAKON
    assert spec.arbitrary_amplitude is True


def test_criterion_04_peakon_algebra(acceptance):
    # amplitude-selection identity c3 A - gamma_alpha = r c1 A alpha^2 and
    # velocity V = c0 + r c1 A across fixed- and free-amplitude families
    worst_sel = 0.0
    worst_vel = 0.0
    for kwargs, A in ((THETA2, None), (DP_C0_ZERO, 0.7),
                      (CH_C0_ZERO, 0.8), (CH_C0_ZERO, 1.7)):
        pars = StructuralParams(**kwargs)
        spec = peakon_amplitude(pars, A)
        r = pars.c3 / (pars.c2 + pars.c3)
        worst_vel = max(worst_vel,
                        abs(spec.V - (pars.c0 + r * pars.c1 * spec.A)))
        ga = pars.gamma + pars.alpha ** 2 * pars.c0
        worst_sel = max(worst_sel, abs((pars.c3 * spec.A - ga)
                                       - r * pars.c1 * spec.A
                                       * pars.alpha ** 2))
    # alpha = 0: the selected amplitude is gamma/c3 with V = c0 + r gamma c1/c3
    p0 = StructuralParams(**ALPHA0)
    s0 = peakon_amplitude(p0)
    r0 = p0.c3 / (p0.c2 + p0.c3)
    gap_a0 = max(abs(s0.A - p0.gamma / p0.c3),
                 abs(s0.V - (p0.c0 + r0 * p0.gamma * p0.c1 / p0.c3)))
    ok = worst_sel <= 1e-12 and worst_vel <= 1e-12 and gap_a0 <= 1e-12
    acceptance(4, ok, f"selection identity gap {worst_sel:.1e}, velocity "
                      f"identity gap {worst_vel:.1e}, alpha=0 forms gap "
                      f"{gap_a0:.1e} (all <= 1e-12)")
    assert worst_sel <= 1e-12
    assert worst_vel <= 1e-12
    assert gap_a0 <= 1e-12


def test_criterion_05_profile_correctness(acceptance):
    # residual of the traveling-wave ODE, agreement with an independent
    # shooting construction, and the exponential tail rate
    pars = StructuralParams(**EX2)
    prof = build_profile(pars, 1.2, n_samples=2001)
    res = profile_residual(prof, pars, 1.2, prof.V)

    gs, q = solve_g_star_alpha_pos(pars, 1.2)
    r = 5.0 / 6.0
    tab = integrate_profile(gs, q, r)

    def rhs(eta, y):
        g = y[0]
        return [y[1], g - (2.0 - q) * g ** (1.0 - r)
                + (1.0 - q) * g ** (1.0 - 2.0 * r)]

    d2 = 0.5 * eval_dF(gs, FPoly(r, q))
    e0 = 1e-3
    sol = solve_ivp(rhs, (e0, 20.0), [gs + 0.5 * d2 * e0 ** 2, d2 * e0],
                    method="DOP853", rtol=1e-13, atol=1e-15,
                    dense_output=True)
    sel = (tab.eta >= e0) & (tab.eta <= 20.0)
    diff = np.max(np.abs(sol.sol(tab.eta[sel])[0] - tab.g[sel]))

    # the measured tail rate of 1 - g is sqrt(q r); the literal sqrt(q)
    # convention misses by sqrt(r) and is kept as a strict xfail in
    # test_twave::test_tail_rate_matches_sqrt_q
    rate_gap = abs(tab.w_rate / np.sqrt(q * r) - 1.0)
    ok = (res <= 1e-6 and sol.success and diff <= 1e-6
          and rate_gap <= 0.01)
    acceptance(5, ok, f"ODE residual {res:.1e} <= 1e-6, quadrature vs "
                      f"shooting {diff:.1e} <= 1e-6, tail rate sqrt(q r) "
                      f"to {rate_gap:.1e} <= 1% (literal sqrt(q) is a "
                      f"strict xfail in test_twave)")
    assert res <= 1e-6
    assert sol.success
    assert diff <= 1e-6
    assert rate_gap <= 0.01


def test_criterion_06_first_integral_identity(acceptance):
    # q = r factorization on 10^3 points, and the structural double zero
    # at g = 1 for 10^3 random (r, q)
    worst_fac = 0.0
    for r in (0.3, 0.5, 2.0 / 3.0, 5.0 / 6.0):
        fp = FPoly(r, r)
        for g in np.linspace(0.01, 1.2, 250):
            worst_fac = max(worst_fac,
                            abs(eval_F(g, fp)
                                - g ** 2 * (g ** -r - 1.0) ** 2))
    rng = np.random.default_rng(3)
    worst_one = 0.0
    for _ in range(1000):
        fp = FPoly(rng.uniform(0.05, 0.95), rng.uniform(0.01, 2.0))
        worst_one = max(worst_one, abs(eval_F(1.0, fp)),
                        abs(eval_dF(1.0, fp)))
    ok = worst_fac <= 1e-12 and worst_one <= 1e-12
    acceptance(6, ok, f"q = r factorization gap {worst_fac:.1e} on 1000 "
                      f"points, F(1)/F'(1) gap {worst_one:.1e} on 1000 "
                      f"random (r, q) (both <= 1e-12)")
    assert worst_fac <= 1e-12
    assert worst_one <= 1e-12


def test_criterion_07_single_soliton_transit(acceptance):
    # one full periodic transit at N = 2048, then self-convergence of the
    # stepper (dt ratio ~ 16) and the spatial operator (dx ratio ~ 4)
    pars = StructuralParams(**EX2)
    t0 = time.perf_counter()
    cfg = SimConfig(params=pars, grid=Grid(L=40.0, N=2048),
                    waves=[WaveInit(A=1.2, x0=10.0)],
                    t_end=40.0 / V_REF, snapshot_stride=2000)
    traj = run_simulation(cfg)
    pos, val = find_peaks(cfg.grid.x, traj.snapshots[-1].u, n_peaks=1)[0]
    delta = (pos - 10.0 + 20.0) % 40.0 - 20.0
    v_rel = delta / 40.0  # velocity error relative to one transit
    a_rel = abs(val / 1.2 - 1.0)

    prof = build_profile(pars, 1.2)
    g512 = Grid(L=40.0, N=512)
    u0 = sample_physical_wave(prof, pars, g512.x - 20.0, 0.0)
    T = 0.2
    dt1 = T / round(T / (0.5 * stable_dt(pars, g512, 8.2, 1.2, 0.9)))

    def advance_dt(dt):
        st = GridState(grid=g512, t=0.0, u=u0.copy())
        for _ in range(int(round(T / dt))):
            st = step(st, pars, dt)
        return st.u

    ua, ub, uc = advance_dt(dt1), advance_dt(dt1 / 2), advance_dt(dt1 / 4)
    ratio_t = (np.sqrt(np.mean((ua - ub) ** 2))
               / np.sqrt(np.mean((ub - uc) ** 2)))

    Tx = 0.1
    dtx = 0.5 * stable_dt(pars, Grid(L=40.0, N=2048), 8.2, 1.2, 0.9)
    dtx = Tx / int(round(Tx / dtx))

    def advance_N(N):
        g = Grid(L=40.0, N=N)
        st = GridState(grid=g, t=0.0,
                       u=sample_physical_wave(prof, pars, g.x - 20.0, 0.0))
        for _ in range(int(round(Tx / dtx))):
            st = step(st, pars, dtx)
        return st.u

    u512, u1024, u2048 = advance_N(512), advance_N(1024), advance_N(2048)
    e1 = np.sqrt(np.mean((u512 - u1024[::2]) ** 2))
    e2 = np.sqrt(np.mean((u1024 - u2048[::2]) ** 2))
    ratio_x = e1 / e2
    elapsed = time.perf_counter() - t0

    ok = (abs(v_rel) <= 0.01 and a_rel <= 0.01 and 12.0 <= ratio_t <= 20.0
          and 3.2 <= ratio_x <= 4.8 and elapsed < 120.0)
    acceptance(7, ok, f"transit velocity error {v_rel:+.3%} and amplitude "
                      f"drift {a_rel:.1e} (both <= 1%); dt ratio "
                      f"{ratio_t:.1f} ~ 16, dx ratio {ratio_x:.1f} ~ 4; "
                      f"{elapsed:.1f} s < 120 s")
    assert abs(v_rel) <= 0.01
    assert a_rel <= 0.01
    assert 12.0 <= ratio_t <= 20.0
    assert 3.2 <= ratio_x <= 4.8
    assert elapsed < 120.0


def test_criterion_08_conservation(acceptance):
    # mass drift over 10^4 steps, energy conservation in the c3 = 2 c2
    # reduction, and the dE/dt = D balance law when c3 != 2 c2
    pars = StructuralParams(**EX2)
    g = Grid(L=40.0, N=256)
    dt0 = stable_dt(pars, g, 1.0 + 2.0 * 3.0 * 1.2, 1.2, 0.9)
    cfg = SimConfig(params=pars, grid=g, waves=[WaveInit(A=1.2, x0=20.0)],
                    t_end=10000 * dt0, snapshot_stride=2000)
    traj = run_simulation(cfg)
    m0 = traj.records[0].mass
    mass_drift = abs(traj.records[-1].mass - m0) / abs(m0)
    steps_ok = traj.n_steps == 10000

    ch = StructuralParams(**CH)
    cfg_ch = SimConfig(params=ch, grid=Grid(L=40.0, N=4096),
                       waves=[WaveInit(A=1.0, x0=20.0)], t_end=40.0 / 3.0,
                       snapshot_stride=2000)
    traj_ch = run_simulation(cfg_ch)
    E0 = traj_ch.records[0].energy
    e_drift = max(abs(rec.energy - E0) for rec in traj_ch.records) / abs(E0)

    pars_b = StructuralParams(**dict(EX2, epsilon=1.0))
    gb = Grid(L=40.0, N=1024)
    u = 0.5 * np.exp(-0.25 * (gb.x - 20.0) ** 2) \
        * (1.0 + 0.6 * np.tanh(0.5 * (gb.x - 20.0)))
    dt = 0.4 * stable_dt(pars_b, gb, 1.0 + 2.0 * 3.0 * 0.8, 0.8, 0.9)
    st = GridState(grid=gb, t=0.0, u=u)
    E, D = [], []
    for _ in range(201):
        rec = balance_terms(st, pars_b)
        E.append(rec.E)
        D.append(rec.D)
        st = step(st, pars_b, dt)
    E, D = np.array(E), np.array(D)
    dEdt = (E[2:] - E[:-2]) / (2.0 * dt)
    D_mid = D[1:-1]
    mask = np.abs(D_mid) >= 0.5 * np.max(np.abs(D_mid))
    worst_bal = np.max(np.abs(dEdt[mask] - D_mid[mask])
                       / np.abs(D_mid[mask]))

    ok = (steps_ok and mass_drift <= 1e-12 and e_drift <= 1e-4
          and mask.sum() >= 50 and worst_bal <= 0.05)
    acceptance(8, ok, f"mass drift {mass_drift:.1e} <= 1e-12 over 10^4 "
                      f"steps; c3 = 2 c2 energy drift {e_drift:.1e} <= "
                      f"1e-4 per transit; dE/dt vs D within "
                      f"{worst_bal:.2%} <= 5%")
    assert steps_ok
    assert mass_drift <= 1e-12
    assert e_drift <= 1e-4
    assert mask.sum() >= 50
    assert worst_bal <= 0.05


def _scenario_config(doc: dict) -> SimConfig:
    s = doc["simulation"]
    kwargs = {}
    for key in ("cfl", "seam_tol", "tail_tol"):
        if key in s:
            kwargs[key] = float(s[key])
    for key in ("snapshot_stride", "n_samples"):
        if key in s:
            kwargs[key] = int(s[key])
    if "smoothing" in s:
        kwargs["smoothing"] = bool(s["smoothing"])
    waves = [WaveInit(A=float(w["A"]), x0=float(w["x0"]),
                      kind=w.get("kind", "auto")) for w in doc["waves"]]
    return SimConfig(params=StructuralParams(**doc["params"]),
                     grid=Grid(L=float(doc["grid"]["L"]),
                               N=int(doc["grid"]["N"])),
                     waves=waves, t_end=float(s["t_end"]), **kwargs)


def test_criterion_09_collision_scenarios(acceptance):
    # both packaged two-wave scenarios run to completion; two waves emerge
    # from the interaction with amplitudes within 5% of the launch values
    details = []
    results = []
    for name in ("fig2", "fig3"):
        doc = load_scenario(name)
        t0 = time.perf_counter()
        traj = run_simulation(_scenario_config(doc))
        elapsed = time.perf_counter() - t0
        m = doc["measure"]
        kwargs = {}
        if "widths" in m:
            kwargs["interaction_widths"] = float(m["widths"])
        rep = measure_collision(
            traj, (tuple(map(float, m["pre"])),
                   tuple(map(float, m["post"]))), **kwargs)
        amps0 = sorted((float(w["A"]) for w in doc["waves"]), reverse=True)
        amp_errs = [abs(rep.post_amplitude[i] / amps0[i] - 1.0)
                    for i in range(2)]
        results.append((name, rep, amp_errs, elapsed))
        details.append(f"{name}: post amplitudes within "
                       f"{max(amp_errs):.2%}, interaction "
                       f"[{rep.interaction[0]:.1f}, "
                       f"{rep.interaction[1]:.1f}], {elapsed:.0f} s")
    ok = all(max(errs) <= 0.05 and rep.interaction is not None
             and rep.post_velocity[0] > rep.post_velocity[1] > 0.0
             and dt_s < 600.0
             for _, rep, errs, dt_s in results)
    acceptance(9, ok, "; ".join(details))
    for name, rep, amp_errs, elapsed in results:
        assert rep.interaction is not None, name
        assert max(amp_errs) <= 0.05, name
        # the taller wave re-emerges still the faster one
        assert rep.post_velocity[0] > rep.post_velocity[1] > 0.0, name
        assert elapsed < 600.0, name


def test_criterion_10_existence_bounds(acceptance):
    # r = 2/3: the jump functional stays below A across the sweep, so the
    # existence inequality holds for every tested amplitude
    pars23 = StructuralParams(alpha=1.0, gamma=2.0, c0=1.0, c1=3.0,
                              c2=1.0, c3=2.0)
    ratios = [psi(pars23, A) / A for A in np.linspace(0.1, 5.0, 21)]
    psi_ok = max(ratios) < 1.0

    # r = 1/2: existence fails at A >= 4 gamma_alpha/(3 c3) = 4/3; the
    # boundary regime is declared within a 1e-9 relative band
    pars12 = StructuralParams(**THETA2)
    bound = 4.0 * 2.0 / (3.0 * 2.0)
    below = classify_wave(pars12, bound * (1.0 - 1e-6)).regime
    at_lo = classify_wave(pars12, bound * (1.0 - 1e-10)).regime
    at_hi = classify_wave(pars12, bound * (1.0 + 1e-10)).regime
    beyond = [classify_wave(pars12, A).regime
              for A in (bound * (1.0 + 1e-8), 2.0, 10.0)]
    bound_ok = (below is Regime.SMOOTH_SOLITON
                and at_lo is Regime.PEAKON and at_hi is Regime.PEAKON
                and all(rg is Regime.NO_WAVE for rg in beyond))
    ok = psi_ok and bound_ok
    acceptance(10, ok, f"Psi(A) < A on the r = 2/3 sweep (max ratio "
                       f"{max(ratios):.4f}); r = 1/2 bound 4/3: soliton "
                       f"below, peakon inside the 1e-9 band, NoWave beyond")
    assert psi_ok
    assert bound_ok
