"""Traveling-wave machinery: the first integral F(g,q), the self-consistency
solvers for the boundary value g* and decay parameter q*, profile
construction by quadrature, and the end-to-end profile residual.

The reduction chain: u = A*omega(beta(x-Vt)/eps) turns the PDE into a
second-order profile ODE; the substitution W = p*omega, W = 1 - g^r
eliminates first derivatives, leaving g'' = g - (2-q) g^{1-r} + (1-q) g^{1-2r}
with first integral (dg/deta)^2 = F(g,q).  The soliton is the connecting
orbit from g = g* (the wave crest, omega=1) to the saddle g = 1
(the vanishing tail), so eta(g) = integral of 1/sqrt(F) and the profile
is recovered by inverting that quadrature.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import (DegenerateParameters, DomainError, InvalidAmplitude,
                     NoRoot, QuadratureFailure, SingularityError)
from .params import StructuralParams, derive_constants

# direct evaluation of F loses all significant digits for 1-g below ~1e-5
# (O(1) terms cancel down to ~q*r*(1-g)^2); switch to the Taylor series in
# w = 1-g below this threshold
_F_SERIES_SWITCH = 1e-3
_F_SERIES_ORDER = 14


@dataclass(frozen=True)
class FPoly:
    """First integral F(g,q) = g^2 - 2(2-q)/(2-r) g^{2-r}
    + (1-q)/(1-r) g^{2-2r} - C with C = r(r-q)/((1-r)(2-r)).

    F(1,q) = 0 and dF/dg(1,q) = 0 for every q; the only other critical
    point sits at g = (1-q)^r when q < 1.
    """

    r: float
    q: float
    C: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise ValueError("r must lie in (0,1)")
        c = self.r * (self.r - self.q) / ((1.0 - self.r) * (2.0 - self.r))
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "_tail_coeffs",
                           _f_series_coeffs(self.q, self.r))


def _f_series_coeffs(q: float, r: float, order: int = _F_SERIES_ORDER) -> np.ndarray:
    """Coefficients a_k of F(1-w,q) = sum_{k>=2} a_k w^k.

    a_k = F^{(k)}(1) (-1)^k / k! with
    F^{(k)}(1) = 2*[k=2] - 2(2-q)(1-r) P_k(-r) + 2(1-q)(1-2r) P_k(-2r),
    P_k(x) = x(x-1)...(x-k+3) the descending product of k-2 factors.
    """
    a = np.zeros(order + 1)
    prod_r, prod_2r = 1.0, 1.0
    fact = 2.0
    for k in range(2, order + 1):
        if k > 2:
            prod_r *= -r - (k - 3)
            prod_2r *= -2.0 * r - (k - 3)
            fact *= k
        deriv = ((2.0 if k == 2 else 0.0)
                 - 2.0 * (2.0 - q) * (1.0 - r) * prod_r
                 + 2.0 * (1.0 - q) * (1.0 - 2.0 * r) * prod_2r)
        a[k] = deriv * (-1.0) ** k / fact
    return a


def _eval_f_direct(g, q: float, r: float):
    c = r * (r - q) / ((1.0 - r) * (2.0 - r))
    return (g**2
            - 2.0 * (2.0 - q) / (2.0 - r) * g**(2.0 - r)
            + (1.0 - q) / (1.0 - r) * g**(2.0 - 2.0 * r)
            - c)


def _eval_f_series(w, coeffs: np.ndarray):
    # Horner in w, lowest power w^2
    acc = np.zeros_like(w)
    for k in range(len(coeffs) - 1, 2, -1):
        acc = (acc + coeffs[k]) * w
    return (acc + coeffs[2]) * w * w


def eval_F(g, fpoly: FPoly):
    """Evaluate the first integral F(g,q) for g in (0,1]; vectorized.

    Near g=1 the direct formula cancels catastrophically, so a Taylor
    continuation in w = 1-g takes over below w = 1e-3.

    Raises DomainError for any g <= 0 (negative powers of g appear).
    """
    garr = np.asarray(g, dtype=float)
    if np.any(garr <= 0.0):
        raise DomainError("eval_F requires g > 0")
    w = 1.0 - garr
    near = (w >= 0.0) & (w < _F_SERIES_SWITCH)
    out = np.empty_like(garr)
    far = ~near
    if np.any(far):
        out[far] = _eval_f_direct(garr[far], fpoly.q, fpoly.r)
    if np.any(near):
        out[near] = _eval_f_series(w[near], fpoly._tail_coeffs)
    if np.ndim(g) == 0:
        return float(out)
    return out


def eval_dF(g, fpoly: FPoly):
    """dF/dg = 2g - 2(2-q) g^{1-r} + 2(1-q) g^{1-2r}; vectorized, g > 0."""
    garr = np.asarray(g, dtype=float)
    if np.any(garr <= 0.0):
        raise DomainError("eval_dF requires g > 0")
    q, r = fpoly.q, fpoly.r
    out = (2.0 * garr - 2.0 * (2.0 - q) * garr**(1.0 - r)
           + 2.0 * (1.0 - q) * garr**(1.0 - 2.0 * r))
    if np.ndim(g) == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# self-consistency solvers


def _one_minus_pow(g, r: float):
    """1 - g^r for g in [0,1], without the cancellation that kills the
    direct form when g is close to 1 (returns ~r*(1-g) exactly there)."""
    g = np.asarray(g, dtype=float)
    with np.errstate(divide="ignore"):
        val = -np.expm1(r * np.log(g))
    val = np.where(g == 0.0, 1.0, val)
    if val.ndim == 0:
        return float(val)
    return val


@dataclass(frozen=True)
class SelfConsistencyPoly:
    """The coupled root equation for alpha > 0 in the unknown g = g*:

        P(g) = rho1 g^2 - rho2 g^{2-r} + rho3 g^{2-2r} + rho4 g^r - C1,

    obtained from F(g, q(g)) = 0 with q(g) = theta - xi (1 - g^r);
    identically P(g) = (1-r)(2-r) F(g, q(g)).  A root in [0,1) exists
    iff C1 >= 0; C1 = 0 is the peakon boundary.
    """

    r: float
    theta: float
    xi: float
    rho1: float = None  # type: ignore[assignment]
    rho2: float = None  # type: ignore[assignment]
    rho3: float = None  # type: ignore[assignment]
    rho4: float = None  # type: ignore[assignment]
    C1: float = None  # type: ignore[assignment]

    def __post_init__(self):
        r, theta, xi = self.r, self.theta, self.xi
        object.__setattr__(self, "rho1", (1 - r) * (2 - r + 2 * xi))
        object.__setattr__(self, "rho2", 2 * (1 - r) * (2 - theta) + (4 - 3 * r) * xi)
        object.__setattr__(self, "rho3", (2 - r) * (1 - theta + xi))
        object.__setattr__(self, "rho4", r * xi)
        object.__setattr__(self, "C1", r * (r - theta + xi))

    def __call__(self, g):
        g = np.asarray(g, dtype=float)
        r = self.r
        val = (self.rho1 * g**2 - self.rho2 * g**(2 - r)
               + self.rho3 * g**(2 - 2 * r) + self.rho4 * g**r - self.C1)
        if val.ndim == 0:
            return float(val)
        return val

    def derivative(self, g):
        g = np.asarray(g, dtype=float)
        r = self.r
        val = (2 * self.rho1 * g - (2 - r) * self.rho2 * g**(1 - r)
               + (2 - 2 * r) * self.rho3 * g**(1 - 2 * r)
               + r * self.rho4 * g**(r - 1))
        if val.ndim == 0:
            return float(val)
        return val

    def q_of(self, g):
        """q(g) = theta - xi (1 - g^r), with 1-g^r formed via expm1 so the
        value keeps relative accuracy for roots close to g=1."""
        val = self.theta - self.xi * np.asarray(_one_minus_pow(g, self.r))
        if val.ndim == 0:
            return float(val)
        return val


def _refine_root(poly: SelfConsistencyPoly, lo: float, hi: float) -> float:
    # safeguarded bracketing refinement, then Newton polish to |P| <= 1e-13
    root = brentq(poly, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=200)
    for _ in range(6):
        val = poly(root)
        if abs(val) <= 1e-13:
            break
        slope = poly.derivative(root)
        if slope == 0.0:
            break
        root = min(max(root - val / slope, lo), hi)
    return root


# boundary of the near-g=1 scan: w = 1-g below this is handled in variables
# that avoid the structural double zero of P at g=1
_P_SERIES_SWITCH = 0.05


def _f_at_w(w: float, q: float, r: float) -> float:
    # F(1-w, q) from the exact w (no 1-g rounding); series below the switch
    if w < _F_SERIES_SWITCH:
        coeffs = _f_series_coeffs(q, r)
        acc = 0.0
        for k in range(len(coeffs) - 1, 2, -1):
            acc = (acc + coeffs[k]) * w
        return (acc + coeffs[2]) * w * w
    return float(_eval_f_direct(1.0 - w, q, r))


def _w_of_q(q: float, theta: float, xi: float, r: float) -> float:
    # invert q = theta - xi*(1 - g^r) for w = 1-g, exactly in w
    s = (theta - q) / xi
    return -math.expm1(math.log1p(-s) / r)


def _near_zero_roots(poly: SelfConsistencyPoly) -> list[tuple[float, float]]:
    """Roots below the main linear grid (g* -> 0 at the peakon boundary).

    Just inside the C1 = 0 boundary the root collapses like
    (C1/rho4)^(1/r), which outruns any linear grid; a log scan with
    relative-tolerance refinement keeps p = 1 - g*^r accurate there.
    """
    out = []
    ggrid = np.logspace(-290.0, -12.0, 240)
    vals = poly(ggrid)
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    for i in flips:
        root = brentq(poly, ggrid[i], ggrid[i + 1],
                      xtol=1e-300, rtol=8.9e-16, maxiter=200)
        out.append((root, poly.q_of(root)))
    return out


def _near_one_roots(poly: SelfConsistencyPoly) -> list[tuple[float, float]]:
    """Roots of the self-consistency equation with w = 1-g below the switch.

    Direct evaluation of P there is cancellation noise (structural double
    zero at g=1, coefficients of size xi), so the equation is scanned in q:
    q maps to w = 1-g at full relative precision through expm1/log1p, and
    Phi(q) = F(w(q), q) is evaluated by the O(1)-coefficient tail series
    of F.  Returns (g, q) pairs; q is exact-scan accurate, g carries the
    unavoidable 1-w rounding.

    For xi = 0, q = theta is fixed and the same tail series is scanned
    in w directly.
    """
    r, theta, xi = poly.r, poly.theta, poly.xi
    out = []
    if xi == 0.0:
        coeffs = _f_series_coeffs(theta, r)

        def reduced(w):
            acc = 0.0
            for k in range(len(coeffs) - 1, 2, -1):
                acc = (acc + coeffs[k]) * w
            return acc + coeffs[2]

        wgrid = np.logspace(-14, math.log10(_P_SERIES_SWITCH), 257)
        vals = np.array([reduced(w) for w in wgrid])
        flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        for i in flips:
            w_root = brentq(reduced, wgrid[i], wgrid[i + 1],
                            xtol=1e-300, rtol=8.9e-16, maxiter=200)
            out.append((1.0 - w_root, theta))
        return out

    # q-window of roots with w <= switch: p = (theta-q)/xi <= 1-(1-switch)^r
    p_switch = _one_minus_pow(1.0 - _P_SERIES_SWITCH, r)
    q_lo = max(theta * 1e-18, theta - xi * p_switch)
    q_hi = theta * (1.0 - 1e-13)
    if not q_lo < q_hi:
        return out

    def phi(q):
        return _f_at_w(_w_of_q(q, theta, xi, r), q, r)

    qgrid = np.logspace(math.log10(q_lo), math.log10(q_hi), 257)
    vals = np.array([phi(q) for q in qgrid])
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    for i in flips:
        q_root = brentq(phi, qgrid[i], qgrid[i + 1],
                        xtol=1e-300, rtol=8.9e-16, maxiter=200)
        out.append((1.0 - _w_of_q(q_root, theta, xi, r), q_root))
    return out


def _orbit_is_valid(fpoly: FPoly, g_star: float) -> bool:
    """The connecting orbit needs F(., q) > 0 strictly between g* and 1.

    Sampling runs in w = 1-g so roots arbitrarily close to g=1 are probed
    on their own scale.  Both endpoints are zeros of F by construction, so
    the test keeps an interior margin and a relative floor: a disconnected
    orbit shows up as a macroscopic interior dip, not a roundoff graze.
    """
    w_star = 1.0 - g_star
    if w_star <= 0.0:
        return False
    frac = np.linspace(1e-3, 1.0 - 1e-3, 512)
    fvals = eval_F(1.0 - w_star * frac, fpoly)
    fmax = fvals.max()
    return fmax > 0.0 and bool(np.all(fvals > -1e-9 * fmax))


def solve_g_star_alpha_pos(params: StructuralParams, A: float,
                           boundary_rtol: float = 1e-9) -> tuple[float, float]:
    """Solve the coupled self-consistency equation for alpha > 0.

    Returns (g_star, q) with g_star in [0,1).  g_star = 0.0 exactly when
    C1 = 0 within tolerance (the peakon boundary).  Root-finding: sign
    scan of P on 4096 points of (0, 0.95], plus a q-parametrized scan of
    F(g(q), q) for the weak-amplitude roots that approach g=1, where
    direct evaluation of P drowns in cancellation noise from its
    structural double zero.  Brackets are refined by Brent plus a Newton
    polish.  For roots from the near-1 scan the returned q is the more
    accurate of the pair; g_star carries the 1-w rounding of doubles.

    Raises NoRoot when C1 < 0 or no admissible sign change exists.
    """
    if params.alpha <= 0:
        raise ValueError("solve_g_star_alpha_pos requires alpha > 0")
    if A <= 0:
        raise ValueError("amplitude A must be positive")
    dc = derive_constants(params)
    r, theta = dc.r, dc.theta
    xi = dc.gamma_alpha / (params.alpha**2 * params.c1 * A)
    poly = SelfConsistencyPoly(r=r, theta=theta, xi=xi)

    c1_scale = r * (r + theta + xi)
    if poly.C1 < -boundary_rtol * c1_scale:
        raise NoRoot(f"C1 = {poly.C1:.6g} < 0: no root in [0,1)")
    if abs(poly.C1) <= boundary_rtol * c1_scale:
        return 0.0, theta - xi  # q at g=0; equals r at the exact boundary

    candidates = []
    # main scan on (0, 1 - switch]; P is cancellation-safe this far from g=1
    gs = np.linspace(1e-12, 1.0 - _P_SERIES_SWITCH, 4096)
    vals = poly(gs)
    sign_flip = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    for i in sign_flip:
        root = _refine_root(poly, gs[i], gs[i + 1])
        candidates.append((root, poly.q_of(root)))
    # log scans for the two collapse regimes the linear grid cannot see:
    # g* -> 0 just inside the peakon boundary, g* -> 1 at weak amplitude
    candidates.extend(_near_zero_roots(poly))
    candidates.extend(_near_one_roots(poly))

    if not candidates:
        raise NoRoot("no sign change of the self-consistency polynomial in (0,1)")

    candidates.sort()
    # merge near-duplicates (a root at the scan seam can be found twice)
    deduped = [candidates[0]]
    for g, qg in candidates[1:]:
        if g - deduped[-1][0] > 1e-9 * max(1.0 - deduped[-1][0], 1e-12):
            deduped.append((g, qg))
    admissible = []
    for g, qg in deduped:
        if qg > 0 and not _orbit_is_valid(FPoly(r=r, q=qg), g):
            continue
        admissible.append((g, qg))
    if not admissible:
        raise NoRoot("roots found but none carries a valid connecting orbit")

    positive = [(g, qg) for g, qg in admissible if qg > 0]
    if positive:
        if len(positive) > 1:
            warnings.warn(
                f"multiple admissible roots {[round(g, 6) for g, _ in positive]}; "
                "returning the smallest (continuous with the closed-form "
                "families)", UserWarning)
        return positive[0]
    # no q>0 root: return the one closest to the algebraic-decay boundary
    g, qg = max(admissible, key=lambda t: t[1])
    return g, qg


def _q_star_series(p: float, r: float) -> float:
    # q* = r * S3/S2 where S_j = sum_{k>=j} binom(m,k)(-p)^k, m = 2-2/r;
    # exact cancellation of the k<2 (k<3) parts of the binomial series of
    # (1-p)^m makes this form immune to the catastrophic cancellation that
    # kills the closed form for small p
    m = 2.0 - 2.0 / r
    term = 1.0
    s2 = 0.0
    s3 = 0.0
    for k in range(1, 600):
        term *= (m - k + 1) / k * (-p)
        if k >= 2:
            s2 += term
        if k >= 3:
            s3 += term
        if k > 4 and abs(term) < 1e-18 * max(abs(s2), 1e-300):
            break
    return r * s3 / s2


def _q_star_closed(p: float, r: float) -> float:
    # q* = (1-r) Fcal / Gcal with the closed forms in g*^{2(r-1)} = (1-p)^{2-2/r}
    gpow = (1.0 - p) ** (2.0 * (r - 1.0) / r)
    gcal = 1.0 + 2.0 * p * (1.0 - r) / r - gpow
    fcal = (r / (1.0 - r) + 2.0 * p + p * p * (2.0 - r) / r
            - (r / (1.0 - r)) * gpow)
    return (1.0 - r) * fcal / gcal


def solve_q_star_alpha_zero(params: StructuralParams, A: float) -> tuple[float, float]:
    """Solve for the decay parameter q* in the alpha = 0 case.

    Requires p = c3*A/gamma < 1; returns (q_star, g_star) with
    g_star = (1-p)^{1/r}.  The closed ratio of the two tail-matching
    functionals is used for p >= 0.5; below that a binomial-series form
    evaluates the same ratio without catastrophic cancellation (both
    functionals vanish jointly as p -> 0, with q* ~ (2/3) p).

    Raises InvalidAmplitude when p >= 1.
    """
    if params.alpha != 0:
        raise ValueError("solve_q_star_alpha_zero requires alpha = 0")
    if params.gamma <= 0:
        raise DegenerateParameters("alpha=0 requires gamma>0")
    if A <= 0:
        raise ValueError("amplitude A must be positive")
    dc = derive_constants(params)
    r = dc.r
    p = params.c3 * A / params.gamma
    if p >= 1.0:
        raise InvalidAmplitude(
            f"p = c3*A/gamma = {p:.6g} >= 1: amplitude at or beyond the "
            "peakon boundary")
    g_star = (1.0 - p) ** (1.0 / r)
    q_star = _q_star_series(p, r) if p < 0.5 else _q_star_closed(p, r)
    if not (math.isfinite(q_star) and q_star > 0):
        raise NoRoot(f"q* evaluation failed: q*={q_star!r} for p={p:.6g}")
    return q_star, g_star


def wave_velocity(params: StructuralParams, A: float,
                  g_star: float | None = None,
                  q_star: float | None = None) -> float:
    """Soliton phase velocity.

    alpha > 0: V = (c3*A/(1 - g*^r) - gamma)/alpha^2 (pass g_star);
    alpha = 0: V = c0 + q* gamma c1/c3 (pass q_star).

    Raises DegenerateParameters if g_star = 1 (division by zero).
    """
    dc = derive_constants(params)
    if params.alpha > 0:
        if g_star is None:
            raise ValueError("alpha > 0 velocity needs g_star")
        if g_star >= 1.0:
            raise DegenerateParameters("g_star = 1 gives an undefined velocity")
        p = _one_minus_pow(g_star, dc.r)
        return (params.c3 * A / p - params.gamma) / params.alpha**2
    if q_star is None:
        raise ValueError("alpha = 0 velocity needs q_star")
    return params.c0 + q_star * params.gamma * params.c1 / params.c3


def fscan_table(params: StructuralParams, A: float,
                n_points: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """Tabulate F(g, q(g)) on [0, 1] for plotting the root structure.

    For alpha > 0, q varies with g through the self-consistency coupling;
    for alpha = 0, q = q* is the solved constant.  The integration
    constant C(q) moves with q, so this is the curve whose zero is g*.
    """
    if A <= 0:
        raise ValueError("amplitude A must be positive")
    dc = derive_constants(params)
    r = dc.r
    g = np.linspace(0.0, 1.0, n_points)
    if params.alpha > 0:
        xi = dc.gamma_alpha / (params.alpha**2 * params.c1 * A)
        q = SelfConsistencyPoly(r=r, theta=dc.theta, xi=xi).q_of(g)
    else:
        q_star, _ = solve_q_star_alpha_zero(params, A)
        q = np.full_like(g, q_star)
    C = r * (r - q) / ((1.0 - r) * (2.0 - r))
    F = (g**2 - 2.0 * (2.0 - q) / (2.0 - r) * g**(2.0 - r)
         + (1.0 - q) / (1.0 - r) * g**(2.0 - 2.0 * r) - C)
    return g, F


# ---------------------------------------------------------------------------
# profile construction


@dataclass(frozen=True)
class GProfile:
    """Half-line profile in the g-representation: monotone g(eta) on a
    uniform eta-grid, g(0) = g*, truncated where 1-g = tail_tol."""

    eta: np.ndarray
    g: np.ndarray
    g_star: float
    q: float
    r: float
    tail_tol: float
    w_rate: float  # fitted exponential rate of 1-g over the last decade


@dataclass(frozen=True)
class Profile:
    """Sampled soliton shape omega(eta) on a symmetric eta-grid.

    omega(0) = 1 exactly; omega is even and strictly decreasing on
    eta > 0 down to the truncation level; decay_rate is the fitted
    exponential tail rate (positive for smooth solitons).
    """

    eta_grid: np.ndarray
    omega: np.ndarray
    A: float
    V: float
    decay_rate: float
    tail_tol: float
    p: float
    q: float
    r: float
    g_star: float


def _eta_increments(fpoly: FPoly, nodes: np.ndarray, g_star: float,
                    dF_gs: float, d2F_gs: float) -> tuple[np.ndarray, float]:
    """Adaptive quadrature of 1/sqrt(F) over consecutive node intervals.

    The first interval starts at g* where F has a simple zero; the
    substitution g = g* + u^2 makes that integrand smooth (its value at
    u=0 is 2/sqrt(F'(g*))), with a Taylor guard for the F/u^2 ratio at
    tiny u where direct evaluation is pure rounding noise.
    """

    def center_integrand(u):
        # Taylor branch up to u=3e-3: truncation ~1e-11 relative, while the
        # direct F ratio is still rounding-dominated there
        if u < 3e-3:
            s = dF_gs + 0.5 * d2F_gs * u * u
        else:
            s = eval_F(g_star + u * u, fpoly) / (u * u)
        return 2.0 / math.sqrt(s)

    incr = np.zeros(len(nodes))
    err_total = 0.0
    with warnings.catch_warnings():
        # per-interval estimates can be roundoff-limited; the accumulated
        # total is what the caller gates on
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(center_integrand, 0.0, math.sqrt(nodes[1] - g_star),
                        epsabs=1e-12, epsrel=1e-9, limit=200)
        incr[1] = val
        err_total += err
        for i in range(2, len(nodes)):
            val, err = quad(lambda gg: 1.0 / math.sqrt(eval_F(gg, fpoly)),
                            nodes[i - 1], nodes[i],
                            epsabs=1e-12, epsrel=1e-9, limit=200)
            incr[i] = val
            err_total += err
    return incr, err_total


# 16-point Gauss-Legendre rule on [0,1] for the vectorized refinement
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


def _eta_of_g_batch(fpoly: FPoly, g_star: float, dF_gs: float, d2F_gs: float,
                    table_g: np.ndarray, table_eta: np.ndarray,
                    g_query: np.ndarray) -> np.ndarray:
    """eta(g) for a batch of g-values: nearest table node below + a
    fixed-order Gauss-Legendre correction over the short remaining span."""
    idx = np.clip(np.searchsorted(table_g, g_query, side="right") - 1,
                  0, len(table_g) - 1)
    eta = table_eta[idx].copy()
    a = table_g[idx]
    # intervals anchored at interior nodes: plain GL on [a, g]
    interior = idx > 0
    if np.any(interior):
        aa, gg = a[interior], g_query[interior]
        span = gg - aa
        pts = aa[:, None] + span[:, None] * _GL_NODES[None, :]
        vals = 1.0 / np.sqrt(eval_F(pts.ravel(), fpoly)).reshape(pts.shape)
        eta[interior] += span * (vals @ _GL_WEIGHTS)
    # intervals anchored at g* itself: GL in the substituted variable u
    first = ~interior
    if np.any(first):
        gg = g_query[first]
        umax = np.sqrt(np.maximum(gg - g_star, 0.0))
        u = umax[:, None] * _GL_NODES[None, :]
        s = np.empty_like(u)
        tiny = u < 3e-3
        s[tiny] = dF_gs + 0.5 * d2F_gs * u[tiny] ** 2
        big = ~tiny
        if np.any(big):
            ub = u[big]
            s[big] = eval_F(g_star + ub * ub, fpoly) / (ub * ub)
        eta[first] += umax * ((2.0 / np.sqrt(s)) @ _GL_WEIGHTS)
    return eta


def integrate_profile(g_star: float, q: float, r: float,
                      tail_tol: float = 1e-10,
                      n_samples: int = 4001) -> GProfile:
    """Integrate the profile quadrature eta(g) = int_{g*}^{g} ds/sqrt(F)
    and invert it onto a uniform eta-grid.

    The quadrature runs over a graded node table (square-root clustering
    at g*, logarithmic clustering toward g=1) up to 1-g = tail_tol, then
    monotone interpolation plus per-node Newton refinement produces
    g(eta) on (n_samples+1)//2 uniform half-line nodes.  Quadrature is
    the stable construction: g=1 is a saddle, so forward shooting off
    the connecting orbit diverges, while eta(g) is a plain integral with
    an inverse-square-root endpoint removed by substitution.

    Raises SingularityError for a double zero of F at g* (the
    algebraically decaying wave, not constructed here) and
    QuadratureFailure if F <= 0 is detected inside (g*, 1).
    """
    if not 0.0 < g_star < 1.0:
        raise ValueError("g_star must lie in (0,1)")
    if q <= 0.0:
        raise ValueError("integrate_profile requires q > 0")
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0,1)")
    if not 0.0 < tail_tol < (1.0 - g_star) * 1e-2:
        raise ValueError("tail_tol must be positive and well below 1-g_star")
    if n_samples < 64:
        raise ValueError("n_samples too small for a usable profile")

    fpoly = FPoly(r=r, q=q)
    f_at_star = eval_F(g_star, fpoly)
    scale = max(1.0, abs(fpoly.C))
    if abs(f_at_star) > 1e-9 * scale:
        raise ValueError(f"F(g*,q) = {f_at_star:.3e} is not zero: "
                         "inconsistent (g*, q, r)")
    dF_gs = eval_dF(g_star, fpoly)
    d2F_gs = (2.0 - 2.0 * (2.0 - q) * (1.0 - r) * g_star**(-r)
              + 2.0 * (1.0 - q) * (1.0 - 2.0 * r) * g_star**(-2.0 * r))
    if dF_gs <= 1e-9 * scale:
        raise SingularityError(
            "F has a double zero at g*: algebraically decaying wave; "
            "profile not constructed")

    # orbit validity: F strictly positive between g* and the tail cut
    probe = g_star + (1.0 - tail_tol - g_star) * np.linspace(1e-4, 1.0, 2048) ** 2
    fprobe = eval_F(probe, fpoly)
    if np.any(fprobe <= 0.0):
        bad = probe[np.argmin(fprobe)]
        raise QuadratureFailure(f"F(g,q) <= 0 at g = {bad:.8f} inside the orbit")

    # graded quadrature table
    g_mid = g_star + 0.5 * (1.0 - g_star)
    tau = np.linspace(0.0, 1.0, 401)
    seg_a = g_star + (g_mid - g_star) * tau**2
    w_mid = 1.0 - g_mid
    seg_b = 1.0 - w_mid * np.exp(-np.linspace(0.0, math.log(w_mid / tail_tol), 801))
    table_g = np.unique(np.concatenate([seg_a, seg_b]))
    incr, err_total = _eta_increments(fpoly, table_g, g_star, dF_gs, d2F_gs)
    # estimates are roundoff-floored at ~50*eps per interval, so the gate
    # scales with the total span; 1e-7 relative stays orders of magnitude
    # below the profile residual target
    if err_total > 1e-7 * max(1.0, float(np.sum(incr))):
        raise QuadratureFailure(
            f"accumulated quadrature error estimate {err_total:.2e} too large")
    table_eta = np.cumsum(incr)

    # inversion: monotone interpolant, then Newton refinement
    # d eta/d g = 1/sqrt(F) => Newton step dg = -(eta(g)-eta_target)*sqrt(F(g))
    n_half = (n_samples + 1) // 2
    eta = np.linspace(0.0, table_eta[-1], n_half)
    g = np.asarray(PchipInterpolator(table_eta, table_g)(eta))
    g[0] = g_star
    g = np.clip(g, g_star, table_g[-1])
    for _ in range(3):
        eta_hat = _eta_of_g_batch(fpoly, g_star, dF_gs, d2F_gs,
                                  table_g, table_eta, g[1:])
        step = (eta_hat - eta[1:]) * np.sqrt(
            np.maximum(eval_F(g[1:], fpoly), 0.0))
        g[1:] -= step
        g = np.clip(g, g_star, table_g[-1])
        if np.max(np.abs(step)) < 1e-13:
            break
    g = np.maximum.accumulate(g)
    g[-1] = table_g[-1]

    # fitted decay rate of w = 1-g over the last decade before tail_tol
    wtail = 1.0 - g
    mask = (wtail >= tail_tol) & (wtail <= 10.0 * tail_tol)
    if mask.sum() < 8:
        raise QuadratureFailure("tail too sparsely sampled for the rate fit")
    slope = np.polyfit(eta[mask], np.log(wtail[mask]), 1)[0]
    return GProfile(eta=eta, g=g, g_star=g_star, q=q, r=r,
                    tail_tol=tail_tol, w_rate=-slope)


def profile_to_omega(g_samples: GProfile, p: float, r: float,
                     A: float, V: float) -> Profile:
    """Map the g-representation to the physical profile
    omega = (1 - g^r)/p, mirrored to eta < 0 by evenness.

    omega(0) = 1 because g(0)^r = 1 - p; requires p in (0,1).
    """
    if not 0.0 < p < 1.0:
        raise ValueError("profile_to_omega requires p in (0,1)")
    eta_half = g_samples.eta
    # 1 - g^r via expm1 keeps the deep tail (g -> 1) fully accurate
    one_minus_gr = -np.expm1(r * np.log(g_samples.g))
    omega_half = one_minus_gr / p
    if abs(omega_half[0] - 1.0) > 1e-10:
        raise ValueError(
            f"omega(0) = {omega_half[0]!r}: p inconsistent with g(0)")
    omega_half[0] = 1.0

    eta_grid = np.concatenate([-eta_half[:0:-1], eta_half])
    omega = np.concatenate([omega_half[:0:-1], omega_half])

    # fit the omega tail rate over its own final decade
    tail_level = omega_half[-1]
    mask = (omega_half >= tail_level) & (omega_half <= 10.0 * tail_level)
    slope = np.polyfit(eta_half[mask], np.log(omega_half[mask]), 1)[0]
    return Profile(eta_grid=eta_grid, omega=omega, A=A, V=V,
                   decay_rate=-slope, tail_tol=g_samples.tail_tol,
                   p=p, q=g_samples.q, r=r, g_star=g_samples.g_star)


def build_profile(params: StructuralParams, A: float,
                  tail_tol: float = 1e-10, n_samples: int = 4001) -> Profile:
    """Full pipeline: classify-solve, integrate, and map to omega."""
    from .params import Regime, classify_wave

    spec = classify_wave(params, A)
    if spec.regime is not Regime.SMOOTH_SOLITON:
        raise NoRoot(f"no smooth soliton for A={A}: regime {spec.regime.value}")
    dc = derive_constants(params)
    gp = integrate_profile(spec.g_star, spec.q, dc.r,
                           tail_tol=tail_tol, n_samples=n_samples)
    # p = 1 - g*^r exactly, making omega(0) = 1 exact by construction
    p = -math.expm1(dc.r * math.log(spec.g_star))
    return profile_to_omega(gp, p, dc.r, A, spec.V)


def sample_physical_wave(profile: Profile, params: StructuralParams,
                         x_grid, t: float):
    """Evaluate u(x,t) = A*omega(beta(x - V t)/eps) on the given grid.

    Interpolates on the stored profile; beyond the truncated tail the
    analytic exponential continuation omega(eta_max) e^{-rate(|eta|-eta_max)}
    takes over (the profile decays exponentially, so the continuation is
    analytic rather than extrapolated guesswork).
    """
    dc = derive_constants(params)
    x = np.asarray(x_grid, dtype=float)
    eta = dc.beta * (x - profile.V * t) / params.epsilon
    aeta = np.abs(eta)

    n_half = (len(profile.eta_grid) + 1) // 2
    eta_half = profile.eta_grid[n_half - 1:]
    omega_half = profile.omega[n_half - 1:]
    eta_max = eta_half[-1]

    u = np.empty_like(aeta)
    inside = aeta <= eta_max
    interp = PchipInterpolator(eta_half, omega_half)
    u[inside] = interp(aeta[inside])
    u[~inside] = omega_half[-1] * np.exp(
        -profile.decay_rate * (aeta[~inside] - eta_max))
    return profile.A * u


def profile_residual(profile: Profile, params: StructuralParams,
                     A: float, V: float) -> float:
    """Maximum residual of the reduced profile ODE

        (1 - p*omega) omega'' = (c2/c3) p (omega')^2
                                + r p [ ((V-c0)/(c1 A)) omega - omega^2 ]

    with omega', omega'' from 4th-order central differences on the
    uniform stored grid.  End-to-end correctness oracle of the pipeline.
    """
    dc = derive_constants(params)
    r = dc.r
    p = params.c3 * A / (params.gamma + params.alpha**2 * V)
    w = profile.omega
    h = profile.eta_grid[1] - profile.eta_grid[0]
    if not np.allclose(np.diff(profile.eta_grid), h, rtol=1e-8):
        raise ValueError("profile_residual requires a uniform eta-grid")
    wp = (-w[4:] + 8 * w[3:-1] - 8 * w[1:-3] + w[:-4]) / (12 * h)
    wpp = (-w[4:] + 16 * w[3:-1] - 30 * w[2:-2] + 16 * w[1:-3] - w[:-4]) / (12 * h**2)
    mid = w[2:-2]
    lhs = (1.0 - p * mid) * wpp
    rhs = ((params.c2 / params.c3) * p * wp**2
           + r * p * ((V - params.c0) / (params.c1 * A) * mid - mid**2))
    return float(np.max(np.abs(lhs - rhs)))


def export_profile_csv(profile: Profile, path) -> None:
    """Write the profile as CSV columns eta, omega, u (u = A*omega).

    Values use repr formatting, which round-trips IEEE-754 doubles.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["eta", "omega", "u"])
        for e, o in zip(profile.eta_grid, profile.omega):
            writer.writerow([repr(float(e)), repr(float(o)),
                             repr(float(profile.A * o))])
