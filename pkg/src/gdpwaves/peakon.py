"""Closed-form peaked solitons and their weak-solution jump conditions.

A peakon is the g* = 0 limit of the smooth family: u = A e^{-r beta |x-Vt|/eps}
with a slope jump at the crest.  It exists only when the structural
constants satisfy c3*A - gamma_alpha = r*c1*A*alpha^2, which either fixes
the amplitude (generic case) or holds for every amplitude (the structural
families: Degasperis-Procesi, and Camassa-Holm with c0=0).  Peakons are
kept analytic throughout; sampling happens only at export/simulation time
so the cusp lands exactly where requested.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoPeakon
from .params import StructuralParams, derive_constants

# user-supplied constants rarely satisfy exact identities in binary
# floating point; structural equalities are tested at this relative level
EQUALITY_RTOL = 1e-9


@dataclass(frozen=True)
class PeakonSpec:
    """A constructed peakon: u = A exp(-r beta |x - V t|/eps).

    Invariants: c3*A - gamma_alpha = r*c1*A*alpha^2 (relative 1e-10) and
    V = c0 + r*c1*A.  arbitrary_amplitude marks the structural families
    where every A > 0 works.
    """

    A: float
    V: float
    r: float
    beta: float
    arbitrary_amplitude: bool


@dataclass(frozen=True)
class JumpReport:
    """Residuals of the two weak-solution jump conditions at the crest.

    With W = p*omega: first condition (1-p)[W'] = 0; second condition
    (1-p)[W'] - (c2/c3)[(W')^2] = 0, where [f] is the jump f(0+)-f(0-).
    """

    jump_Wp: float
    jump_Wp_sq: float
    residual_first: float
    residual_second: float
    passed: bool


def peakon_amplitude(params: StructuralParams, A: float | None = None) -> PeakonSpec:
    """Construct the peakon admitted by the structural constants.

    Generic case (c3 != r*alpha^2*c1, gamma_alpha > 0): the amplitude is
    fixed, A = gamma_alpha/(c3 - r*alpha^2*c1), and must come out
    positive.  Structural case (c3 = r*alpha^2*c1 and gamma_alpha = 0):
    any amplitude works and the caller must supply A.  Every other
    combination admits no peakon.

    Raises NoPeakon with the violated condition spelled out.
    """
    dc = derive_constants(params)
    r = dc.r
    denom = params.c3 - r * params.alpha**2 * params.c1
    denom_zero = abs(denom) <= EQUALITY_RTOL * params.c3
    ga_zero = dc.gamma_alpha == 0.0

    if denom_zero and ga_zero:
        if A is None:
            raise ValueError(
                "structural peakon family (c3 = r*alpha^2*c1, gamma_alpha = 0): "
                "amplitude must be supplied")
        if A <= 0:
            raise ValueError("amplitude A must be positive")
        amp = float(A)
        arbitrary = True
    elif denom_zero:
        raise NoPeakon(
            "c3 = r*alpha^2*c1 with gamma_alpha > 0: the amplitude "
            "condition c3*A - gamma_alpha = r*c1*A*alpha^2 is unsatisfiable")
    elif ga_zero:
        raise NoPeakon(
            "gamma_alpha = 0 with c3 != r*alpha^2*c1 forces A = 0: "
            "no positive-amplitude peakon")
    else:
        amp = dc.gamma_alpha / denom
        if amp <= 0:
            raise NoPeakon(
                f"amplitude formula gamma_alpha/(c3 - r*alpha^2*c1) = "
                f"{amp:.6g} is not positive")
        if A is not None and abs(A - amp) > EQUALITY_RTOL * amp:
            raise ValueError(
                f"amplitude is fixed at {amp:.12g} by the structural "
                f"constants; got {A}")
        arbitrary = False

    V = params.c0 + r * params.c1 * amp
    return PeakonSpec(A=amp, V=V, r=r, beta=dc.beta,
                      arbitrary_amplitude=arbitrary)


def peakon_profile(spec: PeakonSpec, params: StructuralParams, x_grid,
                   t: float):
    """Evaluate u(x,t) = A exp(-r beta |x - V t|/eps) on the grid.

    The profile is continuous with one-sided slopes of omega equal to
    -r at eta = 0+ and +r at eta = 0-.
    """
    x = np.asarray(x_grid, dtype=float)
    eta = spec.beta * (x - spec.V * t) / params.epsilon
    return spec.A * np.exp(-spec.r * np.abs(eta))


def verify_jump_conditions(spec: PeakonSpec, params: StructuralParams,
                           slopes: tuple[float, float] | None = None) -> JumpReport:
    """Check the two weak-solution jump conditions at the crest.

    slopes = (omega'(0+), omega'(0-)); defaults to the exact peakon
    values (-r, +r).  Passing measured or deliberately asymmetric slopes
    turns this into a detector for invalid crest geometry.
    """
    if slopes is None:
        slopes = (-spec.r, spec.r)
    right, left = slopes
    p = params.c3 * spec.A / (params.gamma + params.alpha**2 * spec.V)
    wp_right = p * right
    wp_left = p * left
    jump_wp = wp_right - wp_left
    jump_wp_sq = wp_right**2 - wp_left**2
    residual_first = (1.0 - p) * jump_wp
    residual_second = residual_first - (params.c2 / params.c3) * jump_wp_sq
    scale = max(1.0, abs(wp_right), abs(wp_left))
    passed = (abs(residual_first) <= 1e-12 * scale
              and abs(residual_second) <= 1e-12 * scale)
    return JumpReport(jump_Wp=jump_wp, jump_Wp_sq=jump_wp_sq,
                      residual_first=residual_first,
                      residual_second=residual_second, passed=passed)


def peakon_to_profile(spec: PeakonSpec, eta_max: float = 23.0,
                      n_samples: int = 4001):
    """Sample the closed form onto a symmetric Profile for export and
    decay-rate fitting; the cusp node eta = 0 carries omega = 1 exactly."""
    from .twave import Profile

    n_half = (n_samples + 1) // 2
    eta_half = np.linspace(0.0, eta_max, n_half)
    omega_half = np.exp(-spec.r * eta_half)
    eta_grid = np.concatenate([-eta_half[:0:-1], eta_half])
    omega = np.concatenate([omega_half[:0:-1], omega_half])
    return Profile(eta_grid=eta_grid, omega=omega, A=spec.A, V=spec.V,
                   decay_rate=spec.r, tail_tol=float(omega_half[-1]),
                   p=1.0, q=spec.r, r=spec.r, g_star=0.0)
