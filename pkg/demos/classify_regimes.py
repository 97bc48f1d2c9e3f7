#!/usr/bin/env python3
"""Walk one parameter family through all of its solitary-wave regimes.

The r = 1/2 family (c2 = c3) admits smooth solitons only below the
amplitude bound A* = 4 gamma_alpha/(3 c3); at the bound the wave peaks
(the crest derivative jumps) and beyond it no solitary wave exists.
This script sweeps the amplitude through the bound and prints the
classifier verdict at each point, then shows the other structural
regimes on reference parameter sets.
"""

import numpy as np

from gdpwaves import StructuralParams, classify_wave


def sweep_half_r_family():
    pars = StructuralParams(alpha=1.0, gamma=1.0, c0=1.0, c1=1.0,
                            c2=2.0, c3=2.0)
    bound = 4.0 * (pars.gamma + pars.alpha ** 2 * pars.c0) / (3.0 * pars.c3)
    print(f"r = 1/2 family, amplitude bound A* = {bound:.6f}")
    print(f"{'A':>10} {'regime':>16} {'V':>10} {'g*':>12} {'q':>10}")
    for A in np.concatenate([np.linspace(0.2, 1.2, 6),
                             [bound * (1.0 - 1e-6), bound, 1.4, 2.0]]):
        spec = classify_wave(pars, A)
        print(f"{A:>10.6f} {spec.regime.value:>16} {spec.V:>10.5f} "
              f"{spec.g_star:>12.5e} {spec.q:>10.6f}")
    print()


def reference_points():
    cases = [
        ("reference soliton",
         StructuralParams(alpha=2.0, gamma=0.0, c0=1.0, c1=3.0, c2=1.0,
                          c3=5.0, epsilon=0.1), 1.2),
        ("alpha = 0 soliton",
         StructuralParams(alpha=0.0, gamma=10.0, c0=1.0, c1=1.0, c2=1.0,
                          c3=4.0, epsilon=0.1), 0.9),
        ("alpha = 0 peakon",
         StructuralParams(alpha=0.0, gamma=10.0, c0=1.0, c1=1.0, c2=1.0,
                          c3=4.0, epsilon=0.1), 2.5),
        ("free-amplitude peakon (Camassa-Holm, c0 = 0)",
         StructuralParams(alpha=1.0, gamma=0.0, c0=0.0, c1=3.0, c2=1.0,
                          c3=2.0), 0.8),
    ]
    for label, pars, A in cases:
        spec = classify_wave(pars, A)
        extra = " (amplitude free)" if spec.arbitrary_amplitude else ""
        print(f"{label}: A = {A} -> {spec.regime.value}, "
              f"V = {spec.V:.6f}{extra}")


def main():
    sweep_half_r_family()
    reference_points()


if __name__ == "__main__":
    main()
