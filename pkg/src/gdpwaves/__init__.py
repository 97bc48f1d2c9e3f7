"""Solitary waves of the generalized Degasperis-Procesi family.

Construction, classification, and time-domain verification of smooth
solitons and peakons for the six-parameter equation

    d/dt (u - alpha^2 eps^2 u_xx)
        + d/dx (c0 u + c1 u^2 - c2 (eps u_x)^2 + eps^2 (gamma - c3 u) u_xx) = 0.
"""
from .diagnostics import (BalanceRecord, CollisionReport, SnapshotDiagnostics,
                          balance_terms, find_peaks, fit_decay_rate,
                          measure_collision, snapshot_diagnostics)
from .errors import (ClassificationWarning, ConfigError, DegenerateParameters,
                     DomainError, GdpError, InsufficientTail, InvalidAmplitude,
                     NonFinite, NoPeakon, NoRoot, QuadratureFailure,
                     SingularityError, TrackingLost)
from .params import (DerivedConstants, Regime, StructuralParams, WaveSpec,
                     classify_wave, derive_constants, psi)
from .pdesim import (Grid, GridState, SimConfig, Trajectory, WaveInit,
                     helmholtz_solve, run_simulation, semidiscrete_rhs, step)
from .peakon import (JumpReport, PeakonSpec, peakon_amplitude, peakon_profile,
                     peakon_to_profile, verify_jump_conditions)
from .twave import (FPoly, Profile, SelfConsistencyPoly, build_profile,
                    eval_F, export_profile_csv, fscan_table,
                    integrate_profile, profile_residual, sample_physical_wave,
                    solve_g_star_alpha_pos, solve_q_star_alpha_zero,
                    wave_velocity)

__version__ = "0.1.0"

__all__ = [
    "BalanceRecord", "ClassificationWarning", "CollisionReport",
    "ConfigError", "DegenerateParameters", "DerivedConstants", "DomainError",
    "FPoly", "GdpError", "Grid", "GridState", "InsufficientTail",
    "InvalidAmplitude", "JumpReport", "NoPeakon", "NoRoot", "NonFinite",
    "PeakonSpec", "Profile", "QuadratureFailure", "Regime",
    "SelfConsistencyPoly", "SimConfig", "SingularityError",
    "SnapshotDiagnostics", "StructuralParams", "TrackingLost", "Trajectory",
    "WaveInit", "WaveSpec", "balance_terms", "build_profile", "classify_wave",
    "derive_constants", "eval_F", "export_profile_csv", "find_peaks",
    "fit_decay_rate", "fscan_table", "helmholtz_solve", "integrate_profile",
    "measure_collision", "peakon_amplitude", "peakon_profile",
    "peakon_to_profile", "profile_residual", "psi", "run_simulation",
    "sample_physical_wave", "semidiscrete_rhs", "snapshot_diagnostics",
    "solve_g_star_alpha_pos", "solve_q_star_alpha_zero", "step",
    "verify_jump_conditions", "wave_velocity",
]
