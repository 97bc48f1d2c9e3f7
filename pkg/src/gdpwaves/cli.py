"""Command-line interface: classify, profile, peakon, simulate, fscan.

Scenario files (TOML or JSON) mirror the library's configuration types
and are schema-validated with unknown keys rejected.  All outputs are
plot-ready CSV plus a JSON sidecar of derived scalars; identical inputs
produce byte-identical files.

Exit codes: 0 ok, 2 invalid input, 3 no wave exists, 4 numerical failure
(partial outputs are flushed before exiting).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .diagnostics import (collision_report_text, fit_decay_rate,
                          measure_collision, report_to_dict)
from .errors import (ConfigError, GdpError, InsufficientTail, NonFinite,
                     TrackingLost)
from .params import Regime, StructuralParams, classify_wave, derive_constants, psi
from .peakon import peakon_amplitude, peakon_to_profile, verify_jump_conditions
from .pdesim import Grid, SimConfig, WaveInit, run_simulation
from .twave import build_profile, export_profile_csv, fscan_table

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NO_WAVE = 3
EXIT_NUMERICAL = 4


# ---------------------------------------------------------------------------
# scenario loading and schema validation

_SCHEMA = {
    "params": {"alpha", "gamma", "c0", "c1", "c2", "c3", "epsilon"},
    "grid": {"L", "N"},
    "simulation": {"t_end", "cfl", "snapshot_stride", "seam_tol",
                   "tail_tol", "n_samples", "smoothing"},
    "waves": {"A", "x0", "kind"},
    "profile": {"A", "tail_tol", "n_samples"},
    "measure": {"pre", "post", "widths"},
}
_INT_KEYS = {"N", "snapshot_stride", "n_samples"}
_BOOL_KEYS = {"smoothing"}
_STR_KEYS = {"kind"}


def _check_table(table: dict, section: str) -> None:
    allowed = _SCHEMA[section]
    for key, val in table.items():
        if key not in allowed:
            raise ConfigError(f"unknown key '{section}.{key}'; "
                              f"allowed: {sorted(allowed)}")
        if key in _STR_KEYS:
            if not isinstance(val, str):
                raise ConfigError(f"'{section}.{key}' must be a string")
        elif key in _BOOL_KEYS:
            if not isinstance(val, bool):
                raise ConfigError(f"'{section}.{key}' must be a boolean")
        elif key in _INT_KEYS:
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"'{section}.{key}' must be an integer")
        elif section == "measure":
            if (not isinstance(val, (list, tuple)) or len(val) != 2
                    or not all(isinstance(v, (int, float))
                               and not isinstance(v, bool) for v in val)):
                raise ConfigError(f"'{section}.{key}' must be a [lo, hi] pair")
        else:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"'{section}.{key}' must be a number")


def validate_scenario(doc: dict) -> dict:
    """Validate types and reject unknown keys; returns the document."""
    if not isinstance(doc, dict):
        raise ConfigError("scenario root must be a table/object")
    for key, val in doc.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown section '{key}'; "
                              f"allowed: {sorted(_SCHEMA)}")
        if key == "waves":
            if not isinstance(val, list) or not val:
                raise ConfigError("'waves' must be a non-empty array of tables")
            for i, wave in enumerate(val):
                if not isinstance(wave, dict):
                    raise ConfigError(f"'waves[{i}]' must be a table")
                _check_table(wave, "waves")
        else:
            if not isinstance(val, dict):
                raise ConfigError(f"'{key}' must be a table")
            _check_table(val, key)
    if "params" not in doc:
        raise ConfigError("scenario needs a [params] section")
    missing = _SCHEMA["params"] - set(doc["params"])
    if missing:
        raise ConfigError(f"[params] missing keys: {sorted(missing)}")
    return doc


_PACKAGED = {"fig2", "fig3", "fig2.toml", "fig3.toml"}


def load_scenario(path: str) -> dict:
    """Load a TOML/JSON scenario; bare names fig2/fig3 use packaged files."""
    name = Path(path).name
    if not Path(path).exists() and name in _PACKAGED:
        from importlib.resources import files

        stem = name.removesuffix(".toml")
        text = (files("gdpwaves") / "scenarios" / f"{stem}.toml").read_text()
        doc = tomllib.loads(text)
        return validate_scenario(doc)
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"scenario file not found: {path}")
    if p.suffix == ".json":
        doc = json.loads(p.read_text())
    else:
        with open(p, "rb") as fh:
            doc = tomllib.load(fh)
    return validate_scenario(doc)


def _params_from(doc: dict) -> StructuralParams:
    t = doc["params"]
    return StructuralParams(alpha=float(t["alpha"]), gamma=float(t["gamma"]),
                            c0=float(t["c0"]), c1=float(t["c1"]),
                            c2=float(t["c2"]), c3=float(t["c3"]),
                            epsilon=float(t["epsilon"]))


def _amplitude_from(doc: dict, args) -> float:
    if getattr(args, "A", None) is not None:
        return args.A
    if "profile" in doc and "A" in doc["profile"]:
        return float(doc["profile"]["A"])
    raise ConfigError("no amplitude given: pass --A or set [profile].A")


# ---------------------------------------------------------------------------
# output helpers (repr round-trips doubles -> byte-identical reruns)

def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (int, float))
                             and not isinstance(v, bool) else v for v in row])


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands

def _criterion_text(spec, params: StructuralParams) -> str:
    dc = derive_constants(params)
    if params.alpha == 0:
        if spec.regime is Regime.SMOOTH_SOLITON:
            return "p = c3*A/gamma < 1 (tail-matching root q* > 0)"
        if spec.regime is Regime.PEAKON:
            return "p = 1 exactly: A = gamma/c3"
        return "p = c3*A/gamma > 1: no admissible boundary value"
    if spec.regime is Regime.SMOOTH_SOLITON:
        return "C1 > 0: interior root g* of the self-consistency equation"
    if spec.regime is Regime.PEAKON:
        if spec.arbitrary_amplitude:
            return "c3 = r*alpha^2*c1 and gamma_alpha = 0: peakon family"
        return "C1 = 0: c3*A - gamma_alpha = r*alpha^2*c1*A"
    if spec.regime is Regime.ALGEBRAIC_DECAY:
        return "q(g*) = 0: double zero at g = 1, eta^-2 tails"
    return "C1 < 0 or q(g*) < 0: no admissible root"


def _spec_dict(spec, params: StructuralParams) -> dict:
    dc = derive_constants(params)
    return {
        "regime": spec.regime.value,
        "criterion": _criterion_text(spec, params),
        "A": spec.A, "V": spec.V, "p": spec.p, "q": spec.q,
        "g_star": spec.g_star, "r": dc.r, "beta": dc.beta,
        "gamma_alpha": dc.gamma_alpha,
        "arbitrary_amplitude": spec.arbitrary_amplitude,
    }


def cmd_classify(args) -> int:
    doc = load_scenario(args.scenario)
    params = _params_from(doc)

    if args.grid is not None:
        lo, hi, n = args.grid
        rows = []
        for A in np.linspace(lo, hi, n):
            spec = classify_wave(params, float(A))
            try:
                psi_val = psi(params, float(A))
            except GdpError:
                psi_val = math.nan
            rows.append([float(A), spec.regime.value, spec.V, spec.p,
                         spec.q, spec.g_star, psi_val])
        if args.out is not None:
            out = _out_dir(args)
            _write_csv(out / "classify_sweep.csv",
                       ["A", "regime", "V", "p", "q", "g_star", "psi"],
                       rows)
            print(f"wrote {out / 'classify_sweep.csv'}")
        for row in rows:
            print(f"A={row[0]:<10.6g} {row[1]:<15} V={row[2]:<12.6g} "
                  f"psi={row[6]:.6g}")
        return EXIT_OK

    A = _amplitude_from(doc, args)
    spec = classify_wave(params, A)
    info = _spec_dict(spec, params)
    if args.format == "json":
        print(json.dumps(info, indent=2, sort_keys=True))
    else:
        print(f"regime: {info['regime']}")
        print(f"criterion: {info['criterion']}")
        for key in ("A", "V", "p", "q", "g_star", "r", "gamma_alpha"):
            print(f"{key}: {info[key]:.12g}")
    if args.out is not None:
        _write_json(_out_dir(args) / "classify.json", info)
    return EXIT_NO_WAVE if spec.regime is Regime.NO_WAVE else EXIT_OK


def cmd_profile(args) -> int:
    doc = load_scenario(args.scenario)
    params = _params_from(doc)
    A = _amplitude_from(doc, args)
    popts = doc.get("profile", {})
    prof = build_profile(params, A,
                         tail_tol=float(popts.get("tail_tol", 1e-10)),
                         n_samples=int(popts.get("n_samples", 4001)))
    meta = {
        "A": prof.A, "V": prof.V, "q": prof.q, "g_star": prof.g_star,
        "p": prof.p, "r": prof.r, "decay_rate": prof.decay_rate,
        "tail_tol": prof.tail_tol, "n_samples": len(prof.eta_grid),
    }
    out = _out_dir(args)
    if args.format == "json":
        meta["eta"] = [float(v) for v in prof.eta_grid]
        meta["omega"] = [float(v) for v in prof.omega]
        meta["u"] = [float(prof.A * v) for v in prof.omega]
        _write_json(out / "profile.json", meta)
        print(f"wrote {out / 'profile.json'}")
    else:
        export_profile_csv(prof, out / "profile.csv")
        _write_json(out / "profile_meta.json", meta)
        print(f"wrote {out / 'profile.csv'} and {out / 'profile_meta.json'}")
    print(f"A={prof.A:.6g} V={prof.V:.6g} g*={prof.g_star:.10g} "
          f"q={prof.q:.10g} decay_rate={prof.decay_rate:.6g}")
    return EXIT_OK


def cmd_peakon(args) -> int:
    doc = load_scenario(args.scenario)
    params = _params_from(doc)
    A = None
    if getattr(args, "A", None) is not None:
        A = args.A
    elif "profile" in doc and "A" in doc["profile"]:
        A = float(doc["profile"]["A"])
    spec = peakon_amplitude(params, A=A)
    report = verify_jump_conditions(spec, params)
    # sample down to the same 1e-10 tail level the smooth pipeline uses
    prof = peakon_to_profile(spec, eta_max=10.0 * math.log(10.0) / spec.r)
    meta = {
        "A": spec.A, "V": spec.V, "r": spec.r, "beta": spec.beta,
        "arbitrary_amplitude": spec.arbitrary_amplitude,
        "jump_residual_first": report.residual_first,
        "jump_residual_second": report.residual_second,
    }
    out = _out_dir(args)
    if args.format == "json":
        meta["eta"] = [float(v) for v in prof.eta_grid]
        meta["omega"] = [float(v) for v in prof.omega]
        meta["u"] = [float(spec.A * v) for v in prof.omega]
        _write_json(out / "peakon.json", meta)
        print(f"wrote {out / 'peakon.json'}")
    else:
        export_profile_csv(prof, out / "peakon.csv")
        _write_json(out / "peakon_meta.json", meta)
        print(f"wrote {out / 'peakon.csv'} and {out / 'peakon_meta.json'}")
    print(f"A={spec.A:.6g} V={spec.V:.6g} r={spec.r:.6g} "
          f"arbitrary_amplitude={spec.arbitrary_amplitude}")
    return EXIT_OK


def cmd_fscan(args) -> int:
    doc = load_scenario(args.scenario)
    params = _params_from(doc)
    A = _amplitude_from(doc, args)
    g, F = fscan_table(params, A, n_points=args.n)
    out = _out_dir(args)
    if args.format == "json":
        _write_json(out / "fscan.json",
                    {"A": A, "g": [float(v) for v in g],
                     "F": [float(v) for v in F]})
        print(f"wrote {out / 'fscan.json'}")
    else:
        _write_csv(out / "fscan.csv", ["g", "F"], zip(g, F))
        print(f"wrote {out / 'fscan.csv'}")
    return EXIT_OK


def _sim_config(doc: dict) -> SimConfig:
    for section in ("grid", "simulation", "waves"):
        if section not in doc:
            raise ConfigError(f"simulate needs a [{section}] section")
    g, s = doc["grid"], doc["simulation"]
    if "L" not in g or "N" not in g:
        raise ConfigError("[grid] needs both L and N")
    if "t_end" not in s:
        raise ConfigError("[simulation] needs t_end")
    waves = tuple(WaveInit(A=float(w["A"]), x0=float(w["x0"]),
                           kind=w.get("kind", "auto"))
                  for w in doc["waves"])
    kwargs = {}
    for key in ("cfl", "seam_tol", "tail_tol"):
        if key in s:
            kwargs[key] = float(s[key])
    for key in ("snapshot_stride", "n_samples"):
        if key in s:
            kwargs[key] = int(s[key])
    if "smoothing" in s:
        kwargs["smoothing"] = bool(s["smoothing"])
    return SimConfig(params=_params_from(doc),
                     grid=Grid(L=float(g["L"]), N=int(g["N"])),
                     waves=waves, t_end=float(s["t_end"]), **kwargs)


def _flush_trajectory(traj, out: Path, fmt: str) -> None:
    grid = traj.config.grid
    if fmt == "json":
        obj = {
            "dt": traj.dt, "n_steps": traj.n_steps,
            "wave_velocities": list(traj.wave_velocities),
            "x": [float(v) for v in grid.x],
            "times": [float(s.t) for s in traj.snapshots],
            "u": [[float(v) for v in s.u] for s in traj.snapshots],
            "diagnostics": [
                {"t": r.t, "mass": r.mass, "energy": r.energy,
                 "dissipation": r.dissipation,
                 "peaks": [list(p) for p in r.peaks]}
                for r in traj.records
            ],
        }
        _write_json(out / "trajectory.json", obj)
        print(f"wrote {out / 'trajectory.json'}")
        return
    x = grid.x
    with open(out / "trajectory.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x", "u"])
        for snap in traj.snapshots:
            t_repr = repr(float(snap.t))
            for xj, uj in zip(x, snap.u):
                writer.writerow([t_repr, repr(float(xj)), repr(float(uj))])
    rows = []
    for rec in traj.records:
        peaks = list(rec.peaks[:2]) + [(math.nan, math.nan)] * (2 - len(rec.peaks[:2]))
        rows.append([rec.t, rec.mass, rec.energy, rec.dissipation,
                     peaks[0][0], peaks[0][1], peaks[1][0], peaks[1][1]])
    _write_csv(out / "diagnostics.csv",
               ["t", "mass", "E", "D", "x_peak1", "u_peak1",
                "x_peak2", "u_peak2"], rows)
    print(f"wrote {out / 'trajectory.csv'} and {out / 'diagnostics.csv'}")


def cmd_simulate(args) -> int:
    doc = load_scenario(args.scenario)
    config = _sim_config(doc)
    out = _out_dir(args)
    try:
        traj = run_simulation(config)
    except NonFinite as exc:
        if exc.partial is not None:
            _flush_trajectory(exc.partial, out, args.format)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _flush_trajectory(traj, out, args.format)
    print(f"dt={traj.dt:.6g} steps={traj.n_steps} "
          f"snapshots={len(traj.snapshots)}")
    if "measure" in doc:
        m = doc["measure"]
        if "pre" not in m or "post" not in m:
            raise ConfigError("[measure] needs pre and post windows")
        kwargs = {}
        if "widths" in m:
            kwargs["interaction_widths"] = float(m["widths"])
        report = measure_collision(
            traj, (tuple(map(float, m["pre"])), tuple(map(float, m["post"]))),
            **kwargs)
        _write_json(out / "collision.json", report_to_dict(report))
        text = collision_report_text(report)
        (out / "collision.txt").write_text(text + "\n")
        print(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _parse_grid(text: str) -> tuple[float, float, int]:
    try:
        name, rng = text.split("=", 1)
        if name.strip() != "A":
            raise ValueError
        lo_s, hi_s, n_s = rng.split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
        if n < 1 or not lo <= hi:
            raise ValueError
        return lo, hi, n
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"--grid expects A=lo:hi:n, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gdp",
        description="Solitary waves of the generalized Degasperis-Procesi "
                    "family: classification, profiles, peakons, and "
                    "time-domain simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default=None):
        p.add_argument("--scenario", required=True,
                       help="TOML/JSON scenario file (fig2/fig3 are packaged)")
        p.add_argument("--out", default=out_default,
                       help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("classify", help="classify (params, A) into a regime")
    common(p)
    p.add_argument("--A", type=float, help="amplitude (overrides scenario)")
    p.add_argument("--grid", type=_parse_grid, metavar="A=lo:hi:n",
                   help="sweep an amplitude grid instead of a single A")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("profile", help="construct a smooth soliton profile")
    common(p, out_default=".")
    p.add_argument("--A", type=float, help="amplitude (overrides scenario)")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("peakon", help="construct the closed-form peakon")
    common(p, out_default=".")
    p.add_argument("--A", type=float,
                   help="amplitude (arbitrary-amplitude families only)")
    p.set_defaults(func=cmd_peakon)

    p = sub.add_parser("fscan", help="tabulate F(g, q(g)) for plotting")
    common(p, out_default=".")
    p.add_argument("--A", type=float, help="amplitude (overrides scenario)")
    p.add_argument("--n", type=int, default=4096, help="number of g samples")
    p.set_defaults(func=cmd_fscan)

    p = sub.add_parser("simulate", help="run a time-domain simulation")
    common(p, out_default=".")
    p.set_defaults(func=cmd_simulate)

    return parser


def _apply_thread_cap() -> None:
    """Best-effort: GDP_THREADS caps the numerical libraries' thread pools."""
    cap = os.environ.get("GDP_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, cap)


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError,
            tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NonFinite as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (TrackingLost, InsufficientTail) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except GdpError as exc:
        # NoRoot, NoPeakon, InvalidAmplitude, DegenerateParameters: the
        # requested wave does not exist for these inputs
        print(f"no wave: {exc}", file=sys.stderr)
        return EXIT_NO_WAVE


if __name__ == "__main__":
    sys.exit(main())
