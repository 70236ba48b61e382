"""``thermo`` command-line front end.

    thermo phases|surface|precision|bec|verify --config PATH [--out DIR] [--seed U64]

The output directory is taken from ``--out``, then ``$THERMO_OUT``, then the
config's ``[output] directory`` (relative to the config file), then
``./thermo_out``.  Exit codes: 0 success, 1 verification failure, 2 config or
validation error, 3 every computed cell failed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .bec import (
    INDEPENDENCE_MESSAGE,
    dot_coupling,
    phonon_frequency,
    probe_budget,
    unruh_temperature,
    validity_report,
)
from .config import U64_MAX, ConfigError, RunConfig, load_config
from .errors import SingularityError, ThermoError, ValidationError
from .estimation import MeasurementModel, iter_rows, precision_sweep
from .jc import SystemParams
from .metrology import Scheme, cramer_rao, dynamical_mz_bounds, geometric_mz_bound, ramsey_bounds, scheme_fisher
from .thermal import phase_report, ramsey_relative_phase
from .units import NANOKELVIN, angular, ordinary

ENV_OUT = "THERMO_OUT"
MANIFEST = "run_manifest.json"
APPROX_RATIO = 1.0 / (4.0 * math.pi)

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_ALL_FAILED = 0, 1, 2, 3


@dataclass
class Table:
    name: str
    columns: list[tuple[str, str]]  # (name, unit)
    rows: list[tuple] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return "%.17e" % v


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def write_table(table: Table, out: Path, cfg: RunConfig, command: str) -> list[Path]:
    written = []
    path = out / f"{table.name}.csv"
    head = [f"# bec_thermo {__version__} {command}", f"# config_sha256: {cfg.digest}"]
    head += [f"# {n}" for n in table.notes]
    head.append("# columns: " + ", ".join(f"{c} [{u}]" for c, u in table.columns))
    with path.open("w", newline="") as fh:
        fh.write("\n".join(head) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([c for c, _ in table.columns])
        for row in table.rows:
            w.writerow([_fmt(v) for v in row])
    written.append(path)
    if "json" in cfg.formats:
        jpath = out / f"{table.name}.json"
        doc = {
            "columns": [{"name": c, "unit": u} for c, u in table.columns],
            "notes": table.notes,
            "config_sha256": cfg.digest,
            "rows": [[_jsonable(v) for v in r] for r in table.rows],
        }
        jpath.write_text(json.dumps(doc, indent=1, allow_nan=False) + "\n")
        written.append(jpath)
    return written


def read_table(path: Path) -> tuple[list[str], list[dict]]:
    with path.open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [{k: float(v) for k, v in zip(header, row)} for row in reader]


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# -- subcommands -------------------------------------------------------------


def cmd_phases(cfg: RunConfig, out: Path) -> tuple[list[Table], bool]:
    if not cfg.T_grid:
        raise ConfigError(f"{cfg.path}: thermal: temperature grid is empty")
    t = Table("phases", [
        ("T", "K"), ("F", "1"),
        ("gamma_g_minus_exact", "rad"), ("gamma_g_approx", "rad"),
        ("gamma_d_minus_exact", "rad"), ("gamma_d_approx", "rad"),
        ("approx_ratio", "1"), ("Gamma_D", "rad"), ("gamma_d_minus_full", "rad"),
        ("geometric_below_dynamical", "bool"), ("singular", "bool"),
    ], notes=[
        f"mode: {cfg.mode.value}",
        "gamma_d_minus_exact: thermal sum minus the same sum at g = 0",
    ])
    ok_any = False
    for T in cfg.T_grid:
        try:
            r = phase_report(T, cfg.system, cfg.mode, tail_tol=cfg.tail_tol)
        except SingularityError:
            nan = math.nan
            t.rows.append((T, nan, nan, nan, nan, nan, nan, nan, nan, False, True))
            continue
        ok_any = True
        ratio = r.gamma_g_approx / r.gamma_d_approx if r.gamma_d_approx else math.nan
        t.rows.append((T, r.F, r.gamma_g_minus, r.gamma_g_approx, r.gamma_d_coupling, r.gamma_d_approx,
                       ratio, r.Gamma_D, r.gamma_d_minus, bool(r.gamma_g_minus < r.gamma_d_coupling), False))
    return [t], ok_any


def cmd_surface(cfg: RunConfig, out: Path) -> tuple[list[Table], bool]:
    if cfg.surface is None:
        raise ConfigError(f"{cfg.path}: surface: section is required for this command")
    s = cfg.surface
    t = Table("gamma_surface", [
        ("g", "Hz"), ("delta", "Hz"), ("g_over_delta", "1"), ("Gamma_D", "rad"),
        ("Gamma_D_coupling", "rad"), ("rwa_margin", "1"), ("adiabatic_margin", "1"),
        ("rwa_ok", "bool"), ("adiabatic_ok", "bool"), ("valid", "bool"), ("failed", "bool"),
    ], notes=[f"T = {s.T:.6e} K", f"omega_a = {ordinary(cfg.system.omega_a):.6e} Hz", f"mode: {cfg.mode.value}"])
    ok_any = False
    for g in s.g_hz:
        for d in s.delta_hz:
            try:
                p = SystemParams.build(cfg.system.omega_a, angular(g), delta=angular(d))
                gam = ramsey_relative_phase(s.T, p, cfg.mode, tail_tol=cfg.tail_tol)
                free = ramsey_relative_phase(s.T, p.with_coupling(0.0), cfg.mode, tail_tol=cfg.tail_tol)
                v = validity_report(p, thresholds=cfg.thresholds, T=s.T)
            except ThermoError:
                nan = math.nan
                t.rows.append((g, d, g / d, nan, nan, nan, nan, False, False, False, True))
                continue
            ok_any = True
            t.rows.append((g, d, g / d, gam, gam - free, v.rwa_margin, v.adiabatic_margin,
                           v.rwa_ok, v.adiabatic_ok, v.rwa_ok and v.adiabatic_ok, False))
    return [t], ok_any


_BOUND_COLUMNS = {
    Scheme.RAMSEY_DYNAMICAL: [("ramsey_exact", "1"), ("ramsey_lower", "1"), ("ramsey_upper", "1")],
    Scheme.MZ_DYNAMICAL: [("mz_dynamical_exact", "1"), ("mz_dynamical_lower", "1"), ("mz_dynamical_upper", "1")],
    Scheme.MZ_GEOMETRIC: [("mz_geometric_exact", "1"), ("mz_geometric_printed", "1"),
                          ("mz_geometric_printed_valid", "bool")],
}


def _bound_row(T: float, M: int, cfg: RunConfig) -> list:
    row = []
    for scheme in cfg.schemes:
        exact = cramer_rao(scheme_fisher(T, cfg.system, scheme, cfg.mode, tail_tol=cfg.tail_tol), M) / T
        if scheme is Scheme.MZ_GEOMETRIC:
            b = geometric_mz_bound(T, cfg.system, M)
            row += [exact, b.value / T if b.valid else math.nan, b.valid]
        else:
            lo, hi = (ramsey_bounds if scheme is Scheme.RAMSEY_DYNAMICAL else dynamical_mz_bounds)(T, cfg.system, M)
            row += [exact, lo / T, hi / T]
    return row


GNUPLOT_STUB = """\
# relative temperature error vs T; run with: gnuplot -p precision.gp
set datafile separator ","
set key autotitle columnhead
set logscale y
set xlabel "T (nK)"
set ylabel "dT / T"
plot for [M in "{Ms}"] "simulation.csv" using ($1*1e9):(strcol(2) eq M ? $7 : 1/0) with lines title "CR, M=".M, \\
     for [M in "{Ms}"] "simulation.csv" using ($1*1e9):(strcol(2) eq M ? $6 : 1/0) with points title "MLE, M=".M
"""


def cmd_precision(cfg: RunConfig, out: Path) -> tuple[list[Table], bool]:
    if not cfg.T_grid:
        raise ConfigError(f"{cfg.path}: thermal: temperature grid is empty")
    cols = [("T", "K"), ("M", "shots")]
    for s in cfg.schemes:
        cols += _BOUND_COLUMNS[s]
    bounds = Table("bounds", cols, notes=["values are relative errors dT/T", f"mode: {cfg.mode.value}"])
    for T in cfg.T_grid:
        for M in cfg.M_list:
            bounds.rows.append(tuple([T, M] + _bound_row(T, M, cfg)))

    sim = cfg.sim
    model = MeasurementModel(cfg.system, control_phase=sim.control_phase if sim.control_phase is not None else math.pi / 2,
                             visibility=sim.visibility, mode=cfg.mode, tail_tol=cfg.tail_tol)
    cells = precision_sweep(sim.T_grid, model, cfg.M_list, sim.trials, sim.seed,
                            window_factors=sim.window, retune=sim.control_phase is None)
    units = {"T_K": "K", "M": "shots", "trials": "1", "successes": "1", "boundary_hits": "1",
             "empirical_rel_error": "1", "cr_rel_error": "1", "readout_cr_rel_error": "1",
             "bias_rel": "1", "p_true": "1", "failed": "bool"}
    rows = list(iter_rows(cells))
    simt = Table("simulation", [(k, u) for k, u in units.items()], notes=[
        f"master_seed: {sim.seed}", f"window factors: {sim.window[0]!r} {sim.window[1]!r}",
        "control phase: " + ("fringe midpoint at each T" if sim.control_phase is None else repr(sim.control_phase)),
    ])
    simt.rows = [tuple(r[k] for k in units) for r in rows]
    (out / "precision.gp").write_text(GNUPLOT_STUB.format(Ms=" ".join(str(m) for m in cfg.M_list)))
    return [bounds, simt], any(not c.failed for c in cells) or not cells


def cmd_bec(cfg: RunConfig, out: Path) -> dict:
    cond = cfg.condensate
    if cond is None:
        raise ConfigError(f"{cfg.path}: bec: section is required for this command")
    omega_a = phonon_frequency(cond.length_L, cond.speed_c)
    g = dot_coupling(cond)
    budget = probe_budget(cond.length_L, cond.dot_spacing, cond.healing_length)
    params = SystemParams.build(omega_a, abs(g), delta=cfg.system.delta)
    T_ref = cfg.T_grid[0] if cfg.T_grid else None
    v = validity_report(params, thresholds=cfg.thresholds, T=T_ref, g_aa=cond.g_aa)
    warnings = list(v.notes)
    if g == 0.0:
        warnings.append("g = 0: the dot does not couple to the phonon mode, no temperature information")
    if cond.volume_is_default:
        warnings.append("volume not given, defaulted to L^3")
    report = {
        "omega_a_hz": ordinary(omega_a),
        "g_hz": ordinary(g),
        "delta_hz": ordinary(cfg.system.delta),
        "volume_m3": cond.volume,
        "volume_is_default": cond.volume_is_default,
        "rwa_margin": v.rwa_margin,
        "rwa_ok": v.rwa_ok,
        "adiabatic_margin": v.adiabatic_margin,
        "adiabatic_reference": v.adiabatic_reference,
        "adiabatic_ok": v.adiabatic_ok,
        "adiabatic_n_eval": v.n_eval,
        "interaction_time_s": v.interaction_time,
        "probe_budget": budget,
        "probe_rule": INDEPENDENCE_MESSAGE,
        "unruh": [{"acceleration_m_s2": a, "T_U_K": unruh_temperature(a, cond.speed_c)} for a in cfg.accelerations],
        "warnings": warnings,
    }
    lines = [
        f"phonon frequency    {report['omega_a_hz']:.6g} Hz",
        f"dot coupling g      {report['g_hz']:.6g} Hz",
        f"RWA margin          {v.rwa_margin:.4g} ({'ok' if v.rwa_ok else 'FAIL'}, threshold {cfg.thresholds.rwa})",
        f"adiabatic margin    {v.adiabatic_margin:.4g} ({'ok' if v.adiabatic_ok else 'FAIL'}, "
        f"threshold {cfg.thresholds.adiabatic}; g t/2 = {v.adiabatic_reference:.4g})",
        f"probe budget        {budget}",
    ]
    lines += [f"Unruh T at a={u['acceleration_m_s2']:g} m/s^2   {u['T_U_K'] / NANOKELVIN:.4g} nK" for u in report["unruh"]]
    lines += [f"warning: {w}" for w in warnings]
    report["text"] = "\n".join(lines)
    return report


def cmd_verify(out: Path) -> tuple[list[str], list[str]]:
    """Re-read outputs and re-check row invariants.  Returns (failures, advisories)."""
    fails, notes = [], []
    close = lambda a, b, rel: abs(a - b) <= rel * max(abs(a), abs(b))

    p = out / "phases.csv"
    if p.exists():
        _, rows = read_table(p)
        for i, r in enumerate(rows):
            if r["singular"]:
                continue
            if not r["gamma_g_minus_exact"] < r["gamma_d_minus_exact"]:
                fails.append(f"phases.csv row {i}: geometric phase not below dynamical phase")
            if not close(r["approx_ratio"], APPROX_RATIO, 1e-12):
                fails.append(f"phases.csv row {i}: approx ratio {r['approx_ratio']!r} != 1/(4 pi)")

    p = out / "bounds.csv"
    if p.exists():
        header, rows = read_table(p)
        outside = {}
        for i, r in enumerate(rows):
            for pre in ("ramsey", "mz_dynamical"):
                if f"{pre}_lower" not in header:
                    continue
                lo, hi, ex = r[f"{pre}_lower"], r[f"{pre}_upper"], r[f"{pre}_exact"]
                if not (lo <= hi and close(hi / lo, 2.0, 1e-12)):
                    fails.append(f"bounds.csv row {i}: {pre} interval is not [x, 2x]")
                if not lo <= ex <= hi:
                    n, worst = outside.get(pre, (0, 0.0))
                    outside[pre] = (n + 1, max(worst, ex / hi if ex > hi else lo / ex))
            if "ramsey_exact" in header and "mz_dynamical_exact" in header:
                if not close(r["ramsey_exact"] * 2, r["mz_dynamical_exact"], 1e-12):
                    fails.append(f"bounds.csv row {i}: Ramsey error is not half the MZ dynamical error")
        for pre, (n, worst) in outside.items():
            notes.append(f"bounds.csv: {pre} exact error outside the printed interval in {n}/{len(rows)} rows "
                         f"(worst by a factor {worst:.4f})")

    p = out / "simulation.csv"
    if p.exists():
        _, rows = read_table(p)
        for i, r in enumerate(rows):
            if not 0.0 <= r["p_true"] <= 1.0:
                fails.append(f"simulation.csv row {i}: probability {r['p_true']!r} outside [0, 1]")
            if not 0 <= r["successes"] <= r["trials"]:
                fails.append(f"simulation.csv row {i}: success count out of range")

    p = out / "gamma_surface.csv"
    if p.exists():
        _, rows = read_table(p)
        for i, r in enumerate(rows):
            if bool(r["valid"]) != (bool(r["rwa_ok"]) and bool(r["adiabatic_ok"])):
                fails.append(f"gamma_surface.csv row {i}: validity flag inconsistent")

    m = out / MANIFEST
    if m.exists():
        for command, run in json.loads(m.read_text()).get("runs", {}).items():
            for name, digest in run["outputs"].items():
                f = out / name
                if not f.exists():
                    fails.append(f"{name} listed by '{command}' run is missing")
                elif sha256_file(f) != digest:
                    fails.append(f"{name} digest differs from the '{command}' manifest entry")
    return fails, notes


# -- driver ------------------------------------------------------------------


def resolve_out(arg: str | None, cfg: RunConfig) -> Path:
    if arg:
        return Path(arg)
    if os.environ.get(ENV_OUT):
        return Path(os.environ[ENV_OUT])
    if cfg.out_dir:
        d = Path(cfg.out_dir)
        return d if d.is_absolute() else cfg.path.parent / d
    return Path("thermo_out")


def write_manifest(out: Path, cfg: RunConfig, command: str, started: str, files: list[Path]) -> None:
    path = out / MANIFEST
    doc = json.loads(path.read_text()) if path.exists() else {}
    doc.update({"tool": "bec_thermo", "version": __version__})
    doc.setdefault("runs", {})[command] = {
        "config": str(cfg.path),
        "config_sha256": cfg.digest,
        "master_seed": cfg.sim.seed,
        "started_utc": started,
        "finished_utc": _now(),
        "outputs": {f.name: sha256_file(f) for f in sorted(files)},
    }
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v <= U64_MAX:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thermo", description="Dynamical-phase BEC thermometry.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "phases": "thermal geometric and dynamical phases over the T grid",
        "surface": "Gamma_D over a (g, delta) grid with validity flags",
        "precision": "Cramer-Rao curves and Monte-Carlo MLE sweep",
        "bec": "condensate-to-model mapping and validity report",
        "verify": "re-check invariants of written outputs",
    }
    for name, h in helps.items():
        p = sub.add_parser(name, help=h)
        p.add_argument("--config", required=name != "verify", help="TOML run configuration")
        p.add_argument("--out", help=f"output directory (overrides ${ENV_OUT} and the config)")
        p.add_argument("--seed", type=_seed, help="master seed (overrides [sim] seed)")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    started = _now()
    try:
        if args.command == "verify" and args.config is None:
            out = Path(args.out or os.environ.get(ENV_OUT) or "thermo_out")
        else:
            cfg = load_config(args.config)
            if args.seed is not None:
                cfg = replace(cfg, sim=replace(cfg.sim, seed=args.seed))
            out = resolve_out(args.out, cfg)

        if args.command == "verify":
            if not out.is_dir():
                print(f"error: no output directory {out}", file=sys.stderr)
                return EXIT_CONFIG
            fails, notes = cmd_verify(out)
            for n in notes:
                print(f"note: {n}")
            for f in fails:
                print(f"FAIL: {f}")
            print(f"verify: {len(fails)} failure(s), {len(notes)} note(s)")
            return EXIT_VERIFY if fails else EXIT_OK

        out.mkdir(parents=True, exist_ok=True)
        if args.command == "bec":
            report = cmd_bec(cfg, out)
            print(report["text"])
            for w in report["warnings"]:
                print(f"warning: {w}", file=sys.stderr)
            files = [out / "bec_report.json", out / "bec_report.txt"]
            files[0].write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
            files[1].write_text(report["text"] + "\n")
            write_manifest(out, cfg, args.command, started, files)
            return EXIT_OK

        runner = {"phases": cmd_phases, "surface": cmd_surface, "precision": cmd_precision}[args.command]
        tables, any_ok = runner(cfg, out)
        files = []
        for t in tables:
            files += write_table(t, out, cfg, args.command)
        if args.command == "precision":
            files.append(out / "precision.gp")
        write_manifest(out, cfg, args.command, started, files)
        for f in files:
            print(f)
        if not any_ok:
            print("error: every cell failed", file=sys.stderr)
            return EXIT_ALL_FAILED
        return EXIT_OK
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ThermoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
