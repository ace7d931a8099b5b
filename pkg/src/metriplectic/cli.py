"""Command-line entry point: simulate, linearize, verify-geometry, reproduce."""
from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from .algebra import heavy_top_constants, so3_constants
from .config import PRESETS, ConfigError, Expectation, RunConfig, load_config, spectrum_targets
from .dynamics import IntegrationError, Trajectory, detect_relaxation, integrate, monitor_report
from .geometry import connection_euclidean, curvature_constant_gamma, metriplectic_matrix
from .models import BRACKET_NORMALIZATION, DomainError, TopParams
from .stability import Equilibrium, analyze, describe_real_parts, spectrum, linearize

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_TOLERANCE = 0, 1, 2, 3

# reproduction tolerances for the figure presets
DRIFT_TOL = 1e-8
STEP_DS_TOL = -1e-9
GEOMETRY_TOL = 1e-12


def seed_from_env(default: int = 0) -> int:
    """METRIPLECTIC_SEED is reserved; it only seeds the random probes of verify-geometry."""
    raw = os.environ.get("METRIPLECTIC_SEED")
    return default if raw in (None, "") else int(raw)


def _fmt_c(v: complex) -> str:
    re, im = v.real, v.imag
    if im == 0:
        return f"{re:.6g}"
    return f"{re:.6g}{'+' if im > 0 else '-'}{abs(im):.6g}i"


def normalization_line() -> str:
    return (f"dissipation normalization: x{BRACKET_NORMALIZATION:g} "
            "(curvature bracket factor 1/4 absorbed into lambda)")


# -- verify-geometry --------------------------------------------------------------

def expected_curvature(name: str) -> np.ndarray:
    """+1/4 (d^ik d^jl - d^il d^jk) on the angular-momentum block, zero elsewhere."""
    n = 3 if name == "so3" else 6
    e = np.zeros((n, n, n, n))
    for i in range(3):
        for j in range(3):
            if i != j:
                e[i, j, i, j] = 0.25
                e[i, j, j, i] = -0.25
    return e


def verify_geometry(name: str, seed: int = 0, probes: int = 100) -> tuple[str, bool]:
    if name not in ("so3", "heavy-top"):
        raise ConfigError(f"algebra: expected so3 or heavy-top, got {name!r}")
    C = so3_constants() if name == "so3" else heavy_top_constants()
    conn = connection_euclidean(C)
    R = curvature_constant_gamma(C, conn)
    rng = np.random.default_rng(seed)

    closed = float(np.max(np.abs(R.r - expected_curvature(name))))
    sym = R.symmetry_residuals()
    degeneracy, psd = 0.0, np.inf
    for _ in range(probes):
        dh = rng.normal(size=C.dim)
        m = metriplectic_matrix(R, dh)
        degeneracy = max(degeneracy, float(np.max(np.abs(m @ dh))))
        psd = min(psd, float(np.min(np.linalg.eigvalsh(0.5 * (m + m.T)))))
    checks = {
        "antisymmetry C": C.antisymmetry_residual(),
        "Jacobi C": C.jacobi_residual(),
        "torsion": conn.torsion_residual(C),
        "metric compatibility": conn.compatibility_residual(),
        **{f"curvature {k}": v for k, v in sym.items()},
        "first Bianchi": R.bianchi_residual(),
        f"max |M.dH| ({probes} random dH)": degeneracy,
        "closed form vs expected table": closed,
    }
    entries = R.nonzero_entries(GEOMETRY_TOL)
    expected_count = int(np.count_nonzero(expected_curvature(name)))
    lines = [f"algebra: {name} (dim {C.dim}), metric: Euclidean", "",
             f"nonzero curvature entries ({len(entries)}, indices 1-based):"]
    for ix, v in entries:
        lines.append(f"  R^{''.join(str(i + 1) for i in ix)} = {v:+.15g}")
    lines += ["", "identity residuals:"]
    ok = len(entries) == expected_count
    for k, v in checks.items():
        good = v <= GEOMETRY_TOL
        ok &= good
        lines.append(f"  {k:<40s} {v:.3e}  {'ok' if good else 'FAIL'}")
    psd_ok = psd >= -GEOMETRY_TOL
    ok &= psd_ok
    lines.append(f"  {'min eigenvalue of M (PSD check)':<40s} {psd:+.3e}  {'ok' if psd_ok else 'FAIL'}")
    lines += ["", f"verdict: {'PASS' if ok else 'FAIL'}"]
    return "\n".join(lines) + "\n", ok


# -- linearize ---------------------------------------------------------------------

def linearization_report(cfg: RunConfig) -> str:
    eq = cfg.resolved_equilibrium()
    source = "config" if cfg.equilibrium is not None else "derived from conserved H and |G|^2 of z0"
    rep = analyze(cfg.params, cfg.generator, eq)
    p = cfg.params
    lines = [
        f"generator: {cfg.generator.kind.value}, lambda = {cfg.generator.lam:g}",
        f"I = ({p.i1:g}, {p.i2:g}, {p.i3:g}), xi = {p.xi:g}",
        f"equilibrium: L3* = {eq.l3:.6g}, G3* = {eq.g3:.6g} ({source})",
        normalization_line(),
        "",
        "M =",
    ]
    for row in rep.m:
        lines.append("  [" + "  ".join(f"{v:+10.5f}" for v in row) + "]")
    lines += ["", "spectrum:"]
    lines += [f"  {_fmt_c(v)}" for v in rep.spectrum]
    lines.append(f"classification: {rep.classification.value} ({describe_real_parts(rep.spectrum)})")
    if rep.closed_form is not None:
        a, b = rep.closed_form
        predicted = np.array([0, 0, a, np.conj(a), b, np.conj(b)], dtype=complex)
        dev = match_spectra(rep.spectrum, predicted)
        lines.append(f"closed form: A = {_fmt_c(a)}, B = {_fmt_c(b)}; max deviation from numeric {dev:.2e}")
    else:
        lines.append("closed form: not available for these parameters")
    if rep.condition is not None:
        lines.append(f"closed-form stability condition holds: {rep.condition}")
    return "\n".join(lines) + "\n"


def match_spectra(computed, reference) -> float:
    """Max over matched pairs of max(|d Re|, |d Im|), with the best one-to-one pairing."""
    a = np.asarray(computed, dtype=complex)
    b = np.asarray(reference, dtype=complex)
    if a.shape != b.shape:
        raise ValueError("spectra must have the same length")
    cost = np.maximum(np.abs(a.real[:, None] - b.real[None, :]), np.abs(a.imag[:, None] - b.imag[None, :]))
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


@dataclass(frozen=True)
class SpectrumRow:
    label: str
    equilibrium: Equilibrium
    computed: np.ndarray
    reported: tuple[complex, ...]
    deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tol


_TOP = TopParams.symmetric(1.0, 2.0, 1.0)


def _spectrum_row(target) -> SpectrumRow:
    vals = spectrum(linearize(_TOP, target.generator, target.equilibrium))
    return SpectrumRow(target.label, target.equilibrium, vals, target.reported,
                       match_spectra(vals, target.reported), target.tol)


def spectra_rows(jobs: int = 1) -> list[SpectrumRow]:
    targets = spectrum_targets()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_spectrum_row, targets))
    return [_spectrum_row(t) for t in targets]


def spectra_table(rows: list[SpectrumRow]) -> str:
    lines = [f"I = (1, 1, 2), xi = 1; tolerance per real/imaginary part; {normalization_line()}", ""]
    for r in rows:
        lines.append(f"{r.label}  at L3* = {r.equilibrium.l3:.6g}, G3* = {r.equilibrium.g3:.6g}")
        lines.append("  computed: " + ", ".join(_fmt_c(v) for v in r.computed))
        lines.append("  reported: " + ", ".join(_fmt_c(v) for v in r.reported))
        lines.append(f"  max deviation {r.deviation:.4f} (tol {r.tol})  {'PASS' if r.passed else 'FAIL'}")
    n = sum(r.passed for r in rows)
    lines += ["", f"{n}/{len(rows)} rows pass"]
    return "\n".join(lines) + "\n"


# -- simulate / reproduce ------------------------------------------------------------

@dataclass
class RunResult:
    traj: Trajectory
    summary: str
    checks: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def _relaxation_character(cfg: RunConfig, l3: float, g3: float) -> str:
    try:
        vals = spectrum(linearize(cfg.params, cfg.generator, Equilibrium(l3, g3)))
    except ValueError:
        return ""
    nz = vals[np.abs(vals) > 1e-10]
    if nz.size and np.any(np.abs(nz.imag) > 1e-10):
        return "damped-oscillatory"
    return "overdamped (monotone)"


def run_config(cfg: RunConfig, expect: Expectation | None = None) -> RunResult:
    t0 = time.perf_counter()
    traj = integrate(cfg.params, cfg.generator, cfg.z0, cfg.integrator, model=cfg.model)
    elapsed = time.perf_counter() - t0
    mon = monitor_report(traj, cfg.generator)
    p = cfg.params
    lines = [
        f"model: {cfg.model}, generator: {cfg.generator.kind.value}, lambda = {cfg.generator.lam:g}",
        f"I = ({p.i1:g}, {p.i2:g}, {p.i3:g}), xi = {p.xi:g}",
        f"z0 = {list(cfg.z0)}",
        normalization_line(),
        f"integrator: {cfg.integrator.method}, t_final = {cfg.integrator.t_final:g}, "
        f"{traj.steps} steps, {len(traj)} samples, {elapsed:.2f} s",
        "",
        *mon.lines(),
    ]
    for t, kind in traj.events:
        lines.append(f"event at t = {t:.6g}: {kind} (trajectory truncated at the last admissible state)")
    checks = {
        "H drift": mon.max_rel_dh < DRIFT_TOL,
        "per-step dS": mon.min_step_ds >= STEP_DS_TOL,
    }
    if mon.max_rel_dc2 is not None:
        checks["G^2 drift"] = mon.max_rel_dc2 < DRIFT_TOL
    if cfg.model == "heavy-top":
        rel = detect_relaxation(traj)
        if rel is None:
            zf = traj.states[-1]
            lines.append(f"relaxation: none detected (final L3 = {zf[2]:.6g}, G3 = {zf[5]:.6g})")
        else:
            lines.append(f"relaxation: detected at t = {rel.time:.6g} to L3* = {rel.l3:.6g}, "
                         f"G3* = {rel.g3:.6g}, {_relaxation_character(cfg, rel.l3, rel.g3)}")
        if expect is not None:
            checks["relaxation expected" if expect.relaxes else "no relaxation expected"] = (
                (rel is not None) == expect.relaxes)
            if expect.l3 is not None:
                checks["L3* target"] = rel is not None and abs(rel.l3 - expect.l3) <= expect.tol
            if expect.g3 is not None:
                checks["G3* target"] = rel is not None and abs(rel.g3 - expect.g3) <= expect.tol
    if expect is not None:
        lines += ["", "checks:"]
        lines += [f"  {k:<24s} {'PASS' if v else 'FAIL'}" for k, v in checks.items()]
    return RunResult(traj, "\n".join(lines) + "\n", checks)


def gnuplot_script(name: str, csv_name: str, title: str = "") -> str:
    panels = [("L1", 2), ("L2", 3), ("L3", 4), ("G1", 5), ("G2", 6), ("G3", 7)]
    out = [
        "# six panels, component vs t; run from the directory holding the CSV",
        'set datafile separator ","',
        "set terminal pngcairo size 1000,1000",
        f'set output "{name}.png"',
        f'set multiplot layout 3,2 title "{title or name}"',
        "set xlabel \"t\"",
    ]
    for label, col in panels:
        out.append(f'set ylabel "{label}"')
        out.append(f'plot "{csv_name}" using 1:{col} every ::1 with lines notitle')
    out.append("unset multiplot")
    return "\n".join(out) + "\n"


def write_outputs(cfg: RunConfig, result: RunResult, outdir: Path, name: str,
                  extra: str = "") -> list[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "config": outdir / f"{name}.config.json",
        "csv": outdir / f"{name}.csv",
        "summary": outdir / f"{name}.summary.txt",
    }
    paths["config"].write_text(cfg.dumps())
    result.traj.write_csv(paths["csv"])
    paths["summary"].write_text(result.summary + extra)
    if cfg.model == "heavy-top":
        paths["plot"] = outdir / f"{name}.gp"
        paths["plot"].write_text(gnuplot_script(name, paths["csv"].name, cfg.description))
    return list(paths.values())


def reproduce_preset(name: str, outdir: str) -> tuple[str, bool, str]:
    preset = PRESETS[name]
    cfg = preset.config
    result = run_config(cfg, preset.expect)
    lin = "\nlinearization:\n" + linearization_report(cfg)
    write_outputs(cfg, result, Path(outdir), name, lin)
    return name, result.passed, result.summary + lin


# -- argument handling -----------------------------------------------------------------

def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    result = run_config(cfg)
    name = cfg.output or Path(args.config).stem
    outdir = Path(args.out) if args.out else Path(".")
    paths = write_outputs(cfg, result, outdir, Path(name).name if args.out else name)
    sys.stdout.write(result.summary)
    sys.stdout.write("wrote " + ", ".join(str(p) for p in paths) + "\n")
    return EXIT_OK


def _cmd_linearize(args) -> int:
    cfg = load_config(args.config)
    sys.stdout.write(linearization_report(cfg))
    return EXIT_OK


def _cmd_verify(args) -> int:
    text, ok = verify_geometry(args.algebra, seed=args.seed)
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_TOLERANCE


def _cmd_reproduce(args) -> int:
    if args.id not in (*PRESETS, "spectra", "all"):
        raise ConfigError(f"id: unknown preset {args.id!r}; expected one of {', '.join(PRESETS)}, spectra, all")
    if args.jobs < 1:
        raise ConfigError("jobs: must be at least 1")
    ids = list(PRESETS) + ["spectra"] if args.id == "all" else [args.id]
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    ok = True
    figs = [i for i in ids if i != "spectra"]
    if args.jobs > 1 and len(figs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(reproduce_preset, figs, [str(outdir)] * len(figs)))
    else:
        results = [reproduce_preset(f, str(outdir)) for f in figs]
    for name, passed, text in results:
        ok &= passed
        sys.stdout.write(f"== {name} ==\n{text}\n")
    if "spectra" in ids:
        table = spectra_table(spectra_rows())
        (outdir / "spectra.txt").write_text(table)
        ok &= all(line.endswith("PASS") for line in table.splitlines() if "max deviation" in line)
        sys.stdout.write("== spectra ==\n" + table)
    return EXIT_OK if ok else EXIT_TOLERANCE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are validation errors; exit 2 is reserved for numerics
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="metriplectic",
                                description="Curvature-bracket dissipation for the rigid body and heavy top.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate a config and write CSV + summary")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output directory (default: path prefix from the config)")
    s.set_defaults(func=_cmd_simulate)

    s = sub.add_parser("linearize", help="stability report at the config's equilibrium")
    s.add_argument("--config", required=True)
    s.set_defaults(func=_cmd_linearize)

    s = sub.add_parser("verify-geometry", help="curvature table and identity residuals")
    s.add_argument("algebra", help="so3 or heavy-top")
    s.add_argument("--seed", type=int, default=None, help="seed for the random dH probes")
    s.set_defaults(func=_cmd_verify)

    s = sub.add_parser("reproduce", help="run a figure preset or the spectra table")
    s.add_argument("id", help=f"one of {', '.join(PRESETS)}, spectra, all")
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1, help="presets run in parallel processes")
    s.set_defaults(func=_cmd_reproduce)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", 0) is None:
        args.seed = seed_from_env()
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (IntegrationError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
