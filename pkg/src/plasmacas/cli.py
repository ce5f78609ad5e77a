"""Batch front end: points, parameter sweeps, preset dataset grids, CSV.

All core numerics is unit-free; SI enters only here through hbar*c.  Sweep
points go to a worker pool but rows are written in input order, and a fixed
float format keeps the CSV byte-identical between runs of the same config.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .asymptotics import e0, e1, theta
from .energy_exact import NumericsSpec, casimir_energy
from .errors import NumericsError
from .pfa import PfaParams, pfa_energy
from .scattering import PERFECT_CONDUCTOR, PlaneSheet, SphereSheet

HBARC_J_M = 3.1615268e-26  # hbar*c used for all SI conversion

CSV_COLUMNS = ["method", "R_m", "d_m", "L_m", "omega_s_per_m", "omega_p_per_m",
               "energy_J", "energy_dimensionless", "ratio_to_PFA_PC", "theta",
               "error_estimate", "l_max_used", "m_max_used", "status"]

_CONFIG_KEYS = {
    "method": str, "radius": float, "gap": float,
    "omega_sphere": str, "omega_plane": str,
    "lmax": int, "mmax": int, "rel_tol": float, "out": str, "threads": int,
    "gap_min": float, "gap_max": float, "gap_count": int, "gap_spacing": str,
    "radius_min": float, "radius_max": float, "radius_count": int, "radius_spacing": str,
}

_METHODS = ("exact", "pfa", "asympt", "all")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class SweepConfig:
    """Resolved sweep: explicit grids, material parameters, numerics, output."""

    method: str
    radii: tuple
    gaps: tuple
    omega_s: float
    omega_p: float
    lmax: int | None = None
    mmax: int | None = None
    rel_tol: float | None = None
    out: str = "sweep.csv"
    threads: int = 1

    def __post_init__(self):
        if self.method not in _METHODS:
            raise UsageError(f"method must be one of {_METHODS}, got {self.method!r}")
        if not self.radii or not self.gaps:
            raise UsageError("empty geometry range")
        if any(d <= 0 for d in self.gaps) or any(r <= 0 for r in self.radii):
            raise UsageError("all radii and gaps must be positive")
        if self.threads < 1:
            raise UsageError("threads must be >= 1")


def _parse_omega(text: str, name: str) -> float:
    if text.strip().lower() in ("inf", "infinity", "pc"):
        return PERFECT_CONDUCTOR
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"{name}: cannot parse {text!r}") from None
    if value < 0:
        raise UsageError(f"{name} must be >= 0 or 'inf'")
    return value


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, _, text = line.partition("=")
        key = key.strip()
        text = text.strip()
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        caster = _CONFIG_KEYS[key]
        try:
            values[key] = text if caster is str else caster(text)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: malformed value for {key}: {text!r}") from None
    return values


def _spacing(lo: float, hi: float, count: int, kind: str) -> tuple:
    if count < 1 or hi < lo or lo <= 0:
        raise UsageError(f"bad range [{lo}, {hi}] x {count}")
    if count == 1:
        return (lo,)
    if kind == "log":
        return tuple(np.geomspace(lo, hi, count))
    if kind == "linear":
        return tuple(np.linspace(lo, hi, count))
    raise UsageError(f"spacing must be 'log' or 'linear', got {kind!r}")


def parse_config(args: argparse.Namespace) -> SweepConfig:
    """Merge config file and flags (flags win) into a resolved SweepConfig."""
    conf = _read_config_file(args.config) if args.config else {}

    def pick(key, flag_value, default=None):
        if flag_value is not None:
            return flag_value
        return conf.get(key, default)

    method = pick("method", args.method, "asympt")
    omega_s = _parse_omega(str(pick("omega_sphere", args.omega_sphere, "inf")), "omega-sphere")
    omega_p = _parse_omega(str(pick("omega_plane", args.omega_plane, "inf")), "omega-plane")

    radius = pick("radius", args.radius)
    gap = pick("gap", args.gap)
    gmin, gmax = pick("gap_min", getattr(args, "gap_min", None)), pick("gap_max", getattr(args, "gap_max", None))
    if gmin is not None or gmax is not None:
        if gmin is None or gmax is None:
            raise UsageError("gap_min and gap_max must be given together")
        gaps = _spacing(gmin, gmax, int(pick("gap_count", getattr(args, "gap_count", None), 25)),
                        pick("gap_spacing", getattr(args, "gap_spacing", None), "log"))
    elif gap is not None:
        gaps = (float(gap),)
    else:
        raise UsageError("need --gap or a gap range")
    rmin, rmax = pick("radius_min", getattr(args, "radius_min", None)), pick("radius_max", getattr(args, "radius_max", None))
    if rmin is not None or rmax is not None:
        if rmin is None or rmax is None:
            raise UsageError("radius_min and radius_max must be given together")
        radii = _spacing(rmin, rmax, int(pick("radius_count", getattr(args, "radius_count", None), 1)),
                         pick("radius_spacing", getattr(args, "radius_spacing", None), "log"))
    elif radius is not None:
        radii = (float(radius),)
    else:
        raise UsageError("need --radius or a radius range")

    return SweepConfig(
        method=str(method),
        radii=radii,
        gaps=tuple(float(g) for g in gaps),
        omega_s=omega_s,
        omega_p=omega_p,
        lmax=pick("lmax", args.lmax),
        mmax=pick("mmax", args.mmax),
        rel_tol=pick("rel_tol", args.rel_tol),
        out=str(pick("out", args.out, "sweep.csv")),
        threads=int(pick("threads", args.threads, 1)),
    )


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x == PERFECT_CONDUCTOR:
        return "inf"
    return format(float(x) + 0.0, ".17g")


def _pfa_pc_energy_j(radius: float, gap: float) -> float:
    return -HBARC_J_M * math.pi ** 3 * radius / (720.0 * gap * gap)


def _compute_row(task) -> dict:
    """One CSV row; isolated so worker processes can run it."""
    method, radius, gap, omega_s, omega_p, lmax, mmax, rel_tol = task
    row = {c: None for c in CSV_COLUMNS}
    row.update(method=method, R_m=radius, d_m=gap, L_m=radius + gap,
               omega_s_per_m=omega_s, omega_p_per_m=omega_p, status="ok")
    try:
        if method == "exact":
            spec = NumericsSpec(
                l_max=lmax if lmax is not None else "auto",
                m_max=mmax if mmax is not None else "auto",
                rel_tol=rel_tol if rel_tol is not None else 1e-3)
            res = casimir_energy(SphereSheet(radius, omega_s),
                                 PlaneSheet(omega_p, radius + gap), spec)
            energy_j = res.energy * HBARC_J_M
            row.update(error_estimate=res.error_estimate * HBARC_J_M,
                       l_max_used=res.l_max_used, m_max_used=res.m_max_used)
        elif method == "pfa":
            ws = omega_s if omega_s == PERFECT_CONDUCTOR else omega_s * gap
            wp = omega_p if omega_p == PERFECT_CONDUCTOR else omega_p * gap
            energy_j = pfa_energy(PfaParams(ws, wp, radius, gap)) * HBARC_J_M
        elif method == "asympt":
            ws = omega_s if omega_s == PERFECT_CONDUCTOR else omega_s * gap
            wp = omega_p if omega_p == PERFECT_CONDUCTOR else omega_p * gap
            energy_j = (e0(radius, gap, ws, wp) + e1(radius, gap, ws, wp)) * HBARC_J_M
            if omega_s != 0.0 and omega_p != 0.0:
                row.update(theta=theta(gap, radius, omega_s, omega_p))
        else:
            raise ValueError(f"unknown method {method!r}")
        row.update(energy_J=energy_j,
                   energy_dimensionless=energy_j * gap * gap / (HBARC_J_M * radius),
                   ratio_to_PFA_PC=energy_j / _pfa_pc_energy_j(radius, gap))
    except (NumericsError, ValueError, AssertionError) as exc:
        row.update(status=f"error: {exc}")
    return row


def run_sweep(config: SweepConfig) -> int:
    """Run every point of the sweep, write the CSV, print a summary.

    Returns the process exit status: 0 if all rows succeeded, 3 if any row
    recorded an error.
    """
    methods = ("exact", "pfa", "asympt") if config.method == "all" else (config.method,)
    tasks = [(m, r, d, config.omega_s, config.omega_p, config.lmax, config.mmax, config.rel_tol)
             for r in config.radii for d in config.gaps for m in methods]

    if config.threads > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.threads) as pool:
            rows = list(pool.map(_compute_row, tasks))
    else:
        rows = [_compute_row(t) for t in tasks]

    try:
        with open(config.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    except OSError as exc:
        raise UsageError(f"cannot write output {config.out}: {exc}") from None

    n_bad = sum(1 for row in rows if row["status"] != "ok")
    print(f"{len(rows)} rows ({len(tasks) - n_bad} ok, {n_bad} failed) -> {config.out}")
    for row in rows:
        if len(rows) <= 4 or row["status"] != "ok":
            print("  " + ", ".join(f"{c}={_fmt(row[c])}" for c in
                                   ("method", "R_m", "d_m", "energy_J", "theta", "status")))
    return 3 if n_bad else 0


_GRAPHENE_OMEGA = 6.75e5  # 1/m


def _figure_config(number: int, out: str | None, threads: int) -> SweepConfig:
    """Gap grid and materials of one preset dataset (presets 4-6 loop over
    several plasma parameters in _run_figure instead)."""
    if number in (1, 2):
        gaps = _spacing(1e-6, 1.2e-4, 40, "log")
    elif number in (3, 4, 5, 6):
        gaps = _spacing(1e-7, 1e-3, 49, "log")
    else:
        raise UsageError("figure number must be 1..6")
    return SweepConfig(method="asympt", radii=(1e-3,), gaps=gaps,
                       omega_s=_GRAPHENE_OMEGA, omega_p=_GRAPHENE_OMEGA,
                       out=out or f"figure{number}.csv", threads=threads)


def _run_figure(number: int, out: str | None, threads: int) -> int:
    if number in (4, 5, 6):
        # several plasma parameters on a common gap grid
        base = _figure_config(number, out, threads)
        status = 0
        all_rows = []
        for om in (_GRAPHENE_OMEGA, 10 * _GRAPHENE_OMEGA, 100 * _GRAPHENE_OMEGA,
                   PERFECT_CONDUCTOR):
            tasks = [("asympt", r, d, om, om, None, None, None)
                     for r in base.radii for d in base.gaps]
            if threads > 1:
                with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
                    all_rows.extend(pool.map(_compute_row, tasks))
            else:
                all_rows.extend(_compute_row(t) for t in tasks)
        with open(base.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in all_rows:
                writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
                if row["status"] != "ok":
                    status = 3
        print(f"{len(all_rows)} rows -> {base.out}")
        return status
    return run_sweep(_figure_config(number, out, threads))


def _add_common(parser: argparse.ArgumentParser, sweep: bool) -> None:
    parser.add_argument("--method", choices=_METHODS)
    parser.add_argument("--radius", type=float, help="sphere radius R in m")
    parser.add_argument("--gap", type=float, help="surface gap d = L - R in m")
    parser.add_argument("--omega-sphere", help="Omega_s in 1/m, or 'inf'")
    parser.add_argument("--omega-plane", help="Omega_p in 1/m, or 'inf'")
    parser.add_argument("--lmax", type=int)
    parser.add_argument("--mmax", type=int)
    parser.add_argument("--rel-tol", type=float, dest="rel_tol")
    parser.add_argument("--out")
    parser.add_argument("--config", help="key=value config file; flags override it")
    parser.add_argument("--threads", type=int)
    if sweep:
        parser.add_argument("--gap-min", type=float)
        parser.add_argument("--gap-max", type=float)
        parser.add_argument("--gap-count", type=int)
        parser.add_argument("--gap-spacing", choices=("log", "linear"))
        parser.add_argument("--radius-min", type=float)
        parser.add_argument("--radius-max", type=float)
        parser.add_argument("--radius-count", type=int)
        parser.add_argument("--radius-spacing", choices=("log", "linear"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plasmacas",
        description="Casimir interaction of a spherical and a planar plasma sheet")
    parser.add_argument("--version", action="version",
                        version=f"plasmacas {__version__} (hbar*c = {HBARC_J_M:.7e} J*m)")
    sub = parser.add_subparsers(dest="command", required=True)
    p_point = sub.add_parser("point", help="single parameter point")
    _add_common(p_point, sweep=False)
    p_sweep = sub.add_parser("sweep", help="parameter sweep over geometry ranges")
    _add_common(p_sweep, sweep=True)
    p_fig = sub.add_parser("figure", help="emit a preset parameter-grid dataset (1..6)")
    p_fig.add_argument("number", type=int, choices=range(1, 7))
    p_fig.add_argument("--out")
    p_fig.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "figure":
            return _run_figure(args.number, args.out, args.threads)
        config = parse_config(args)
        if args.command == "point":
            config = SweepConfig(method=config.method, radii=config.radii[:1],
                                 gaps=config.gaps[:1], omega_s=config.omega_s,
                                 omega_p=config.omega_p, lmax=config.lmax,
                                 mmax=config.mmax, rel_tol=config.rel_tol,
                                 out=config.out if args.out or args.config else "point.csv",
                                 threads=1)
        return run_sweep(config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
