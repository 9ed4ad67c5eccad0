"""Command line: ``ballrot {eigs, solve1, solve2, decompose, verify}``.

Exit codes: 0 success, 2 usage or configuration error, 3 the problem has no
solution (Fredholm condition violated), 4 a verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from . import iofmt, verification
from .ballgrid import build_grid
from .calculus import random_interior_points
from .eigenbasis import resolve_families
from .exceptions import BallrotError

EXIT_OK, EXIT_USAGE, EXIT_UNSOLVABLE, EXIT_VERIFY = 0, 2, 3, 4

_CONFIG_KEYS = {"radius", "n_max", "m_max", "grid", "lam", "nu2", "seed", "out", "format",
                "suite", "family", "samples", "field"}


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser, n_max: int | None = 4) -> None:
    p.add_argument("--radius", type=float, default=None, help="ball radius R (default 1)")
    p.add_argument("--n-max", type=int, default=n_max, help="largest harmonic degree")
    p.add_argument("--m-max", type=int, default=3, help="radial zeros per degree")
    p.add_argument("--format", choices=("text", "csv", "json", "vtk"), default=None)
    p.add_argument("--out", default=None, help="output file (eigs, verify) or directory (solve)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="YAML file; its values override flags")


def _solve_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("field", nargs="?", default=None, help="YAML field spec")
    p.add_argument("--grid", type=int, nargs=3, metavar=("NR", "NT", "NP"), default=None)
    p.add_argument("--samples", type=int, default=200, help="interior sample points to export")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ballrot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigs", help="eigenvalue tables with multiplicities")
    _common(p)
    p.add_argument("--family", default="all",
                   choices=("all", "curl", "curl_plus", "curl_minus", "graddiv"))

    p = sub.add_parser("solve1", help="rot u + lam u = f")
    _common(p)
    _solve_opts(p)
    p.add_argument("--lam", type=float, default=None)

    p = sub.add_parser("solve2", help="grad div w + nu2 w = f")
    _common(p)
    _solve_opts(p)
    p.add_argument("--nu2", type=float, default=None)

    p = sub.add_parser("decompose", help="Helmholtz-Weyl split of a field")
    _common(p)
    _solve_opts(p)

    p = sub.add_parser("verify", help="run the invariant suites")
    _common(p)
    p.add_argument("--grid", type=int, nargs=3, metavar=("NR", "NT", "NP"), default=None)
    p.add_argument("--suite", default="all", choices=("all",) + verification.SUITES)
    return parser


def _apply_config(args: argparse.Namespace) -> None:
    if not args.config:
        return
    try:
        doc = yaml.safe_load(Path(args.config).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("config must be a mapping")
    for key, value in doc.items():
        if key not in _CONFIG_KEYS:
            raise UsageError(f"config: unknown key {key!r}")
        if not hasattr(args, key):
            raise UsageError(f"config: key {key!r} does not apply to '{args.command}'")
        setattr(args, key, value)


def _check_positive(args) -> None:
    if args.radius is not None and not args.radius > 0:
        raise UsageError("--radius must be > 0")
    if args.m_max is not None and args.m_max < 1:
        raise UsageError("--m-max must be >= 1")
    if getattr(args, "samples", 1) < 0:
        raise UsageError("--samples must be >= 0")


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------- commands

def cmd_eigs(args) -> int:
    fmt = args.format or "text"
    if fmt == "vtk":
        raise UsageError("--format vtk does not apply to eigenvalue tables")
    R = args.radius or 1.0
    rows = []
    for fam in resolve_families(args.family):
        zfam = "graddiv" if fam == "graddiv" else "curl"
        if args.n_max < (0 if zfam == "graddiv" else 1):
            raise UsageError(f"{zfam} family requires --n-max >= 1 (n = 0 has no {zfam} modes)")
        table, hit = iofmt.load_or_build(zfam, args.n_max, args.m_max, R)
        if iofmt.cache_dir() is not None:
            print(f"zero table {zfam}: cache {'hit' if hit else 'miss'}", file=sys.stderr)
        for e in table.entries:
            kap = e.zero / R
            ev = -kap**2 if fam == "graddiv" else (kap if fam == "curl_plus" else -kap)
            rows.append([fam, e.n, e.m, e.zero, ev, 2 * e.n + 1, e.residual])
    header = ["family", "n", "m", "zero", "eigenvalue", "multiplicity", "residual"]
    if fmt == "json":
        text = json.dumps({"radius": R, "columns": header, "rows": rows}, indent=1) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows([r[0], r[1], r[2], repr(r[3]), repr(r[4]), r[5], f"{r[6]:.3e}"] for r in rows)
        text = buf.getvalue()
    else:
        lines = [f"{'family':<11}{'n':>4}{'m':>4}{'zero':>22}{'eigenvalue':>24}{'mult':>6}"]
        lines += [f"{r[0]:<11}{r[1]:>4}{r[2]:>4}{r[3]!r:>22}{r[4]!r:>24}{r[5]:>6}" for r in rows]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def _load_field(args):
    if not args.field:
        raise UsageError("a field spec file is required")
    try:
        doc = iofmt.load_field_spec(args.field)
    except OSError as exc:
        raise UsageError(f"cannot read field spec: {exc}") from None
    R = doc.radius
    if args.radius is not None and abs(args.radius - R) > 1e-15 * R:
        raise UsageError(f"--radius {args.radius} disagrees with the field spec radius {R}")
    return doc, doc.to_field(), R


def _setup(args):
    from .solver import build_bases, default_grid

    doc, f, R = _load_field(args)
    if args.n_max is None or args.n_max < 1:
        raise UsageError("--n-max must be >= 1 for solves")
    bases = build_bases(args.n_max, args.m_max, R)
    grid = build_grid(R, *[int(v) for v in args.grid]) if args.grid else default_grid(bases)
    return doc, f, bases, grid


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _solve(args, problem: int) -> int:
    from .solver import solve_problem1, solve_problem2

    shift = args.lam if problem == 1 else args.nu2
    name = "--lam" if problem == 1 else "--nu2"
    if shift is None:
        raise UsageError(f"{name} is required")
    if shift == 0:
        raise UsageError(f"{name} = 0 is rejected: zero is an eigenvalue of infinite multiplicity "
                         "and the problem is not Fredholm there")
    doc, f, bases, grid = _setup(args)
    solve = solve_problem1 if problem == 1 else solve_problem2
    sol = solve(f, float(shift), bases, grid, seed=args.seed)
    report = {
        "problem": problem,
        "shift": float(shift),
        "radius": bases.radius,
        "n_max": args.n_max,
        "m_max": args.m_max,
        "grid": list(grid.shape),
        "seed": args.seed,
        "solvable": sol.solvable,
        "energy_fractions": sol.decomposition.energy_fractions(),
        "diagnostics": sol.diagnostics,
    }
    report = _jsonable(report)
    text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    fmt = args.format or "csv"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(text)
        if sol.solvable:
            (out / "coefficients.json").write_text(
                iofmt.dumps_coefficients(sol.coefficient_dict(), bases.radius,
                                         {"problem": problem, "shift": float(shift)}))
            if fmt in ("csv", "vtk") and args.samples > 0:
                pts = random_interior_points(args.samples, bases.radius, 0.0, args.seed)
                iofmt.export_samples(pts, sol(pts), out / f"samples.{fmt}", fmt)
    else:
        sys.stdout.write(text)
    if not sol.solvable:
        kern = sol.fredholm.describe()
        print(f"not solvable: right-hand side is not orthogonal to the kernel "
              f"(dimension {kern['kernel_dimension']}) at shift {shift}", file=sys.stderr)
        return EXIT_UNSOLVABLE
    return EXIT_OK


def cmd_solve1(args) -> int:
    return _solve(args, 1)


def cmd_solve2(args) -> int:
    return _solve(args, 2)


def cmd_decompose(args) -> int:
    doc, f, bases, grid = _setup(args)
    dec = f.decompose(bases, grid)
    coeffs = {**dec.f_A.as_dict(), **dec.f_V.as_dict()}
    top = sorted(coeffs.items(), key=lambda kv: (-abs(kv[1]), kv[0].family, kv[0].j))[:10]
    report = {
        "radius": bases.radius,
        "n_max": args.n_max,
        "m_max": args.m_max,
        "grid": list(grid.shape),
        "norm2": dec.norm2,
        "energy_A": dec.f_A.energy(),
        "energy_V": dec.f_V.energy(),
        "span_defect": dec.span_defect,
        "energy_fractions": dec.energy_fractions(),
        "largest": [[*m.key, v] for m, v in top],
    }
    text = json.dumps(_jsonable(report), indent=1, sort_keys=True) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "decomposition.json").write_text(text)
        (out / "coefficients.json").write_text(iofmt.dumps_coefficients(coeffs, bases.radius))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    fmt = args.format or "text"
    if fmt == "vtk":
        raise UsageError("--format vtk does not apply to verification reports")
    cfg = verification.VerifyConfig(radius=args.radius or 1.0, n_max=args.n_max, m_max=args.m_max,
                                    seed=args.seed)
    if args.grid:
        cfg.grid = tuple(int(v) for v in args.grid)
    names = verification.SUITES if args.suite == "all" else (args.suite,)
    rows = verification.run_suites(names, cfg)
    _emit(verification.render(rows, fmt), args.out)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_VERIFY


_COMMANDS = {"eigs": cmd_eigs, "solve1": cmd_solve1, "solve2": cmd_solve2,
             "decompose": cmd_decompose, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        _check_positive(args)
        return _COMMANDS[args.command](args)
    except (UsageError, BallrotError) as exc:
        print(f"ballrot {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
