"""Command-line entry point.

Reports go to stdout as JSON (or to CSV files with ``--output csv``); with
``--out DIR`` the JSON/CSV files and matplotlib figures are written there.
Exit codes: 0 success, 2 validation failure, 3 numerical ambiguity, 4 I/O or
schema error.  Wall time is printed on stderr only so that reports stay
reproducible for a fixed seed.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import hilbert
from .errors import AglerError, SchemaError

SUBCOMMANDS = ("validate", "subspaces", "kernels", "realize", "slice", "trivar", "battery")


def _positive(kind):
    def conv(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"expected a positive value, got {text}")
        return v
    return conv


def _seed(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-rank", type=_positive(float), default=1e-9, help="relative rank cutoff")
    common.add_argument("--tol-psd", type=_positive(float), default=1e-7, help="PSD tolerance for kernel checks")
    common.add_argument("--tol-residual", type=_positive(float), default=1e-8,
                        help="pass threshold for identity residuals")
    common.add_argument("--fft-grid", type=_positive(int), default=64, help="initial FFT quadrature grid")
    common.add_argument("--samples", type=_positive(int), default=100, help="number of sample points or pairs")
    common.add_argument("--seed", type=_seed, default=0, help="seed for all randomized sampling")
    common.add_argument("--output", choices=("json", "csv"), default="json")
    common.add_argument("--exact", action="store_true", help="use exact rational arithmetic where possible")
    common.add_argument("--out", default=None, help="directory for report files and figures")

    parser = argparse.ArgumentParser(prog="agler", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in ("validate", "kernels", "realize"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("input")
    sp = sub.add_parser("subspaces", parents=[common])
    sp.add_argument("input")
    sp.add_argument("--which", choices=("K", "K1", "K2", "all"), default="all")
    sp = sub.add_parser("slice", parents=[common])
    sp.add_argument("input")
    sp.add_argument("--space", default="all",
                    choices=("K1_minus_K", "K1_minus_Z1K", "K2_minus_K", "K2_minus_Z2K", "all"))
    sp.add_argument("--t", action="append", default=None,
                    help="torus point as a complex number, e.g. 1, 1j, 0.6+0.8j (repeatable)")
    sp.add_argument("--random", type=int, default=10, help="random torus points when --t is absent")
    sp = sub.add_parser("trivar", parents=[common])
    sp.add_argument("input")
    sp.add_argument("--grid", type=_positive(int), default=32, help="verification grid size per coordinate")
    sub.add_parser("battery", parents=[common])
    return parser


def tolerances(args):
    return {"tol_rank": args.tol_rank, "tol_psd": args.tol_psd, "tol_residual": args.tol_residual,
            "fft_grid": args.fft_grid, "samples": args.samples, "seed": args.seed, "exact": args.exact}


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}", path=path) from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
                          line=exc.lineno, column=exc.colno) from exc


def _inner(args):
    from .inner import from_json

    return from_json(_load(args.input), exact=args.exact)


# ----------------------------------------------------------------------
# subcommands; each returns (report, csv_tables, figure_makers)


def cmd_validate(args):
    from .report import plot_torus_modulus

    phi = _inner(args)
    rep = phi.report()
    return rep, {}, [lambda d: plot_torus_modulus(phi.p, d)]


def cmd_subspaces(args):
    from .report import plot_singular_values
    from .subspaces import basis, dims_check, raw_basis

    phi = _inner(args)
    which = ("K", "K1", "K2") if args.which == "all" else (args.which,)
    bases = {w: basis(phi, w, tol_rank=args.tol_rank, exact=args.exact or None) for w in which}
    if len(which) == 1:
        rep = bases[which[0]].to_json()
    else:
        rep = {w: b.to_json() for w, b in bases.items()}
        rep["dims"] = dims_check(phi, bases, strict=False).to_dict()
    figs = []
    if not phi.is_exact or not args.exact:
        for w in which:
            sv = raw_basis(phi, w, tol_rank=args.tol_rank, exact=False)[2]
            figs.append(lambda d, sv=sv, w=w: plot_singular_values(sv, args.tol_rank, d, w))
    return rep, {}, figs


def cmd_kernels(args):
    from .hilbert import agler_residuals, canonical_kernels, sample_pairs
    from .report import PAIR_HEADER, pair_rows, plot_residuals
    from .subspaces import basis

    phi = _inner(args)
    bases = {w: basis(phi, w, tol_rank=args.tol_rank) for w in ("K", "K1", "K2")}
    can = canonical_kernels(phi, bases)
    Z, W = sample_pairs(args.samples, seed=args.seed)
    res = {
        "E1_F2": agler_residuals(phi, can["E1"], can["F2"], Z, W),
        "F1_E2": agler_residuals(phi, can["F1"], can["E2"], Z, W),
        "three_term": agler_residuals(phi, can["F1"], can["F2"], Z, W, G=can["G"]),
    }
    rep = {
        "kernels": {k: v.to_json() for k, v in can.items()},
        "dims": {k: v.dim for k, v in can.items()},
        "agler_residual": {k: float(v.max()) for k, v in res.items()},
        "pass": bool(all(v.max() <= args.tol_residual for v in res.values())),
    }
    tables = {f"residuals_{k}.csv": (PAIR_HEADER, pair_rows(Z, W, v)) for k, v in res.items()}
    return rep, tables, [lambda d: plot_residuals(res, d)]


def cmd_realize(args):
    from .realization import realize
    from .report import plot_unitary

    phi = _inner(args)
    r = realize(phi, seed=args.seed)
    rep = r.to_json()
    rep["size"] = r.size
    rep["pass"] = bool(r.residuals["transfer"] <= max(args.tol_residual, 1e-7))
    return rep, {}, [lambda d: plot_unitary(r.U, d)]


def cmd_slice(args):
    from .hilbert import canonical_kernels
    from .report import SLICE_HEADER, plot_slices
    from .restriction import SPACES, random_torus_points, slice_isometry

    phi = _inner(args)
    if args.t:
        try:
            ts = [complex(t.replace(" ", "")) for t in args.t]
        except ValueError as exc:
            raise SchemaError(f"--t: cannot parse torus point ({exc})", field="t") from exc
        if any(abs(abs(t) - 1) > 1e-9 for t in ts):
            raise SchemaError("--t: points must lie on the unit circle", field="t")
    else:
        ts = list(random_torus_points(args.random, seed=args.seed))
    spaces = sorted(SPACES) if args.space == "all" else [args.space]
    can = canonical_kernels(phi)
    reps = [slice_isometry(phi, s, t, kernels=can, m0=args.fft_grid) for s in spaces for t in ts]
    ok = all(r.exceptional or (r.gram_error <= 1e-6 and r.rank == r.onevar_dim) for r in reps)
    rep = {"slices": [r.to_dict() for r in reps], "pass": bool(ok),
           "exceptional": [r.to_dict()["t"] for r in reps if r.exceptional and r.which_space == spaces[0]]}
    rows = [[repr(complex(r.t)), r.which_space, "" if r.gram_error is None else r.gram_error, r.onevar_dim,
             int(r.exceptional)] for r in reps]
    return rep, {"slices.csv": (SLICE_HEADER, rows)}, [lambda d: plot_slices(reps, d)]


def cmd_trivar(args):
    from .report import GRID_HEADER, plot_trivar
    from .trivar import decompose, trivar_from_json, verification_grid

    p = trivar_from_json(_load(args.input), exact=args.exact)
    cert = decompose(p, grid=args.grid, seed=args.seed)
    rep = cert.to_json()
    rep["grid"] = args.grid

    def grid_rows():
        w = verification_grid(min(args.grid, 8))
        Z = np.array(np.meshgrid(w, w, w, indexing="ij")).reshape(3, -1).T
        s1, s2, s3 = cert.sos(Z)
        lhs = np.abs(cert.p(*Z.T)) ** 2 - np.abs(cert.p_t(*Z.T)) ** 2
        rhs = sum((1 - np.abs(Z[:, j]) ** 2) * s for j, s in enumerate((s1, s2, s3)))
        err = np.abs(lhs - rhs)
        return [[z[0].real, z[0].imag, z[1].real, z[1].imag, z[2].real, z[2].imag, e] for z, e in zip(Z, err)]

    return rep, {"identity_residuals.csv": (GRID_HEADER, grid_rows())}, [lambda d: plot_trivar(cert, d)]


def cmd_battery(args):
    from .battery import run_battery
    from .report import plot_battery

    rows = run_battery(seed=args.seed, samples=args.samples, tol_residual=args.tol_residual,
                       tol_rank=args.tol_rank, exact=args.exact)
    rep = {"fixtures": rows, "all_pass": all(r["pass"] for r in rows)}
    header = ["fixture", "check", "pass"]
    table = [[r["fixture"], c, int(v)] for r in rows for c, v in sorted(r["checks"].items())]
    return rep, {"battery.csv": (header, table)}, [lambda d: plot_battery(rows, d)]


COMMANDS = {"validate": cmd_validate, "subspaces": cmd_subspaces, "kernels": cmd_kernels,
            "realize": cmd_realize, "slice": cmd_slice, "trivar": cmd_trivar, "battery": cmd_battery}


def _finish_code(name, rep):
    if name == "battery":
        return 0 if rep["all_pass"] else 2
    if rep.get("pass") is False:
        return 2
    return 0


def _dump(obj):
    return json.dumps(obj, indent=1, allow_nan=True)


def run(argv=None, stdout=None):
    """Run the CLI; returns the exit code."""
    from .report import flatten, write_csv

    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 4
    hilbert.FFT_START = args.fft_grid
    t0 = time.perf_counter()
    try:
        rep, tables, figs = COMMANDS[args.subcommand](args)
        code = _finish_code(args.subcommand, rep)
    except AglerError as exc:
        err = {"subcommand": args.subcommand, **exc.to_dict(), "exit_code": exc.exit_code,
               "tolerances": tolerances(args)}
        stdout.write(_dump(err) + "\n")
        print(f"agler: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    rep = {"subcommand": args.subcommand, **rep, "tolerances": tolerances(args)}
    outdir = args.out
    try:
        if args.output == "csv":
            outdir = outdir or "agler_out"
            write_csv(os.path.join(outdir, "report.csv"), ["key", "value"], flatten(rep))
            for name, (header, rows) in tables.items():
                write_csv(os.path.join(outdir, name), header, rows)
            stdout.write(_dump({"subcommand": args.subcommand, "exit_code": code, "out": outdir}) + "\n")
        else:
            stdout.write(_dump(rep) + "\n")
        if outdir:
            os.makedirs(outdir, exist_ok=True)
            with open(os.path.join(outdir, "report.json"), "w") as fh:
                fh.write(_dump(rep) + "\n")
            for name, (header, rows) in tables.items():
                write_csv(os.path.join(outdir, name), header, rows)
            for make in figs:
                make(outdir)
    except OSError as exc:
        print(f"agler: cannot write output: {exc}", file=sys.stderr)
        return 4
    print(f"agler {args.subcommand}: {time.perf_counter() - t0:.2f} s", file=sys.stderr)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
