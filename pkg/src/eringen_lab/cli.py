"""Command-line front end: runs one experiment, writes CSV data and a
gnuplot script next to it.

Exit status: 0 on success, 1 on a numeric failure (for example a stiffness
matrix that is not positive definite), 2 on a usage error.
"""
import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .assembly import parse_mode, parse_profile
from .errors import (
    EringenLabError,
    InvalidArgument,
    NotPositiveDefinite,
    NumericFailure,
    TruncationTooSmall,
    UnsupportedOperation,
)
from .kernels import KernelSpec, eval_kernel, parse_kernel
from .mesh_fem import build_space, eval_fem

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2

LOADS = {
    "one": lambda x: np.ones_like(np.asarray(x, dtype=float)),
    "x": lambda x: np.asarray(x, dtype=float),
    "sin-pi-x": lambda x: np.sin(np.pi * np.asarray(x, dtype=float)),
}

TWO_THIRDS = "0.6666666666666666"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- formatting


def format_float(v):
    """17 significant digits, exponent without padding: 6.2500000000000000e-2."""
    v = float(v)
    if not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    mantissa, exp = f"{v:.16e}".split("e")
    return f"{mantissa}e{int(exp)}"


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return str(v)


def emit_csv(header, rows, path, comments=()):
    """Write a CSV file with LF endings; `comments` go after the data as `# ...` lines."""
    path = Path(path)
    lines = [",".join(header)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    lines += [f"# {c}" for c in comments]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_plot(path, csv_names, columns, logscale=False, xlabel="", ylabel="", title=""):
    """A standalone gnuplot script plotting `columns` (x, y pairs) of each CSV."""
    path = Path(path)
    png = path.with_suffix(".png").name
    out = [
        "set terminal pngcairo size 800,600",
        f"set output '{png}'",
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
    ]
    if logscale:
        out.append("set logscale xy")
    plots = [f"'{name}' using {x}:{y} with linespoints" for name in csv_names for x, y in columns]
    out.append("plot " + ", \\\n     ".join(plots))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")


# ---------------------------------------------------------------- argument types


def parse_N_list(text):
    """``16,32,64``; ``16,...,1024`` doubles; ``a,b,...,z`` repeats the ratio b/a."""
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    try:
        if "..." in parts:
            i = parts.index("...")
            if i == 0 or i != len(parts) - 2:
                raise ValueError
            head = [int(p) for p in parts[:i]]
            stop = int(parts[-1])
            ratio = head[-1] // head[-2] if len(head) >= 2 else 2
            if ratio < 2 or (len(head) >= 2 and head[-2] * ratio != head[-1]):
                raise ValueError
            values = list(head)
            while values[-1] * ratio <= stop:
                values.append(values[-1] * ratio)
            if values[-1] != stop:
                raise ValueError
        else:
            values = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed mesh list {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"mesh sizes must be positive integers, got {text!r}")
    return values


def _kernel_arg(text):
    try:
        return parse_kernel(text)
    except InvalidArgument as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _profile_arg(text):
    try:
        return parse_profile(text)
    except InvalidArgument as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _mode_arg(text):
    try:
        return parse_mode(text)
    except InvalidArgument as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# ---------------------------------------------------------------- subcommands


def _nodal_rows(space, u):
    xs = np.concatenate([[0.0], space.dof_coordinates(), [1.0]])
    us = np.concatenate([[0.0], u, [0.0]])
    return list(zip(xs, us))


def cmd_eig_scan(args, out):
    records = ex.eig_scan(args.kernel, args.p, args.N)
    rows = [(r.N, r.h, r.primary_value) for r in records]
    comments = []
    if len(records) >= 3:
        fit = ex.slope_fit(records)
        comments.append(f"slope={format_float(fit.slope)} r_squared={format_float(fit.r_squared)}")
    emit_csv(["N", "h", "lambda_min"], rows, out / "eig-scan.csv", comments)
    emit_plot(out / "eig-scan.gp", ["eig-scan.csv"], [(2, 3)], True, "h", "lambda_min", f"{args.kernel}, p={args.p}")


def cmd_solve(args, out):
    f = LOADS[args.f]
    names, norms = [], []
    for N in args.N:
        space = build_space(N, args.p)
        u = ex.solve_eringen(args.kernel, f, N, args.p)
        name = f"solve-N{N}.csv"
        emit_csv(["x", "u"], _nodal_rows(space, u), out / name)
        names.append(name)
        norms.append((N, 1.0 / N, ex.discrete_l2_norm(space, u)))
    emit_csv(["N", "h", "l2_norm"], norms, out / "solve-norms.csv")
    emit_plot(out / "solve.gp", names, [(1, 2)], False, "x", "u", f"{args.kernel}, f={args.f}, p={args.p}")


def cmd_converge(args, out):
    records, fit = ex.convergence_study(args.alpha, args.N)
    rows = [(r.N, r.h, r.primary_value) for r in records]
    emit_csv(["N", "h", "l2_error"], rows, out / "converge.csv", [f"rate={format_float(fit.slope)}"])
    N = args.N[-1]
    space = build_space(N, 1)
    u = ex.solve_eringen(KernelSpec.riesz(args.alpha), LOADS["one"], N, 1)
    s = 1.0 - 0.5 * args.alpha
    xs = np.linspace(0.0, 1.0, 201)
    sol = [(x, eval_fem(space, u, x), ex.analytic_fractional_solution(s, x)) for x in xs]
    emit_csv(["x", "u_h", "u_exact"], sol, out / "converge-solution.csv")
    emit_plot(out / "converge.gp", ["converge.csv"], [(2, 3)], True, "h", "L2 error", f"alpha={args.alpha!r}")
    emit_plot(out / "converge-solution.gp", ["converge-solution.csv"], [(1, 2), (1, 3)], False, "x", "u")


def _emit_coercivity(records, out, stem, title):
    rows = [(r.N, r.h, r.primary_value, r.secondary_value) for r in records]
    min_positive = all(r.primary_value > 0 for r in records)
    emit_csv(["N", "h", "lambda_min", "lambda_max"], rows, out / f"{stem}.csv", [f"lambda_min_positive={str(min_positive).lower()}"])
    emit_plot(out / f"{stem}.gp", [f"{stem}.csv"], [(2, 3), (2, 4)], True, "h", "lambda", title)


def cmd_coercivity(args, out):
    records = ex.coercivity_scan(args.alpha, args.N)
    _emit_coercivity(records, out, "coercivity", f"homogeneous, alpha={args.alpha!r}")


def cmd_hetero(args, out):
    form = ex.Heterogeneous(args.profile, args.mode)
    records = ex.coercivity_scan(args.alpha, args.N, form)
    _emit_coercivity(records, out, "hetero", f"heterogeneous {args.mode.kind}, alpha={args.alpha!r}")


def cmd_mixture(args, out):
    f = LOADS[args.f]
    names = []
    for N in args.N:
        space = build_space(N, args.p)
        u = ex.solve_mixture(args.kernel, f, N, args.m, args.p)
        name = f"mixture-N{N}.csv"
        emit_csv(["x", "u"], _nodal_rows(space, u), out / name)
        names.append(name)
    emit_plot(out / "mixture.gp", names, [(1, 2)], False, "x", "u", f"m={args.m!r}, {args.kernel}")


def cmd_korn_check(args, out):
    fields = ex.standard_fields() if args.fields == "standard" else ex.random_fields(args.count, args.seed)
    pairs = ex.korn_check_2d(args.alpha, fields, args.grid)
    rows = [(fld.name, lhs, rhs, lhs / rhs if rhs else float("nan")) for fld, (lhs, rhs) in zip(fields, pairs)]
    holds = all(lhs >= rhs * (1.0 - 1e-3) for lhs, rhs in pairs)
    emit_csv(["field", "lhs", "rhs", "ratio"], rows, out / "korn-check.csv", [f"inequality_holds={str(holds).lower()}"])
    emit_plot(out / "korn-check.gp", ["korn-check.csv"], [(0, 4)], False, "field", "lhs / rhs", f"alpha={args.alpha!r}")


def cmd_kernels_plot(args, out):
    d = np.arange(1, args.samples + 1) / args.samples
    specs = [KernelSpec.cubic(), KernelSpec.linear(), KernelSpec.riesz(args.alpha), KernelSpec.riesz_half(args.alpha)]
    rows = [(di, *(eval_kernel(s, di) for s in specs)) for di in d]
    header = ["d"] + [s.variant.value.replace("-", "_") for s in specs]
    emit_csv(header, rows, out / "kernels.csv")
    emit_plot(out / "kernels.gp", ["kernels.csv"], [(1, k) for k in range(2, 6)], False, "d", "A(d)", "kernels")


# ---------------------------------------------------------------- parser

COMMANDS = {
    "eig-scan": (cmd_eig_scan, "smallest generalized eigenvalue of (K, M0) per mesh"),
    "solve": (cmd_solve, "solve the nonlocal problem and write the nodal solution"),
    "converge": (cmd_converge, "L2 error against the closed-form fractional solution"),
    "coercivity": (cmd_coercivity, "extreme eigenvalues of the Riesz form against the fractional mass"),
    "hetero": (cmd_hetero, "the same scan for the heterogeneous half-order strain form"),
    "mixture": (cmd_mixture, "solve the local/nonlocal mixture model"),
    "korn-check": (cmd_korn_check, "2-D nonlocal Korn inequality by quadrature"),
    "kernels-plot": (cmd_kernels_plot, "tabulate the interaction kernels"),
}

# flags per subcommand: name -> subcommand-specific default overrides
_FLAGS = {
    "eig-scan": {"kernel": "cubic", "p": 1, "N": "16,...,512"},
    "solve": {"kernel": "cubic", "p": 1, "N": "64", "f": "one"},
    "converge": {"alpha": TWO_THIRDS, "N": "16,...,1024"},
    "coercivity": {"alpha": TWO_THIRDS, "N": "16,...,512"},
    "hetero": {"alpha": TWO_THIRDS, "N": "16,...,256", "profile": "1", "mode": "full"},
    "mixture": {"kernel": f"riesz:{TWO_THIRDS}", "p": 1, "N": "64", "f": "one", "m": 0.5},
    "korn-check": {"alpha": TWO_THIRDS, "grid": 4, "fields": "standard", "count": 5, "seed": 0},
    "kernels-plot": {"alpha": TWO_THIRDS, "samples": 200},
}

_HELP = {
    "kernel": ("kernel: cubic, linear, riesz:<alpha> or riesz-half:<alpha>", _kernel_arg),
    "p": ("polynomial degree (1 or 2)", int),
    "N": ("mesh sizes, e.g. 16,32,64 or 16,...,1024 (doubling)", parse_N_list),
    "alpha": ("Riesz order alpha; the fractional order is s = 1 - alpha/2", float),
    "m": ("mixture fraction in (0, 1]", float),
    "f": ("load function", str),
    "profile": ("stiffness profile 'breakpoints=..; values=..; outside=..' or a constant", _profile_arg),
    "mode": ("outer domain: domain, full or full:L=<len>,tol=<tol>", _mode_arg),
    "grid": ("cells per side of the Korn quadrature grid", int),
    "fields": ("standard bump fields or seeded random ones", str),
    "count": ("number of random fields", int),
    "seed": ("seed for random fields", int),
    "samples": ("number of tabulated distances", int),
}

_CHOICES = {"f": sorted(LOADS), "p": [1, 2], "fields": ["standard", "random"]}


def _read_config(path):
    """Flat key=value file; '#' starts a comment; keys may use '-' or '_'."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        values[key.strip().replace("-", "_")] = val.strip()
    return values


def build_parser():
    parser = argparse.ArgumentParser(
        prog="eringen-lab",
        description="One-dimensional nonlocal elasticity experiments.",
        epilog="Set ERINGEN_LAB_THREADS to cap per-mesh parallelism (0 = automatic).",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    parser.subcommands = {}
    for name, (fn, doc) in COMMANDS.items():
        sp = sub.add_parser(name, help=doc, description=doc, formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        for flag, default in _FLAGS[name].items():
            text, kind = _HELP[flag]
            sp.add_argument(f"--{flag}", type=kind, default=default, choices=_CHOICES.get(flag), help=text)
        sp.add_argument("--out-dir", default="out", help="directory for CSV and plot files")
        sp.add_argument("--config", default=None, help="key=value file supplying defaults for the flags above")
        sp.set_defaults(func=fn)
        parser.subcommands[name] = sp
    return parser


def _apply_config(parser, argv):
    """Re-parse with config-file values as defaults; explicit flags still win."""
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    config = _read_config(args.config)
    sp = parser.subcommands[args.command]
    known = {a.dest: a for a in sp._actions}
    for key, val in config.items():
        if key not in known or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        action = known[key]
        if action.type is not None:
            try:
                val = action.type(val)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from None
        if action.choices is not None and val not in action.choices:
            raise UsageError(f"config key {key!r}: {val!r} not in {list(action.choices)}")
        sp.set_defaults(**{key: val})
    return parser.parse_args(argv)


def run(argv=None):
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"eringen-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args.func(args, Path(args.out_dir))
    except (NotPositiveDefinite, NumericFailure) as exc:
        print(f"eringen-lab: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidArgument, UnsupportedOperation, TruncationTooSmall) as exc:
        print(f"eringen-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EringenLabError as exc:
        print(f"eringen-lab: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"eringen-lab: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
