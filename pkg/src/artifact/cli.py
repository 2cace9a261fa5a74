"""Command-line entry point.

Every command accepts ``--config FILE`` (lines ``key = value`` using the
long option names) and ``--out DIR``; flags override the file.  Outputs are
CSV files headed by ``# config_hash=...`` plus two-column ``.dat`` files
for plotting.  Exit status: 0 success, 2 usage, 3 invalid input,
4 numerical accuracy failure.
"""

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from .config import CODE_VERSION, array_digest, canonical, config_hash, num
from .errors import NumericAccuracyError, ValidationError

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3, 4


# ------------------------------------------------------------ value types


def float_list(text):
    try:
        vals = [float(x) for x in str(text).replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def int_list(text):
    vals = float_list(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}")
    return [int(v) for v in vals]


def rectangle(text):
    vals = float_list(text)
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("rectangle needs sigma_lo,sigma_hi,t_lo,t_hi")
    return vals


def complex_value(text):
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def t_value(text):
    return "auto" if str(text) == "auto" else float(text)


# ------------------------------------------------------------- parser


def _common(p):
    p.add_argument("--config", help="key = value file; flags take precedence")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)


def _spec_args(p, default="riemann"):
    p.add_argument("--spec", default=default, help="builtin name")
    p.add_argument("--spec-file", help="spec file (overrides --spec)")
    p.add_argument("--generic", action="store_true", help="strip the closed form")


def build_parser():
    parser = argparse.ArgumentParser(prog="artifact", description="Matsumoto zeta-functions and zero-shift universality")
    parser.add_argument("--version", action="version", version=CODE_VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("zeros", help="build a zero table")
    _common(p)
    p.add_argument("--kmax", type=int, default=1000)
    p.add_argument("--bracket-width", type=float, default=1e-8)
    p.add_argument("--input", help="existing table to extend (never modified)")
    p.add_argument("--output", default="zeros.txt", help="file name inside --out")

    p = sub.add_parser("eval", help="evaluate a spec at points")
    _common(p)
    _spec_args(p)
    p.add_argument("--s", type=complex_value, action="append", required=False, help="point, e.g. 0.75+100j (repeatable)")
    p.add_argument("--method", choices=("auto", "closed", "euler", "series", "continued"), default="auto")
    p.add_argument("--X", type=float, default=1e4)
    p.add_argument("--P", type=int, default=10**5, help="prime cutoff for the Euler product")
    p.add_argument("--N", type=int, default=10**5, help="terms for the series")

    p = sub.add_parser("coeffs", help="Dirichlet coefficient table")
    _common(p)
    _spec_args(p)
    p.add_argument("--N", type=int, default=1000)

    p = sub.add_parser("kappa", help="mean |sum of degree-one coefficients|^2 over primes, as a function of x")
    _common(p)
    _spec_args(p)
    p.add_argument("--x", type=float_list, default="100 1000 10000 100000 1000000")

    p = sub.add_parser("diagnostics", help="local-factor, pole, growth and mean-square report")
    _common(p)
    _spec_args(p)
    p.add_argument("--P", type=int, default=1000, help="primes checked for the local-factor bounds")
    p.add_argument("--N", type=int, default=10**4, help="coefficients checked for growth")
    p.add_argument("--sigma", type=float, default=None, help="line for mean-square and growth (default mid-strip)")
    p.add_argument("--T", type=float, default=200.0)
    p.add_argument("--t-samples", type=float_list, default="50 100 200 400 800")
    p.add_argument("--X", type=float, default=1e4)

    p = sub.add_parser("truncate", help="averaged truncation error over zero shifts")
    _common(p)
    _spec_args(p)
    p.add_argument("--zeros", required=False)
    p.add_argument("--K", type=rectangle, default="0.6,0.8,0,1")
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--k-range", type=int_list, default="1000,2000")
    p.add_argument("--Xs", type=float_list, default="100 1000 10000")

    p = sub.add_parser("paircorr", help="weak Montgomery sum and pair histogram")
    _common(p)
    p.add_argument("--zeros", required=False)
    p.add_argument("--T", type=t_value, default="auto")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--exclude-diagonal", action="store_true")
    p.add_argument("--alpha1", type=float, default=-3.0)
    p.add_argument("--alpha2", type=float, default=3.0)
    p.add_argument("--bins", type=int, default=24)

    p = sub.add_parser("phases", help="equidistribution of h gamma_k log p / 2 pi")
    _common(p)
    p.add_argument("--zeros", required=False)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--primes", type=int_list, default="2 3 5")
    p.add_argument("--N", type=int, default=5000)

    p = sub.add_parser("ensemble", help="zero-shift sample against the random model")
    _common(p)
    _spec_args(p)
    p.add_argument("--zeros", required=False)
    p.add_argument("--s0", type=complex_value, default="0.75")
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--N", type=int, default=2500)
    p.add_argument("--X", type=float, default=1000.0)
    p.add_argument("--samples", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)

    for name, helptext in (("scan", "universality density scan"), ("hsweep", "density across h")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        _spec_args(p)
        p.add_argument("--zeros", required=False)
        p.add_argument("--K", type=rectangle, default="0.6,0.8,0,1")
        p.add_argument("--step", type=float, default=0.01)
        p.add_argument("--N", type=int, default=1000)
        p.add_argument("--X", type=float, default=1e4)
        p.add_argument(
            "--target",
            default="constant:1",
            help="constant:V | exp:c0,c1,... | spec_value:OFFSET | self_shift:J",
        )
        if name == "scan":
            p.add_argument("--h", type=float, default=1.0)
            p.add_argument("--eps", type=float_list, default="0.05 0.1 0.2 0.5 1.0")
        else:
            p.add_argument("--hs", type=float_list, default="0.5 1 2")
            p.add_argument("--eps", type=float, default=0.5)

    p = sub.add_parser("selfcheck", help="run the invariant suite")
    _common(p)
    p.add_argument("--quick", action="store_true", help="smaller zero table")
    return parser


# --------------------------------------------------------------- config


def read_config_file(path):
    """key = value lines; '#' starts a comment; keys use option names (dashes or underscores)."""
    out = {}
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"config file {path} does not exist")
    for lineno, raw in enumerate(p.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def parse(argv):
    parser = build_parser()
    first = parser.parse_args(argv)
    if not getattr(first, "config", None):
        return first
    values = read_config_file(first.config)
    sub = _subparser(parser, first.command)
    known = {a.dest: a for a in sub._actions}
    unknown = sorted(set(values) - set(known) - {"config"})
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
    defaults = {}
    for key, text in values.items():
        action = known.get(key)
        if action is None:
            continue
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = text.lower() in ("1", "yes", "true", "on")
        else:
            defaults[key] = text  # string defaults pass through the option's type
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


# ----------------------------------------------------------------- helpers

_NOT_HASHED = {"config", "out", "workers", "output"}


def job_config(args):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_HASHED}
    cfg["version"] = CODE_VERSION
    return cfg


def job_hash(args, extra=None):
    cfg = job_config(args)
    if extra:
        cfg.update(extra)
    return config_hash(cfg)


def header(args, digest):
    cfg = job_config(args)
    return [f"config_hash={digest}", f"config={canonical(cfg)}"]


def out_dir(args):
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def write_dat(path, xs, ys, digest):
    lines = [f"# config_hash={digest}"] + [f"{num(x)} {num(y)}" for x, y in zip(xs, ys)]
    Path(path).write_text("\n".join(lines) + "\n")


def resolve_spec(args):
    from .matsumoto import builtin_spec, generic_copy, load_spec

    if getattr(args, "spec_file", None):
        if not Path(args.spec_file).is_file():
            raise ValidationError(f"spec file {args.spec_file} does not exist")
        spec = load_spec(args.spec_file)
    else:
        spec = builtin_spec(args.spec)
    return generic_copy(spec) if args.generic and spec.closed_form is not None else spec


def load_table(args):
    from .zeros import load_zeros

    if not getattr(args, "zeros", None):
        raise ValidationError("this command needs --zeros FILE")
    if not Path(args.zeros).is_file():
        raise ValidationError(f"zero table {args.zeros} does not exist")
    return load_zeros(args.zeros)


def table_digest(table):
    return array_digest(table.gammas)


def say(text):
    print(text, flush=True)


# ---------------------------------------------------------------- commands


def cmd_zeros(args):
    from .zeros import ZeroTable, compute_zeros, load_zeros, store_zeros

    if args.kmax < 1:
        raise ValidationError("--kmax must be positive")
    if args.input:
        existing = load_zeros(args.input)
        if existing.k_max >= args.kmax:
            table = existing.head(args.kmax)
        else:
            table = compute_zeros(args.kmax, args.bracket_width, args.workers)
            old = existing.gammas
            if np.max(np.abs(table.gammas[: old.size] - old)) > max(10 * existing.bracket_width, 1e-6):
                raise NumericAccuracyError("recomputed zeros disagree with the input table")
            table = ZeroTable(table.gammas, table.bracket_width)
    else:
        table = compute_zeros(args.kmax, args.bracket_width, args.workers)
    digest = job_hash(args)
    path = out_dir(args) / args.output
    if args.input and Path(args.input).resolve() == path.resolve():
        raise ValidationError("refusing to overwrite the input table")
    store_zeros(table, path, extra_header=[f"config_hash={digest}"])
    say(f"wrote {table.k_max} zeros to {path} (gamma_max = {table.gammas[-1]:.6f})")


def cmd_eval(args):
    from .matsumoto import analytic_eval_with_error, euler_product_eval, euler_tail_bound, series_eval, series_tail_bound
    from .smoothing import continued_eval

    spec = resolve_spec(args)
    points = args.s or [complex(2.0)]
    rows = []
    for s in points:
        method = args.method
        if method == "auto":
            method = "closed" if spec.closed_form is not None else ("euler" if s.real > spec.abscissa + 0.5 else "continued")
        if method == "closed":
            if spec.closed_form is None:
                raise ValidationError(f"{spec.name} has no closed form")
            val, err = analytic_eval_with_error(spec, s, args.X)
        elif method == "euler":
            val, err = euler_product_eval(spec, s, args.P), euler_tail_bound(spec, s.real, args.P)
            err = err * abs(val)
        elif method == "series":
            val, err = series_eval(spec, s, args.N), series_tail_bound(spec, s.real, args.N)
        else:
            val, err = continued_eval(spec, s, args.X)
        rows.append((s, method, complex(val), float(err)))
    digest = job_hash(args)
    lines = [f"# {h}" for h in header(args, digest)] + ["sigma,t,method,re,im,error_estimate"]
    for s, m, v, e in rows:
        lines.append(f"{num(s.real)},{num(s.imag)},{m},{num(v.real)},{num(v.imag)},{num(e)}")
        say(f"{spec.name}({s.real:g}{s.imag:+g}i) = {v.real:.12g}{v.imag:+.12g}i  [{m}, err {e:.2e}]")
    (out_dir(args) / "eval.csv").write_text("\n".join(lines) + "\n")


def cmd_coeffs(args):
    from .matsumoto import dirichlet_coeffs

    spec = resolve_spec(args)
    if args.N < 1:
        raise ValidationError("--N must be positive")
    table = dirichlet_coeffs(spec, args.N)
    digest = job_hash(args)
    d = out_dir(args)
    table.to_csv(d / "coeffs.csv", header(args, digest))
    n = np.arange(1, table.N + 1)
    write_dat(d / "coeffs.dat", n, np.abs(table.values[1:]), digest)
    say(f"wrote {table.N} coefficients of {spec.name} to {d / 'coeffs.csv'}")


def cmd_kappa(args):
    from .matsumoto import kappa_statistic

    spec = resolve_spec(args)
    xs = args.x
    ks = [kappa_statistic(spec, x) for x in xs]
    digest = job_hash(args)
    d = out_dir(args)
    lines = [f"# {h}" for h in header(args, digest)] + ["x,kappa"] + [f"{num(x)},{num(k)}" for x, k in zip(xs, ks)]
    (d / "kappa.csv").write_text("\n".join(lines) + "\n")
    write_dat(d / "kappa.dat", xs, ks, digest)
    for x, k in zip(xs, ks):
        say(f"kappa({x:g}) = {num(k)}")


def cmd_diagnostics(args):
    from .matsumoto import dirichlet_coeffs, growth_diagnostic, mean_square_diagnostic

    spec = resolve_spec(args)
    lines = []
    spec.local_factors(args.P)  # raises on any violation of g(n) <= C1 p^alpha, |a| <= p^beta
    lines.append(f"local factors: bounds hold for p <= {args.P}")
    ratio = dirichlet_coeffs(spec, args.N).growth_ratio(spec.alpha + spec.beta)
    lines.append(f"coefficients: max |b_n| / n^(alpha+beta+0.1) over rough n <= {args.N}: {ratio:.6g}")
    strip_poles = spec.strip_poles()
    lines.append(f"poles: rho = {spec.rho}; poles with Re >= rho: {[(p.location, p.residue, p.order) for p in strip_poles]}")
    sigma = args.sigma if args.sigma is not None else 0.5 * (spec.rho + min(spec.abscissa, min((complex(p.location).real for p in strip_poles), default=spec.abscissa)))
    g = growth_diagnostic(spec, sigma, args.t_samples, args.X)
    lines.append(f"growth: sigma = {num(sigma)}: fitted exponent {g.slope:.6g} (declared {spec.growth_exponent}); {'ok' if g.passed else 'exceeds'}")
    m = mean_square_diagnostic(spec, sigma, args.T, args.X)
    lines.append(
        f"mean square: sigma = {num(sigma)}: (1/T) int |phi|^2 at T = {', '.join(f'{t:g}' for t in m.T_values)}: "
        f"{', '.join(f'{r:.6g}' for r in m.ratios)} (spread {m.spread:.4g})"
    )
    digest = job_hash(args)
    text = "\n".join([f"# {h}" for h in header(args, digest)] + lines) + "\n"
    (out_dir(args) / "diagnostics.txt").write_text(text)
    for line in lines:
        say(line)


def cmd_truncate(args):
    from .smoothing import truncation_error_scan
    from .universality import CompactGrid

    spec = resolve_spec(args)
    table = load_table(args)
    if len(args.k_range) != 2 or not 1 <= args.k_range[0] <= args.k_range[1]:
        raise ValidationError("--k-range needs two indices 1 <= k_lo <= k_hi")
    k_lo, k_hi = args.k_range
    shifts = args.h * np.array(table.window(k_lo, k_hi))
    K = CompactGrid(*args.K, step=args.step)
    scan = truncation_error_scan(spec, K, args.Xs, shifts)
    digest = job_hash(args, {"zeros": table_digest(table)})
    d = out_dir(args)
    scan.to_csv(d / "truncate.csv", header(args, digest))
    write_dat(d / "truncate.dat", scan.X_values, scan.mean_sup_error, digest)
    for X, e in zip(scan.X_values, scan.mean_sup_error):
        say(f"X = {X:g}: mean sup error {e:.6e}")


def cmd_paircorr(args):
    from .paircorr import pair_correlation_histogram, weak_sum

    table = load_table(args)
    T = float(table.gammas[-1]) if args.T == "auto" else args.T
    rep = weak_sum(table, T, args.c, include_diagonal=not args.exclude_diagonal)
    hist = pair_correlation_histogram(table, T, args.alpha1, args.alpha2, args.bins)
    digest = job_hash(args, {"zeros": table_digest(table)})
    d = out_dir(args)
    head = header(args, digest)
    lines = [f"# {h}" for h in head] + [
        "T,c,count,normalized,includes_diagonal,zeros_upto_T",
        f"{num(rep.T)},{num(rep.c)},{rep.count},{num(rep.normalized)},{int(rep.includes_diagonal)},{rep.zeros_upto_T}",
    ]
    (d / "weak_sum.csv").write_text("\n".join(lines) + "\n")
    hist.to_csv(d / "pair_histogram.csv", head)
    mids = 0.5 * (hist.edges[:-1] + hist.edges[1:])
    write_dat(d / "pair_histogram.dat", mids, hist.counts, digest)
    say(f"T = {T:.6f}, c = {args.c}: {rep.count} pairs, count/(T log T) = {rep.normalized:.6f}")


def cmd_phases(args):
    from .paircorr import phase_equidistribution

    table = load_table(args)
    rep = phase_equidistribution(table, args.h, args.primes, args.N)
    digest = job_hash(args, {"zeros": table_digest(table)})
    lines = [f"# {h}" for h in header(args, digest)] + ["p,ks"] + [f"{p},{num(rep.ks[p])}" for p in rep.primes]
    if not math.isnan(rep.box_discrepancy):
        lines.append(f"# box_discrepancy={num(rep.box_discrepancy)}")
    (out_dir(args) / "phases.csv").write_text("\n".join(lines) + "\n")
    for line in rep.lines():
        say(line)


def cmd_ensemble(args):
    from .random_model import ensemble_compare

    spec = resolve_spec(args)
    table = load_table(args)
    rep = ensemble_compare(spec, args.s0, args.h, args.N, args.X, sample_count=args.samples, seed=args.seed, zeros=table)
    digest = job_hash(args, {"zeros": table_digest(table)})
    d = out_dir(args)
    rep.to_csv(d / "ensemble.csv", header(args, digest))
    rep.write_summary(d / "ensemble_summary.txt", header(args, digest))
    for line in rep.summary_lines():
        say(line)


def parse_target(text, spec, table, h, X):
    from .universality import TargetFunction

    kind, _, rest = str(text).partition(":")
    try:
        if kind == "constant":
            return TargetFunction.constant(complex_value(rest or "1"))
        if kind == "exp":
            return TargetFunction.exp_polynomial([complex_value(c) for c in rest.split(",") if c])
        if kind == "spec_value":
            return TargetFunction.spec_value(spec, complex_value(rest or "0"), X)
        if kind == "self_shift":
            return TargetFunction.self_shift(spec, int(rest), table, h, X)
    except (argparse.ArgumentTypeError, ValueError) as exc:
        raise ValidationError(f"bad --target {text!r}: {exc}") from None
    raise ValidationError(f"unknown target kind {kind!r}")


def cmd_scan(args):
    from .universality import CompactGrid, universality_scan

    spec = resolve_spec(args)
    table = load_table(args)
    K = CompactGrid(*args.K, step=args.step)
    target = parse_target(args.target, spec, table, args.h, args.X)
    rep = universality_scan(spec, target, K, args.h, args.N, args.eps, table, args.X, args.workers)
    d = out_dir(args)
    rep.write(d / "scan_report.txt")
    write_dat(d / "scan_density.dat", rep.epsilons, rep.densities, rep.config_hash)
    write_dat(d / "scan_discrepancy.dat", rep.k, rep.D, rep.config_hash)
    say(f"scan {spec.name} h={args.h} N={args.N}: failures={rep.failures}")
    for e, dens in zip(rep.epsilons, rep.densities):
        say(f"  d_N({e:g}) = {dens:.6f}")


def cmd_hsweep(args):
    from .universality import CompactGrid, h_sweep

    spec = resolve_spec(args)
    table = load_table(args)
    K = CompactGrid(*args.K, step=args.step)
    target = parse_target(args.target, spec, table, 1.0, args.X)
    rows = h_sweep(spec, target, K, args.N, args.hs, args.eps, table, args.X, args.workers)
    digest = job_hash(args, {"zeros": table_digest(table)})
    d = out_dir(args)
    lines = [f"# {h}" for h in header(args, digest)] + ["h,density,failures"]
    lines += [f"{num(r.h)},{num(r.density)},{r.failures}" for r in rows]
    (d / "hsweep.csv").write_text("\n".join(lines) + "\n")
    write_dat(d / "hsweep.dat", [r.h for r in rows], [r.density for r in rows], digest)
    for r in rows:
        say(f"h = {r.h:g}: d_N({args.eps:g}) = {r.density:.6f}")


def cmd_selfcheck(args):
    from .selfcheck import run_selfcheck

    ok = run_selfcheck(out=out_dir(args), quick=args.quick, log=say)
    if not ok:
        raise NumericAccuracyError("selfcheck failed")


COMMANDS = {
    "zeros": cmd_zeros,
    "eval": cmd_eval,
    "coeffs": cmd_coeffs,
    "kappa": cmd_kappa,
    "diagnostics": cmd_diagnostics,
    "truncate": cmd_truncate,
    "paircorr": cmd_paircorr,
    "phases": cmd_phases,
    "ensemble": cmd_ensemble,
    "scan": cmd_scan,
    "hsweep": cmd_hsweep,
    "selfcheck": cmd_selfcheck,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse(argv)
    except SystemExit as exc:  # argparse usage errors and --help/--version
        return int(exc.code or 0) and EXIT_USAGE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except BrokenPipeError:  # stdout closed early, e.g. piped into head
        sys.stdout = open(os.devnull, "w")
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericAccuracyError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK
