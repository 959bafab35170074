"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.

Every command accepts ``--config FILE`` with flat ``key=value`` lines
(``#`` starts a comment).  Keys are flag names without the leading dashes;
explicit flags override the file.
"""

from __future__ import annotations

import argparse
import csv
import sys

from . import pricing, simulation, tactics
from .core import OrnsteinUhlenbeckParams, WienerBachelierParams
from .errors import ConfigError, DomainError, EstimationError, NumericalFailure, RangeError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

METHODS = ("closed", "quad", "mc")


class UsageError(Exception):
    pass


def read_config(path) -> dict[str, str]:
    out = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise UsageError(f"{path}:{lineno}: expected key=value")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"missing required option(s): {flags}")


def _model_params(args, ou: bool):
    _require(args, "rate", "sigma")
    if ou:
        _require(args, "q")
        return OrnsteinUhlenbeckParams(args.rate, args.sigma, args.q)
    return WienerBachelierParams(args.rate, args.sigma)


def cmd_price(args) -> int:
    _require(args, "model", "s0", "strike", "maturity")
    params = _model_params(args, args.model == "ou")
    opt = pricing.OptionSpec(args.s0, args.strike, args.maturity)
    if args.method == "closed":
        res = pricing.price_call(params, opt)
    elif args.method == "quad":
        if opt.maturity == 0:
            res = pricing.price_call(params, opt)
        else:
            res = pricing.price_call_quadrature(params, opt, args.tolerance)
    else:
        if opt.maturity == 0:
            raise UsageError("monte carlo pricing needs --maturity > 0")
        cfg = simulation.SimConfig(args.paths, args.steps, opt.maturity, args.seed, args.scheme)
        res = simulation.mc_price_call(params, opt, cfg, workers=args.workers)
    line = f"value={_fmt(res.value)} method={args.method}"
    if res.stderr is not None:
        line += f" stderr={_fmt(res.stderr)}"
    print(line)
    return EXIT_OK


def cmd_compare(args) -> int:
    wb = WienerBachelierParams(args.rate, args.sigma)
    ou = OrnsteinUhlenbeckParams(args.rate, args.sigma, args.q)
    if args.points < 2:
        raise UsageError(f"--points must be at least 2, got {args.points}")
    curve = pricing.compare_curve(wb, ou, args.maturity, (args.b_min, args.b_max), args.points, args.workers)
    header = ["b", "ln_cq_minus_ln_c"]
    if args.out == "-":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        for row in curve.rows():
            w.writerow(["%.17g" % v for v in row])
        meta = sys.stderr
    else:
        simulation.write_csv_atomic(args.out, header, curve.rows())
        meta = sys.stdout
    print(f"# rows={len(curve.b)} convention: {curve.convention} maturity={curve.maturity!r}", file=meta)
    return EXIT_OK


def cmd_simulate(args) -> int:
    _require(args, "model", "paths", "steps", "maturity", "out")
    params = _model_params(args, args.model == "ou")
    cfg = simulation.SimConfig(args.paths, args.steps, args.maturity, args.seed, args.scheme)
    batch = simulation.simulate(params, args.x0, cfg, workers=args.workers)
    batch.to_csv(args.out)
    return EXIT_OK


def _read_series(path):
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows and rows[0] and not _is_number(rows[0][-1]):
        rows = rows[1:]
    try:
        return [float(r[-1]) for r in rows]
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def cmd_calibrate(args) -> int:
    _require(args, "input", "dt")
    series = _read_series(args.input)
    est = simulation.calibrate_ou(series, args.dt, rate=args.rate if args.rate is not None else 0.0)
    print(f"q={_fmt(est.q)} sigma={_fmt(est.sigma)}")
    return EXIT_OK


def cmd_tactic(args) -> int:
    _require(args, "gamma", "sigma_r")
    if not args.gamma > 0:
        raise UsageError(f"--gamma must be positive, got {args.gamma}")
    p = tactics.TacticParams(args.gamma, args.sigma_r)
    grid = tactics.KernelGrid.symmetric(args.sigma_r, args.grid_n, args.grid_span)
    report = tactics.diagnose(p, grid)
    print(f"fixed_point_residual={report.fixed_point:.6e}")
    print(f"semigroup_residual={report.semigroup:.6e}")
    print(f"htransform_deviation={report.htransform:.6e}")
    breaches = report.breaches()
    if breaches:
        for b in breaches:
            print(f"tolerance breach: {b}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ouprice", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value file of defaults")
        p.add_argument("--rate", type=float)
        p.add_argument("--sigma", type=float)
        p.add_argument("--q", type=float)

    p = sub.add_parser("price", help="price a European call")
    common(p)
    p.add_argument("--model", choices=["bs", "ou"])
    p.add_argument("--s0", type=float)
    p.add_argument("--strike", type=float)
    p.add_argument("--maturity", type=float)
    p.add_argument("--method", choices=METHODS, default="closed")
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--scheme", choices=["exact", "euler"], default="exact")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("compare", help="write ln c_q - ln c against moneyness")
    common(p)
    p.set_defaults(rate=0.0, sigma=1.0, q=1.0)
    p.add_argument("--b-min", type=float, default=-2.0)
    p.add_argument("--b-max", type=float, default=2.0)
    p.add_argument("--points", type=int, default=81)
    p.add_argument("--maturity", type=float, default=1.0)
    p.add_argument("--out", default="-")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="write simulated log-price paths")
    common(p)
    p.add_argument("--model", choices=["gbm", "ou"])
    p.add_argument("--paths", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--maturity", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scheme", choices=["exact", "euler"], default="exact")
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="fit q and sigma to a log-price series")
    p.add_argument("--config", help="key=value file of defaults")
    p.add_argument("--input")
    p.add_argument("--dt", type=float)
    p.add_argument("--rate", type=float)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("tactic", help="thermal-tactics kernel diagnostics")
    p.add_argument("--config", help="key=value file of defaults")
    p.add_argument("--gamma", type=float)
    p.add_argument("--sigma-r", type=float)
    p.add_argument("--grid-n", type=int, default=1024)
    p.add_argument("--grid-span", type=float, default=10.0)
    p.set_defaults(func=cmd_tactic)
    return parser


def _parse(parser: argparse.ArgumentParser, argv):
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    sub = parser._subparsers._group_actions[0].choices[args.command]
    dests = {a.dest: a for a in sub._actions}
    values = {}
    for key, raw in read_config(args.config).items():
        action = dests.get(key)
        if action is None or key in ("help", "config", "func"):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if action.choices is not None and raw not in action.choices:
            raise UsageError(f"config {key}={raw!r} not in {sorted(action.choices)}")
        try:
            values[key] = action.type(raw) if action.type else raw
        except ValueError:
            raise UsageError(f"config {key}={raw!r} is not a valid number") from None
    sub.set_defaults(**values)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ouprice: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, DomainError, ConfigError) as exc:
        parser.print_usage(sys.stderr)
        print(f"ouprice {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, RangeError, EstimationError) as exc:
        print(f"ouprice {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
