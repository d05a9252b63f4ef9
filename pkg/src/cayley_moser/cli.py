"""Command-line front end.

Every subcommand writes its artifacts into ``--out`` (default: the
``CAYLEY_MOSER_OUTDIR`` environment variable, else the working directory)
and echoes the main result on stdout.  Options may also come from a
``key=value`` file given with ``--config``; command-line flags win.

Exit status: 0 on success, 2 when a validation report contains a failing
check, 1 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from pathlib import Path

import numpy as np

from .asymptotics import asymptotics_report, that_limit, classify_tail
from .distributions import ResidualSpec, Tabulated, make_offer
from .errors import CayleyMoserError
from .io import dumps, write_csv, write_json
from .policy import PolicyCurve, reconstruct_offer_cdf
from .price import export_price
from .simulator import SimConfig, export_batch, simulate_batch
from .stoptime import export_stop, that_cdf
from .validate import FIGURES, ORACLE_FAMILIES, figure_replication, oracle_suite, report_passed

OUTDIR_ENV = "CAYLEY_MOSER_OUTDIR"
EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2

# family -> (constructor keyword, command-line dest)
FAMILY_PARAMS = {
    "uniform": (("a", "a"), ("b", "b")),
    "exponential": (("eta", "eta"),),
    "pareto": (("x_m", "xm"), ("alpha", "alpha")),
    "beta": (("alpha", "alpha"), ("beta", "beta")),
    "gamma": (("alpha", "alpha"), ("eta", "eta")),
    "frechet": (("alpha", "alpha"),),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:num`` for an even grid, or a comma-separated list."""
    text = text.strip()
    try:
        if ":" in text:
            lo, hi, num = text.split(":")
            n = int(num)
            if n < 1:
                raise ValueError
            return np.linspace(float(lo), float(hi), n)
        vals = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use start:stop:num or a,b,c") from None
    if vals.size == 0:
        raise argparse.ArgumentTypeError("empty grid")
    return vals


def _add_model_args(p: argparse.ArgumentParser, residual: bool = True) -> None:
    g = p.add_argument_group("offer model")
    g.add_argument("--family", choices=sorted(FAMILY_PARAMS) + ["tabulated"])
    g.add_argument("--a", type=float)
    g.add_argument("--b", type=float)
    g.add_argument("--eta", type=float)
    g.add_argument("--xm", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--tabulated", metavar="CSV", help="offer CDF as an x,F table")
    g.add_argument("--lambda", dest="lam", type=float, help="offer arrival rate")
    g.add_argument("--mu0", type=float, help="mean salvage value")
    if residual:
        g.add_argument("--residual", choices=["zero", "same", "custom"])
        g.add_argument("--residual-tabulated", metavar="CSV", help="salvage CDF for --residual custom")


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help=f"output directory (default ${OUTDIR_ENV} or .)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cayley-moser", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", metavar="FILE", help="key=value file; flags override it")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("policy", help="threshold mu(t), mu'(t) and hazard h(t) over a t-grid")
    _add_model_args(p, residual=True)
    p.add_argument("--t", type=float)
    p.add_argument("--t-grid", type=parse_grid)
    _add_out(p)

    p = sub.add_parser("price", help="sale-price law at deadline t")
    _add_model_args(p)
    p.add_argument("--t", type=float)
    p.add_argument("--x-grid", type=parse_grid)
    _add_out(p)

    p = sub.add_parser("stoptime", help="time-to-sale law at deadline t")
    _add_model_args(p)
    p.add_argument("--t", type=float)
    p.add_argument("--r-grid", type=parse_grid)
    _add_out(p)

    p = sub.add_parser("asymptotics", help="tail class, limit law and convergence checks")
    _add_model_args(p)
    p.add_argument("--t", type=float, help="deadline for the optional T/t table")
    p.add_argument("--s-grid", type=parse_grid)
    _add_out(p)

    p = sub.add_parser("simulate", help="Monte Carlo batch of sale prices and times")
    _add_model_args(p)
    p.add_argument("--t", type=float)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    _add_out(p)

    p = sub.add_parser("validate", help="figure replication or closed-form oracle suite")
    p.add_argument("--figure", choices=sorted(FIGURES) + ["all"])
    p.add_argument("--oracle", action="store_true", help="run the closed-form oracle suite")
    _add_model_args(p, residual=False)
    p.add_argument("--t-grid", type=parse_grid)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    _add_out(p)

    p = sub.add_parser("reconstruct", help="offer CDF from sampled policy values")
    p.add_argument("--input", metavar="CSV", help="t,mu samples")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--support-max", type=float)
    _add_out(p)
    return parser


# ---------------------------------------------------------------------------
# configuration


def read_config(path) -> list[str]:
    """Turn a key=value file into argv tokens (``subcommand=`` comes first)."""
    tokens, command = [], None
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("_", "-")
            if key in ("subcommand", "command"):
                command = value
            elif key == "oracle":
                if value.lower() in ("1", "true", "yes"):
                    tokens.append("--oracle")
            else:
                tokens += [f"--{key}", value]
    return ([command] if command else []) + tokens


def merge_config(argv: list[str]) -> list[str]:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if known.config is None:
        return argv
    file_tokens = read_config(known.config)
    commands = {"policy", "price", "stoptime", "asymptotics", "simulate", "validate", "reconstruct"}
    cmd = [a for a in rest[:1] if a in commands]
    if cmd:
        rest = rest[1:]
        if file_tokens and file_tokens[0] in commands:
            file_tokens = file_tokens[1:]
    elif file_tokens and file_tokens[0] in commands:
        cmd, file_tokens = file_tokens[:1], file_tokens[1:]
    # flags given later win in argparse, so command-line flags follow the file
    return cmd + file_tokens + rest


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUTDIR_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require(args, *names) -> None:
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + ("lambda" if n == "lam" else n.replace("_", "-")) for n in missing)
        raise UsageError(f"missing required option(s): {flags}")


def build_offer(args):
    if args.tabulated is not None and args.family in (None, "tabulated"):
        return Tabulated.from_csv(args.tabulated)
    if args.family is None:
        raise UsageError("give --family or --tabulated")
    if args.family == "tabulated":
        raise UsageError("--family tabulated needs --tabulated CSV")
    kwargs = {}
    for key, dest in FAMILY_PARAMS[args.family]:
        v = getattr(args, dest)
        if v is None:
            raise UsageError(f"family {args.family} needs --{dest}")
        kwargs[key] = v
    return make_offer(args.family, **kwargs)


def build_residual(args, offer) -> ResidualSpec:
    kind = getattr(args, "residual", None)
    if kind == "same":
        res = ResidualSpec.same_as(offer)
    elif kind == "zero":
        res = ResidualSpec.zero()
    elif kind == "custom":
        if args.residual_tabulated is not None:
            res = ResidualSpec.custom(Tabulated.from_csv(args.residual_tabulated))
        elif args.mu0 is not None:
            res = ResidualSpec.point(args.mu0)
        else:
            raise UsageError("--residual custom needs --residual-tabulated or --mu0")
    elif args.mu0 is not None:
        # only the mean enters the policy; salvage taken as deterministic
        res = ResidualSpec.point(args.mu0)
    else:
        raise UsageError("give --residual or --mu0")
    if args.mu0 is not None and not math.isclose(args.mu0, res.mean, rel_tol=1e-12, abs_tol=1e-12):
        raise UsageError(f"--mu0 {args.mu0} differs from the residual mean {res.mean}")
    return res


def build_model(args):
    _require(args, "lam")
    offer = build_offer(args)
    residual = build_residual(args, offer)
    return offer, residual, PolicyCurve(offer, residual.mean, args.lam)


def _echo(obj) -> None:
    sys.stdout.write(dumps(obj) + "\n")


def _echo_file(path) -> None:
    sys.stdout.write(Path(path).read_text())


# ---------------------------------------------------------------------------
# subcommands


def cmd_policy(args) -> int:
    if args.t_grid is None and args.t is None:
        raise UsageError("give --t or --t-grid")
    _, _, curve = build_model(args)
    grid = args.t_grid if args.t_grid is not None else np.array([args.t])
    path = _out_dir(args) / "policy.csv"
    curve.to_csv(path, grid)
    _echo_file(path)
    return EXIT_OK


def _default_x_grid(offer, curve, t) -> np.ndarray:
    lo = min(offer.support_min, curve.mu0)
    if math.isfinite(offer.support_max):
        hi = offer.support_max
    else:
        hi = float(offer.quantile(1.0 - 1e-4))
        hi = max(hi, float(curve.mu(t)) * 2.0)
    return np.linspace(lo, hi, 201)


def cmd_price(args) -> int:
    _require(args, "t")
    offer, residual, curve = build_model(args)
    grid = args.x_grid if args.x_grid is not None else _default_x_grid(offer, curve, args.t)
    out = _out_dir(args)
    summary = export_price(curve, residual, args.t, grid, out / "price.csv", out / "price.json")
    _echo(summary.as_dict())
    return EXIT_OK


def cmd_stoptime(args) -> int:
    _require(args, "t")
    _, _, curve = build_model(args)
    grid = args.r_grid if args.r_grid is not None else np.linspace(0.0, args.t, 201)
    out = _out_dir(args)
    law = export_stop(curve, args.t, grid, out / "stoptime.csv", out / "stoptime.json")
    _echo(law.as_dict())
    return EXIT_OK


def cmd_asymptotics(args) -> int:
    offer, residual, curve = build_model(args)
    report = asymptotics_report(curve, residual)
    out = _out_dir(args)
    write_json(out / "asymptotics.json", report)
    if args.s_grid is not None:
        _require(args, "t")
        s = args.s_grid
        rows = np.column_stack([s, that_limit(classify_tail(offer), s), that_cdf(curve, args.t, s)])
        write_csv(out / "asymptotics_that.csv", ["s", "limit", "exact"], rows)
    _echo(report)
    return EXIT_OK if report_passed(report) else EXIT_FAILED


def cmd_simulate(args) -> int:
    _require(args, "t")
    offer, residual, curve = build_model(args)
    cfg = SimConfig(offer, residual, curve, args.t, args.n, args.seed, args.threads)
    out = _out_dir(args)
    summary = export_batch(simulate_batch(cfg), out / "simulate.csv", out / "simulate_summary.json")
    _echo(summary.as_dict())
    return EXIT_OK


def cmd_validate(args) -> int:
    out = _out_dir(args)
    if args.oracle == (args.figure is not None):
        raise UsageError("give exactly one of --figure or --oracle")
    if args.oracle:
        if args.family not in ORACLE_FAMILIES:
            raise UsageError(f"--oracle needs --family in {ORACLE_FAMILIES}")
        _require(args, "lam", "t_grid")
        offer = build_offer(args)
        params = offer.params()
        report = oracle_suite(args.family, params, args.lam, args.t_grid)
        write_json(out / f"oracle_{args.family}_report.json", report)
        _echo(report)
        return EXIT_OK if report_passed(report) else EXIT_FAILED
    ids = sorted(FIGURES) if args.figure == "all" else [args.figure]
    ok = True
    for fig in ids:
        report = figure_replication(fig, args.n, args.seed, out_dir=out, threads=args.threads)
        ok &= report_passed(report)
        _echo(report)
    return EXIT_OK if ok else EXIT_FAILED


def _read_policy_samples(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0][:2]] != ["t", "mu"]:
        raise UsageError(f"{path}: header must start with 't,mu'")
    data = np.array([[float(r[0]), float(r[1])] for r in rows[1:] if r], dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise UsageError(f"{path}: no samples")
    return data[:, 0], data[:, 1]


def cmd_reconstruct(args) -> int:
    _require(args, "input", "lam")
    t, mu = _read_policy_samples(args.input)
    tab = reconstruct_offer_cdf(t, mu, args.lam, support_max=args.support_max)
    path = _out_dir(args) / "reconstructed.csv"
    write_csv(path, ["x", "F"], np.column_stack([tab.x, tab.F]))
    _echo({"rows": int(tab.x.size), "support_min": tab.support_min, "support_max": tab.support_max, "path": str(path)})
    return EXIT_OK


COMMANDS = {
    "policy": cmd_policy,
    "price": cmd_price,
    "stoptime": cmd_stoptime,
    "asymptotics": cmd_asymptotics,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
    "reconstruct": cmd_reconstruct,
}


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(merge_config(argv))
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, CayleyMoserError, OSError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"cayley-moser: error: {msg}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
