"""Command-line surface: construct, sweep, bounds, capacity, selftest.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.  The
BMSTRUN_WORKERS environment variable overrides the sweep worker count.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import genie_bound, run_ser_bound
from .capacity import CapacityQuery, iud_capacity, shannon_limit
from .constellations import ConstellationError, builtin, load_constellation
from .runcode import time_sharing_params
from .sim import (
    ConfigError,
    construct_code,
    emit_csv,
    load_config,
    parse_snr_spec,
    run_sweep,
)


def _parse_rate(text: str) -> tuple[int, int]:
    try:
        p, q = text.split("/")
        p, q = int(p), int(q)
    except ValueError:
        raise ConfigError(f"rate must look like P/Q, got {text!r}") from None
    if p < 1 or q < p:
        raise ConfigError(f"need 1 <= P <= Q, got {text!r}")
    return p, q


def _resolve_constellation(name: str):
    path = Path(name)
    if path.suffix and path.exists():
        return load_constellation(path)
    return builtin(name)


def _cmd_construct(args) -> int:
    c = _resolve_constellation(args.constellation)
    P, Q = _parse_rate(args.rate)
    spec, report = construct_code(
        c,
        P,
        Q,
        B=args.b,
        p_target=args.p_target,
        channel=args.channel,
        gamma_lim_db=args.gamma_lim,
        L=args.l,
        seed=args.seed,
        paper_scale=args.paper_scale,
        tol_db=args.tol_db,
    )
    for key in ("constellation", "rate", "interval", "alpha", "B", "p_target",
                "gamma_lim_db", "m", "L", "delay", "block_symbols",
                "effective_rate"):
        print(f"{key:>16}: {report[key]}")
    if report["qb_warning"]:
        print("         warning: Q*B below 1000; consider a larger B", file=sys.stderr)
    if args.csv:
        header = "constellation,rate,N,alpha,B,p_target,gamma_lim_db,m"
        row = ",".join(
            str(report[k])
            for k in ("constellation", "rate", "N", "alpha", "B", "p_target",
                      "gamma_lim_db", "m")
        )
        Path(args.csv).write_text(header + "\n" + row + "\n")
        print(f"wrote {args.csv}")
    return 0


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    result = run_sweep(config, workers=args.workers)
    out = args.output or config.output
    if out:
        emit_csv(result, out)
        print(f"wrote {out}")
    else:
        print(",".join(map(str, result.rows[0].__dataclass_fields__)))
        for row in result.rows:
            print(f"{row.snr_db},{row.frames},{row.symbols},{row.symbol_errors},"
                  f"{row.ser},{row.ser_stderr},{row.bit_errors},{row.ber},"
                  f"{row.wall_seconds}")
    return 0


def _cmd_bounds(args) -> int:
    c = _resolve_constellation(args.constellation)
    P, Q = _parse_rate(args.rate)
    N, alpha = time_sharing_params(P, Q)
    grid = parse_snr_spec(args.snr)
    lines = [
        f"# constellation={c.name}",
        f"# rate={P}/{Q}",
        f"# kind={args.kind}" + (f" m={args.memory}" if args.kind == "genie" else ""),
        "snr_db,bound_value",
    ]
    for snr in grid:
        if args.kind == "genie":
            val = genie_bound(c, N, alpha, args.memory, snr)
        else:
            val = run_ser_bound(c, N, alpha, snr)
        lines.append(f"{snr!r},{val!r}")
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
        print(f"wrote {args.output}")
    else:
        print(text, end="")
    return 0


def _cmd_capacity(args) -> int:
    c = _resolve_constellation(args.constellation)
    if args.rate:
        P, Q = _parse_rate(args.rate)
        gamma = shannon_limit(
            CapacityQuery(c, Fraction(P, Q), args.channel), tol_db=args.tol_db
        )
        print(f"gamma_lim_db = {gamma:.3f}")
        if args.output:
            Path(args.output).write_text(
                "constellation,rate,channel,gamma_lim_db\n"
                f"{c.name},{P}/{Q},{args.channel},{gamma!r}\n"
            )
            print(f"wrote {args.output}")
        return 0
    if not args.snr:
        raise ConfigError("capacity needs either --rate or --snr")
    grid = parse_snr_spec(args.snr)
    lines = [f"# constellation={c.name}", f"# channel={args.channel}",
             "snr_db,capacity_bits"]
    for snr in grid:
        cap = iud_capacity(c, snr, args.channel, precision=args.precision)
        lines.append(f"{snr!r},{cap!r}")
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
        print(f"wrote {args.output}")
    else:
        print(text, end="")
    return 0


def _cmd_selftest(args) -> int:
    from . import selftest

    return selftest.run(verbose=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bmstrun",
        description="Coupled RUN-code laboratory: construction, Monte Carlo "
        "sweeps, bounds, and capacity limits.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="run the code-construction procedure")
    p.add_argument("--constellation", required=True)
    p.add_argument("--rate", required=True, help="target rate P/Q")
    p.add_argument("--b", type=int, default=None, help="Cartesian-product fold")
    p.add_argument("--l", type=int, default=None, help="data blocks per frame")
    p.add_argument("--p-target", type=float, default=1e-5)
    p.add_argument("--gamma-lim", type=float, default=None,
                   help="pin the Shannon limit instead of solving for it")
    p.add_argument("--channel", choices=("awgn", "rayleigh"), default="awgn")
    p.add_argument("--tol-db", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--paper-scale", action="store_true",
                   help="large-scale defaults (L=1000, B=1250)")
    p.add_argument("--csv", default=None, help="also write the table row as CSV")
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("sweep", help="run a Monte Carlo sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--output", default=None, help="override the config output path")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("bounds", help="emit bound curves as CSV")
    p.add_argument("--constellation", required=True)
    p.add_argument("--rate", required=True)
    p.add_argument("--snr", required=True, help="start:stop:step or comma list")
    p.add_argument("--kind", choices=("union", "genie"), default="union")
    p.add_argument("--memory", type=int, default=0, help="memory for the genie bound")
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("capacity", help="capacity curves or Shannon-limit lookup")
    p.add_argument("--constellation", required=True)
    p.add_argument("--channel", choices=("awgn", "rayleigh"), default="awgn")
    p.add_argument("--rate", default=None, help="solve the limit for rate P/Q")
    p.add_argument("--snr", default=None, help="curve grid start:stop:step")
    p.add_argument("--precision", type=float, default=2e-3)
    p.add_argument("--tol-db", type=float, default=0.05)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_capacity)

    p = sub.add_parser("selftest", help="run the quick oracle checks")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ConstellationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 3
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
