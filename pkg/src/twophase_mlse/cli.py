"""Command line entry point: ``simulate``, ``verify`` and ``complexity``."""

from __future__ import annotations

import argparse
import logging
import sys
import time

from .complexity import complexity_model
from .config import ConfigError, load_config
from .harness import run_sweep
from .report import emit_outputs
from .verification import check_forward_exactness, check_metric_sanity, check_oracle_identity


def _simulate(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config = config.with_seed(args.seed)
    start = time.perf_counter()
    result = run_sweep(config, workers=args.workers)
    paths = emit_outputs(result, args.out, render=not args.no_plots)
    for p in paths:
        print(p)
    logging.info("sweep finished in %.1f s", time.perf_counter() - start)
    return 0


def _verify(args) -> int:
    reports = [
        check_oracle_identity(args.instances, seed=args.seed),
        check_forward_exactness(args.instances, seed=args.seed + 1),
        check_metric_sanity(args.instances, seed=args.seed + 2),
    ]
    for r in reports:
        print(r.line())
    return 0 if all(r.passed for r in reports) else 1


def _complexity(args) -> int:
    m = complexity_model(M=args.M, P=args.P, N=args.N, T=args.T)
    print(f"M={m.M} P={m.P} N={m.N} T={m.T}")
    print(f"N_F={m.n_f} N_B={m.n_b}")
    print(f"forward C_F={m.c_f}")
    print(f"backward C_B={m.c_b}")
    print(f"two-phase total={m.total}")
    print(f"conventional MLSE={m.conventional}")
    print(f"exhaustive={m.exhaustive}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twophase-mlse",
                                     description="Two-phase MLSE for partial-CSI receivers")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo sweep from a YAML config")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--seed", type=int, default=None, help="override base_seed")
    sim.add_argument("--no-plots", action="store_true", help="skip rendering PNG figures")
    sim.set_defaults(func=_simulate)

    ver = sub.add_parser("verify", help="run the oracle and brute-force cross-checks")
    ver.add_argument("--instances", type=int, default=1000)
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(func=_verify)

    cx = sub.add_parser("complexity", help="print the multiplication-count model")
    for name in ("M", "P", "N", "T"):
        cx.add_argument(f"--{name}", type=int, required=True)
    cx.set_defaults(func=_complexity)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
