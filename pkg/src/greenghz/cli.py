"""Command line entry point.

::

    greenghz run <config> --out <dir> [--seed N] [--exact]
    greenghz tomo <counts.csv> --out <dir> [--seed N] [--resamples N]
    greenghz calibrate <config> --out <dir> [--seed N] [--exact]

Exit status is 0 on success and 1 with a one-line ``error:`` diagnostic
otherwise.
"""
from __future__ import annotations

import argparse
import sys

from .config import load_config
from .runner import emit, run, run_calibration, run_tomo


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="greenghz", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate, measure and analyse one experiment")
    r.add_argument("config")
    r.add_argument("--out", required=True)
    r.add_argument("--seed", type=int, default=None, help="override sampling.seed")
    r.add_argument("--exact", action="store_true", help="use Born probabilities, no sampling")

    t = sub.add_parser("tomo", help="reconstruct a density matrix from counts.csv")
    t.add_argument("counts")
    t.add_argument("--out", required=True)
    t.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    t.add_argument("--resamples", type=int, default=200, help="bootstrap resamples (0 disables)")
    t.add_argument("--target", default="ghz", choices=["ghz"], help="fidelity target")

    c = sub.add_parser("calibrate", help="scan the Babinet compensator against the source phase")
    c.add_argument("config")
    c.add_argument("--out", required=True)
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--exact", action="store_true")
    c.add_argument("--points", type=int, default=64, help="grid points over [0, 2pi)")
    return p


def _dispatch(args) -> str:
    if args.command == "run":
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        report = run(cfg, exact=args.exact)
        emit(report, args.out)
        line = f"{cfg.experiment}: target fidelity {report.true_fidelity:.6f}"
        if report.reconstruction is not None:
            r = report.reconstruction
            line += f", tomography F = {r.fidelity:.4f} +- {r.fidelity_sigma:.4f}"
        if report.ghz is not None:
            line += f", GHZ F = {report.ghz.F:.4f} +- {report.ghz.sigma:.4f}"
        return line
    if args.command == "tomo":
        if 0 < args.resamples < 100:
            raise ValueError("--resamples must be 0 or at least 100")
        res = run_tomo(args.counts, args.out, args.target, args.resamples, args.seed)
        return f"F = {res.fidelity:.4f} +- {res.fidelity_sigma:.4f} ({res.iterations} iterations)"
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    s = run_calibration(cfg, args.out, exact=args.exact, points=args.points)
    return f"source phase {s['source_phase']:.4f} rad, set compensator to {s['compensator_phase']:.4f} rad"


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        print(_dispatch(args))
    except (OSError, ValueError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
