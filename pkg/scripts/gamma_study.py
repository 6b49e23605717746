#!/usr/bin/env python3
"""Tabulate observer performance across cubic gain intensities.

Runs one simulation per gamma on a bundled example fixture (gamma = 0 is
the plain linear observer) and prints peak error, overshoot, settling
time, and accumulated squared error per row. Useful for picking gamma by
eye before freezing a design.
"""

import argparse

from cubicobs import gamma_sweep, get_example
from cubicobs.cli import _sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("example", type=int, choices=(1, 2, 3))
    ap.add_argument(
        "--gammas",
        default=None,
        help="comma-separated values; defaults to the fixture's own sweep set",
    )
    ap.add_argument("--out", default=None, help="write the CSV here instead of stdout")
    args = ap.parse_args()

    fx = get_example(args.example)
    if args.gammas is not None:
        gammas = [float(tok) for tok in args.gammas.split(",") if tok.strip()]
    elif fx.sweep_gammas:
        gammas = list(fx.sweep_gammas)
    else:
        gammas = [0.0, 0.5 * fx.gamma, fx.gamma, 2.0 * fx.gamma]

    rows = gamma_sweep(
        fx.system, fx.gain_lc, fx.q, fx.theta, gammas, fx.sim, fx.feedback_k
    )
    text = _sweep_csv(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        print(text, end="")


if __name__ == "__main__":
    main()
