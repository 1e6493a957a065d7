#!/usr/bin/env python3
"""Run the full standard-scenario experiment set into one output directory.

Produces trajectory.csv, ensemble.csv, sweep.csv, goalprog_*.csv (+ JSON
summary), and discord.csv.  Full fidelity (150000 steps per Rabi period,
2000 realizations) takes a while; pass --fast for the 10000-step grid used
by the test suite.
"""

import argparse
import sys

from weakmeas.cli import main as weakmeas_main


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--seed", type=int, default=12345)
    parser.add_argument("--fast", action="store_true",
                        help="coarse integration grid (test-suite settings)")
    parser.add_argument("--workers", type=int, default=4)
    args = parser.parse_args(argv)

    common = ["--out", args.out, "--seed", str(args.seed),
              "--workers", str(args.workers)]
    if args.fast:
        common.append("--fast")
    for scenario in ("trajectory", "ensemble", "sweep", "goalprog", "discord"):
        extra = ["--compare-me2"] if scenario == "ensemble" else []
        code = weakmeas_main([scenario, *common, *extra])
        if code != 0:
            return code
        print(f"{scenario}: done")
    return 0


if __name__ == "__main__":
    sys.exit(run())
