"""Run the four built-in sweeps (plus the N=200 panel of the first) into out/.

Usage: python3 scripts/reproduce_figures.py [--n-samples K] [--only fig1 fig3 ...]
"""

import argparse
import sys
import time

from implicit_samplers import cli

RUNS = {
    "fig1": ["repro", "fig1", "--out", "out/fig1_N2"],
    "fig1_N200": ["repro", "fig1", "--out", "out/fig1_N200", "--set", "n_dim=200"],
    "fig2": ["repro", "fig2", "--out", "out/fig2"],
    "fig3": ["repro", "fig3", "--out", "out/fig3"],
    "fig4": ["repro", "fig4", "--out", "out/fig4"],
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-samples", type=int)
    ap.add_argument("--only", nargs="*", choices=sorted(RUNS))
    args = ap.parse_args()
    worst = 0
    for name in args.only or RUNS:
        argv = list(RUNS[name])
        if args.n_samples:
            argv += ["--n-samples", str(args.n_samples)]
        print(f"== {name}: {' '.join(argv)}", flush=True)
        t0 = time.perf_counter()
        worst = max(worst, cli.main(argv))
        print(f"   {time.perf_counter() - t0:.0f} s", flush=True)
    return worst


if __name__ == "__main__":
    sys.exit(main())
