"""Run every figure preset and the spectra table into one output directory.

    python scripts/reproduce_all.py --out results --jobs 4
"""
import argparse
import sys

from metriplectic.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    sys.exit(main(["reproduce", "all", "--out", args.out, "--jobs", str(args.jobs)]))
