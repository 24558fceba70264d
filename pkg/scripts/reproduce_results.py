#!/usr/bin/env python3
"""Regenerate every deliverable artifact into one directory.

Runs the CLI entry points with the canonical grids, so the outputs here
are byte-for-byte what `dheac ...` would produce by hand. Pass --quick to
cut Monte-Carlo trial counts for a fast smoke run.

Usage:
  python scripts/reproduce_results.py --out-dir results
  python scripts/reproduce_results.py --out-dir /tmp/smoke --quick --workers 4
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from dheac.cli import main as dheac  # noqa: E402


def run(label: str, argv: list[str]) -> None:
    print(f"--> {label}: dheac {' '.join(argv)}", flush=True)
    code = dheac(argv)
    if code != 0:
        raise SystemExit(f"{label} failed with exit code {code}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--workers", type=int, default=max(1, os.cpu_count() // 2))
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--quick", action="store_true",
                    help="reduced trial counts for a smoke run")
    args = ap.parse_args()

    out = args.out_dir
    os.makedirs(out, exist_ok=True)
    sweep_trials = "2000" if args.quick else "20000"
    fair_trials = "20000" if args.quick else "200000"
    dump_trials = "1000" if args.quick else "10000"
    seed = str(args.seed)

    run("analytic sweep + latency heatmap", [
        "sweep", "--mode", "analytic", "--seed", seed,
        "--out", f"{out}/sweep_analytic.csv",
        "--svg", f"{out}/latency_ratio.svg"])
    run("monte-carlo sweep", [
        "sweep", "--mode", "both", "--trials", sweep_trials, "--seed", seed,
        "--workers", str(args.workers), "--out", f"{out}/sweep_mc.csv"])
    run("throughput break-even map", [
        "breakeven", "--out", f"{out}/breakeven.csv",
        "--svg", f"{out}/breakeven_ratio.svg"])
    run("fairness grid + ECDFs", [
        "fairness", "--trials", fair_trials, "--seed", seed,
        "--out", f"{out}/fairness.csv", "--ecdf-out", f"{out}/ecdf"])
    run("selection-state verification (symmetric)", [
        "verify-quantum", "--caps", "3,3,3,3", "--k-req", "4",
        "--seed", seed, "--json", f"{out}/verify_symmetric.json"])
    run("selection-state verification (skewed)", [
        "verify-quantum", "--m", "8", "--skew", "1.0", "--demand", "0.2",
        "--seed", seed, "--json", f"{out}/verify_skewed.json"])
    run("raw trial dump", [
        "mc", "--m", "8", "--skew", "1.0", "--demand", "0.4", "--q", "0.05",
        "--trials", dump_trials, "--seed", seed,
        "--out", f"{out}/trials_m8_skew1_d0.4.csv"])
    print(f"all artifacts written under {out}/")


if __name__ == "__main__":
    main()
