#!/usr/bin/env python3
"""Format the CSV emitted by `fvprice converge` as an aligned text table.

Usage:
    fvprice converge --preset test2 --meshes 25,50,100 --modes imex --out study.csv
    tools/convergence_report.py study.csv
"""
import argparse
import csv
import sys


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv_path", help="CSV produced by `fvprice converge`")
    args = ap.parse_args()

    with open(args.csv_path, newline="") as f:
        rows = [r for r in csv.DictReader(f) if r["nx"] != "nx"]
    if not rows:
        print("no rows found", file=sys.stderr)
        return 1

    header = f"{'mesh':>9}  {'mode':<8}  {'L1 error':>12}  {'order':>6}  {'dt':>10}  {'steps':>6}  {'wall [s]':>9}"
    print(header)
    print("-" * len(header))
    for r in rows:
        mesh = f"{r['nx']}x{r['ny']}"
        order = f"{float(r['observed_order']):.2f}" if r["observed_order"] else "-"
        print(
            f"{mesh:>9}  {r['mode']:<8}  {float(r['l1_error']):>12.4e}  {order:>6}"
            f"  {float(r['dt']):>10.3e}  {int(r['steps']):>6}  {float(r['wall_seconds']):>9.3f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
