"""Swap-test estimate of a qubit channel (lambda^2 = 0.36) at increasing shot counts.

The standard error should fall as 1/sqrt(shots); the last column shows
std_error * sqrt(shots), which should stay roughly constant.
"""
import argparse
import json
import math
from pathlib import Path

from decoherence_rates.experiment import sweep

CONFIG = Path(__file__).parent / "configs" / "qubit_swap_exact.json"


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--shots", default="100,1000,10000,100000")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    template = json.loads(CONFIG.read_text())
    template["shots"] = 1
    template["seed"] = args.seed
    values = [int(x) for x in args.shots.split(",")]
    print(f"{'shots':>8} {'<S>':>9} {'estimate':>9} {'std_err':>9} {'err*sqrt(n)':>12}")
    for n, report in zip(values, sweep(template, "shots", values)):
        mean = report.measurements[0]["mean"]
        est = report.primary
        print(f"{n:>8} {mean:>9.5f} {est['value']:>9.5f} {est['std_error']:>9.5f} "
              f"{est['std_error'] * math.sqrt(n):>12.4f}")


if __name__ == "__main__":
    main()
