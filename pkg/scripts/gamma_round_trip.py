"""Forward the equally gapped model to the average rate, then invert for gamma.

Prints one row per (d, gamma) with the relative error and the root count.
"""
import argparse

from decoherence_rates.channels import DoubleCommutatorModel, average_lambda_squared, channel_from_master_equation
from decoherence_rates.estimators import count_sign_changes, gamma_from_avg_lambda


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dims", default="2,3,5,8,16,32")
    p.add_argument("--gammas", default="0.01,0.1,1,10,100")
    args = p.parse_args()
    print(f"{'d':>3} {'gamma':>8} {'avg':>12} {'K':>12} {'rel err':>10} {'roots':>5}")
    for d in (int(x) for x in args.dims.split(",")):
        for gamma in (float(x) for x in args.gammas.split(",")):
            ch = channel_from_master_equation(DoubleCommutatorModel.equally_gapped(d, 1.0, gamma))
            avg = average_lambda_squared(ch)
            est = gamma_from_avg_lambda(avg, d)
            rel = abs(est.gamma - gamma) / gamma
            print(f"{d:>3} {gamma:>8g} {avg:>12.5e} {est.K:>12.5e} {rel:>10.1e} {count_sign_changes(avg, d):>5}")


if __name__ == "__main__":
    main()
