"""Run every scheme on the same random qubit channels, exact and sampled."""
import argparse

import numpy as np

from decoherence_rates.channels import channel_to_spec, qubit_channel
from decoherence_rates.experiment import run
from decoherence_rates.qmath import make_rng

SCHEMES = ("swap", "qubit_z", "qubit_xy", "ppovm")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--channels", type=int, default=5)
    p.add_argument("--shots", default="exact")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    shots = args.shots if args.shots == "exact" else int(args.shots)
    rng = make_rng(args.seed)
    print(f"{'|w01|^2':>8} " + " ".join(f"{s:>10}" for s in SCHEMES))
    for i in range(args.channels):
        w = np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        spec = channel_to_spec(qubit_channel(w))
        vals = []
        for scheme in SCHEMES:
            cfg = {"channel": spec, "scheme": scheme, "shots": shots, "seed": args.seed + i}
            if scheme == "swap":
                cfg["probe"] = {"type": "werner", "q": 0.95}
            vals.append(run(cfg).primary["value"])
        print(f"{abs(w) ** 2:>8.4f} " + " ".join(f"{v:>10.4f}" for v in vals))


if __name__ == "__main__":
    main()
