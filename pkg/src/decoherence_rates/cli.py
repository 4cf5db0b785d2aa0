"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 singular configuration.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .errors import ConfigError, SingularConfigurationError
from .experiment import parse_eta, run, sweep, sweep_table
from .twirl import purity_via_swap, source_q, twirl_check
from .states import purity

log = logging.getLogger("decoherence_rates")

EXIT_CONFIG = 2
EXIT_SINGULAR = 3


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _parse_values(raw: str) -> list[float]:
    try:
        return [float(v) for v in raw.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values must be comma separated numbers: {exc}") from exc


def cmd_run(args) -> None:
    report = run(_load_json(args.config))
    _emit(dumps(report.to_dict()), args.out)


def cmd_sweep(args) -> None:
    values = _parse_values(args.values)
    reports = sweep(_load_json(args.config), args.param, values)
    rows = sweep_table(values, reports)
    _emit(dumps({"parameter": args.param, "table": rows, "reports": [r.to_dict() for r in reports]}), args.out)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["param_value", "mean", "std_error", "estimate"])
            writer.writeheader()
            writer.writerows(rows)


def cmd_purity(args) -> None:
    raw = _load_json(args.eta)
    if isinstance(raw, dict):
        raw = raw.get("eta")
    eta = parse_eta(raw)
    if args.shots < 1:
        raise ConfigError("--shots must be positive")
    m = purity_via_swap(eta, args.shots, args.seed)
    _emit(dumps({
        "purity_exact": purity(eta),
        "q_predicted": source_q(eta),
        "mean": m.mean,
        "std_error": m.std_error,
        "shots": m.shots,
        "seed": args.seed,
        "q_estimated": (1 + m.mean) / 2,
    }), args.out)


def cmd_twirl_check(args) -> None:
    if args.d < 2 or args.samples < 1:
        raise ConfigError("--d must be >= 2 and --samples >= 1")
    _emit(dumps(twirl_check(args.d, args.samples, args.seed)), args.out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="decoherence-rates",
                                description="Two-copy direct estimation of decoherence rates.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a config over a list of parameter values")
    s.add_argument("--config", required=True)
    s.add_argument("--param", required=True, help="dotted config path, e.g. probe.q or channel.gamma")
    s.add_argument("--values", required=True, help="comma separated values")
    s.add_argument("--out")
    s.add_argument("--csv", help="also write (param_value, mean, std_error, estimate) rows here")
    s.set_defaults(func=cmd_sweep)

    u = sub.add_parser("purity", help="estimate the purity of a source by the two-copy swap test")
    u.add_argument("--eta", required=True, help="JSON file with a probability list or a density matrix")
    u.add_argument("--shots", type=int, required=True)
    u.add_argument("--seed", type=int, default=0)
    u.add_argument("--out")
    u.set_defaults(func=cmd_purity)

    t = sub.add_parser("twirl-check", help="check Haar twirling of a random source against the Werner target")
    t.add_argument("--d", type=int, required=True)
    t.add_argument("--samples", type=int, required=True)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out")
    t.set_defaults(func=cmd_twirl_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except SingularConfigurationError as exc:
        log.error("singular configuration: %s", exc)
        return EXIT_SINGULAR
    except (ConfigError, ValueError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
