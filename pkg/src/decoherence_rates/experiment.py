"""Experiment configuration, single runs and parameter sweeps.

A run follows the two-copy protocol: prepare the probe, send it through the
channel, measure, and hand the measured means (never the channel) to an
estimator.
"""
from __future__ import annotations

import copy
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from . import __version__
from .channels import PureDecoherenceChannel, apply, apply_to_first, apply_two_copies, channel_from_spec
from .errors import ConfigError, OutOfRangeError, SingularConfigurationError
from .estimators import (
    EstimateResult,
    RangeWarning,
    gamma_from_avg_lambda,
    qubit_lambda_from_swap,
    qubit_lambda_from_xy,
    qubit_lambda_from_z,
    qudit_avg_lambda_squared,
)
from .measurement import (
    Observable,
    expectation,
    maximally_entangled_state,
    pauli_x,
    pauli_y,
    phi_plus_state,
    plus_state,
    sample_expectation,
    swap_operator,
    x_effects,
    y_effects,
    z_operator,
)
from .qmath import check_seed, split_seed
from .states import DensityMatrix, symmetric_dim, werner_state
from .twirl import TwirlConfig, purity_via_swap, source_q, twirl

SCHEMES = ("swap", "qubit_z", "qubit_xy", "ppovm")
_TOP_KEYS = {"channel", "probe", "scheme", "shots", "seed", "gamma_fit"}
_INTEGER_FIELDS = {"shots", "seed", "samples", "d"}


@dataclass
class ExperimentConfig:
    channel: dict
    scheme: str
    shots: int | str
    seed: int = 0
    probe: dict | None = None
    gamma_fit: dict | None = None

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "ExperimentConfig":
        if not isinstance(raw, Mapping):
            raise ConfigError("config must be a JSON object")
        unknown = raw.keys() - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        for key in ("channel", "scheme", "shots"):
            if key not in raw:
                raise ConfigError(f"config missing {key!r}")
        try:
            cfg = cls(
                channel=dict(raw["channel"]),
                scheme=raw["scheme"],
                shots=raw["shots"],
                seed=raw.get("seed", 0),
                probe=None if raw.get("probe") is None else dict(raw["probe"]),
                gamma_fit=None if raw.get("gamma_fit") is None else dict(raw["gamma_fit"]),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.shots != "exact" and not (isinstance(self.shots, int) and not isinstance(self.shots, bool)
                                          and self.shots >= 1):
            raise ConfigError(f"shots must be a positive integer or 'exact', got {self.shots!r}")
        try:
            check_seed(self.seed)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.scheme == "swap":
            if self.probe is None:
                raise ConfigError("the swap scheme needs a probe")
            _check_keys(self.probe, "probe", {"type"})
            kind = self.probe["type"]
            if kind == "werner":
                _check_keys(self.probe, "probe", {"type", "q"}, set())
            elif kind == "twirled_source":
                _check_keys(self.probe, "probe", {"type", "eta"}, {"twirl"})
                if "twirl" in self.probe:
                    _check_keys(self.probe["twirl"], "probe.twirl", {"mode"}, {"samples", "seed"})
            else:
                raise ConfigError(f"unknown probe type {kind!r}")
        elif self.probe is not None:
            raise ConfigError(f"scheme {self.scheme!r} uses a fixed probe; remove 'probe'")
        if self.gamma_fit is not None:
            _check_keys(self.gamma_fit, "gamma_fit", set(), {"delta", "hbar", "d"})

    def to_dict(self) -> dict:
        return {
            "channel": self.channel,
            "probe": self.probe,
            "scheme": self.scheme,
            "shots": self.shots,
            "seed": self.seed,
            "gamma_fit": self.gamma_fit,
        }


def _check_keys(obj: Any, where: str, required: set, optional: set | None = None) -> None:
    """Check required keys; with ``optional`` given, also reject anything not listed."""
    if not isinstance(obj, Mapping):
        raise ConfigError(f"{where} must be an object")
    missing = required - obj.keys()
    if missing:
        raise ConfigError(f"{where} missing {sorted(missing)}")
    if optional is not None:
        extra = obj.keys() - required - optional
        if extra:
            raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")


def parse_eta(raw: Any) -> DensityMatrix:
    """Source state from a probability list, a real matrix, or a matrix of [re, im] pairs."""
    try:
        a = np.asarray(raw, dtype=float)
        if a.ndim == 1:
            m = np.diag(a).astype(complex)
        elif a.ndim == 2:
            m = a.astype(complex)
        elif a.ndim == 3 and a.shape[2] == 2:
            m = a[..., 0] + 1j * a[..., 1]
        else:
            raise ConfigError(f"cannot read eta of shape {a.shape}")
        return DensityMatrix(m)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid eta: {exc}") from exc


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

@dataclass
class RunReport:
    config: dict
    scheme: str
    d: int
    probe_q: float | None
    measurements: list = field(default_factory=list)
    estimates: list = field(default_factory=list)
    gamma: dict | None = None
    wall_time: float = 0.0
    version: str = __version__

    @property
    def primary(self) -> dict:
        return self.estimates[0]

    def to_dict(self) -> dict:
        return {
            "toolkit_version": self.version,
            "config": self.config,
            "scheme": self.scheme,
            "d": self.d,
            "probe_q": self.probe_q,
            "measurements": self.measurements,
            "estimates": self.estimates,
            "gamma": self.gamma,
            "wall_time": self.wall_time,
        }


def _measure(obs: Observable, rho: DensityMatrix, shots, seed: int) -> dict:
    if shots == "exact":
        return {"observable": obs.name, "mean": expectation(obs, rho), "std_error": None, "shots": "exact"}
    s = sample_expectation(obs, rho, shots, seed)
    return {"observable": obs.name, "mean": s.mean, "std_error": s.std_error, "shots": s.shots}


def _channel(cfg: ExperimentConfig) -> PureDecoherenceChannel:
    try:
        return channel_from_spec(cfg.channel)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid channel: {exc}") from exc


def _singular(q: float, d: int) -> bool:
    return abs(2 * q * d - (d + 1)) <= 1e-9


def _swap_probe(cfg: ExperimentConfig, d: int, seeds: Sequence[int]) -> tuple[DensityMatrix, float, dict | None]:
    probe = cfg.probe
    if probe["type"] == "werner":
        q = probe["q"]
        if not isinstance(q, (int, float)) or not 0 <= q <= 1:
            raise ConfigError(f"probe q must be a number in [0, 1], got {q!r}")
        if _singular(q, d):
            raise SingularConfigurationError(f"q = {q} equals d+/d^2 = {symmetric_dim(d) / d**2}")
        return werner_state(d, float(q)), float(q), None

    eta = parse_eta(probe["eta"])
    if eta.dim != d:
        raise ConfigError(f"source dimension {eta.dim} does not match channel dimension {d}")
    tw = dict(probe.get("twirl", {"mode": "exact-design"}))
    tw.setdefault("seed", seeds[2])
    try:
        tcfg = TwirlConfig(tw["mode"], int(tw.get("samples", 20000)), int(tw["seed"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid twirl config: {exc}") from exc
    if tcfg.mode == "exact-design" and d != 2:
        raise ConfigError("exact-design twirling is only available for d = 2")
    q_true = source_q(eta)
    if _singular(q_true, d):
        raise SingularConfigurationError("a maximally mixed source yields q = d+/d^2")
    state = twirl(eta.tensor(eta), tcfg)
    # q is obtained by measuring the source purity with the swap test
    if cfg.shots == "exact":
        purity_meas = {"observable": "S(eta x eta)", "mean": 2 * q_true - 1, "std_error": None, "shots": "exact"}
        q = q_true
    else:
        pm = purity_via_swap(eta, cfg.shots, seeds[3])
        purity_meas = {"observable": "S(eta x eta)", "mean": pm.mean, "std_error": pm.std_error, "shots": pm.shots}
        q = (1 + pm.mean) / 2
    return state, q, purity_meas


def run(config: ExperimentConfig | Mapping[str, Any]) -> RunReport:
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    started = time.perf_counter()
    ch = _channel(cfg)
    d = ch.d
    seeds = split_seed(cfg.seed, 4)
    shots = cfg.shots
    if cfg.scheme != "swap" and d != 2:
        raise ConfigError(f"scheme {cfg.scheme!r} is defined for qubits only, channel has d = {d}")
    if cfg.scheme != "swap" and not ch.has_computational_basis:
        # these schemes assume the decoherence basis is known and aligned with the probes
        raise ConfigError(f"scheme {cfg.scheme!r} needs the decoherence basis to be the computational basis")
    if cfg.gamma_fit is not None and int(cfg.gamma_fit.get("d", d)) != d:
        raise ConfigError("gamma_fit.d does not match the channel dimension")

    measurements: list[dict] = []
    estimates: list[EstimateResult] = []
    probe_q = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RangeWarning)
        if cfg.scheme == "swap":
            rho, probe_q, purity_meas = _swap_probe(cfg, d, seeds)
            if purity_meas is not None:
                measurements.append(purity_meas)
            out = apply_two_copies(ch, rho)
            m = _measure(swap_operator(d), out, shots, seeds[0])
            measurements.insert(0, m)
            estimates.append(qudit_avg_lambda_squared(m["mean"], probe_q, d, m["std_error"]))
            if d == 2:
                estimates.append(qubit_lambda_from_swap(m["mean"], probe_q, m["std_error"]))
        elif cfg.scheme == "qubit_z":
            out = apply_two_copies(ch, phi_plus_state())
            m = _measure(z_operator(), out, shots, seeds[0])
            measurements.append(m)
            lam = qubit_lambda_from_z(m["mean"], m["std_error"])
            estimates.extend([_squared(lam), lam])
        elif cfg.scheme == "qubit_xy":
            out = apply(ch, plus_state())
            mx = _measure(pauli_x(), out, shots, seeds[0])
            my = _measure(pauli_y(), out, shots, seeds[1])
            measurements.extend([mx, my])
            # sigma_y mean is -Im omega_01 on this probe
            lam = qubit_lambda_from_xy(mx["mean"], -my["mean"], _hypot_error(mx, my))
            estimates.extend([_squared(lam), lam])
        else:
            out = apply_to_first(ch, maximally_entangled_state(2))
            xp, xm, _ = x_effects()
            yp, ym, _ = y_effects()
            mx = _measure(Observable(xp - xm, "X+ - X-"), out, shots, seeds[0])
            my = _measure(Observable(yp - ym, "Y+ - Y-"), out, shots, seeds[1])
            measurements.extend([mx, my])
            lam = qubit_lambda_from_xy(mx["mean"], -my["mean"], _hypot_error(mx, my),
                                       formula="ppovm_t: lambda = |p(X+) - p(X-) + i(p(Y+) - p(Y-))|")
            estimates.extend([_squared(lam), lam])

    gamma = _gamma_fit(cfg, estimates[0], d) if cfg.gamma_fit is not None else None
    return RunReport(
        config=cfg.to_dict(),
        scheme=cfg.scheme,
        d=d,
        probe_q=probe_q,
        measurements=measurements,
        estimates=[e.to_dict() for e in estimates],
        gamma=gamma,
        wall_time=time.perf_counter() - started,
    )


def _hypot_error(mx: dict, my: dict) -> float | None:
    if mx["std_error"] is None:
        return None
    x, y = mx["mean"], my["mean"]
    lam = math.hypot(x, y)
    if lam == 0:
        return math.hypot(mx["std_error"], my["std_error"])
    return math.hypot(x * mx["std_error"], y * my["std_error"]) / lam


def _squared(lam: EstimateResult) -> EstimateResult:
    """Qubit average rate from a lambda estimate (there is a single pair)."""
    err = None if lam.std_error is None else 2 * lam.value * lam.std_error
    return EstimateResult(lam.value**2, "qubit: avg = lambda^2", {"lambda": lam.value}, err,
                          None if lam.raw_value is None else lam.raw_value**2, lam.out_of_range)


def _gamma_fit(cfg: ExperimentConfig, avg_est: EstimateResult, d: int) -> dict:
    fit = cfg.gamma_fit
    delta = float(fit.get("delta", 1.0))
    hbar = float(fit.get("hbar", 1.0))
    blank = {"status": None, "boundary": None, "gamma": None, "K": None, "avg": avg_est.value, "d": d,
             "delta": delta, "hbar": hbar, "std_error": None, "lambda_jk": None}
    try:
        g = gamma_from_avg_lambda(avg_est.value, d, delta, hbar, avg_est.std_error)
    except OutOfRangeError as exc:
        return {**blank, "status": "out_of_range", "boundary": exc.boundary}
    return {**blank, **g.to_dict(), "status": "ok"}


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def _lookup(tree: dict, path: str) -> tuple[dict, str]:
    parts = path.split(".")
    node = tree
    for p in parts[:-1]:
        if not isinstance(node, dict) or not isinstance(node.get(p), dict):
            raise ConfigError(f"unknown parameter path {path!r}")
        node = node[p]
    leaf = parts[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ConfigError(f"unknown parameter path {path!r}")
    current = node[leaf]
    numeric = isinstance(current, (int, float)) and not isinstance(current, bool)
    if not numeric and not (leaf == "shots" and current == "exact"):
        raise ConfigError(f"parameter {path!r} is not numeric")
    return node, leaf


def sweep(template: Mapping[str, Any], parameter: str, values: Sequence[float]) -> list[RunReport]:
    """Run the template once per value of ``parameter`` (a dotted path such as ``probe.q``).

    Each run gets its own seed derived from the template seed; reports come back
    in the order of ``values``.
    """
    base = copy.deepcopy(dict(template))
    _lookup(base, parameter)
    seeds = split_seed(check_seed(base.get("seed", 0)), len(values))
    reports = []
    for value, seed in zip(values, seeds):
        cfg = copy.deepcopy(base)
        node, leaf = _lookup(cfg, parameter)
        if leaf in _INTEGER_FIELDS or isinstance(node[leaf], int) and float(value).is_integer():
            value = int(value)
        node[leaf] = value
        if parameter != "seed":
            cfg["seed"] = seed
        reports.append(run(cfg))
    return reports


def sweep_table(parameter_values: Sequence[float], reports: Sequence[RunReport]) -> list[dict]:
    rows = []
    for v, r in zip(parameter_values, reports):
        m = r.measurements[0]
        rows.append({"param_value": v, "mean": m["mean"], "std_error": m["std_error"], "estimate": r.primary["value"]})
    return rows
