"""Direct estimation formulas for decoherence rates.

Every estimator works from measured means and probe parameters only. None of
them takes a channel, so the decoherence basis can never leak in.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistentDataError, InvalidDimensionError, OutOfRangeError, SingularConfigurationError
from .qmath import MAX_DIM, find_root_monotone
from .states import antisymmetric_dim, symmetric_dim

SINGULAR_TOL = 1e-9
EXACT_RANGE_TOL = 1e-9
Z_NEGATIVE_LIMIT = -0.05
NOISE_SIGMAS = 3.0
# exact data can land this far past avg = 0 or below avg = 1 through roundoff alone;
# tiny positive averages are genuine (d=2, gamma=0.01 gives exp(-100))
BOUNDARY_TOL = 1e-12


class RangeWarning(UserWarning):
    """An estimate left its physical range by more than shot noise explains."""


@dataclass(frozen=True)
class EstimateResult:
    value: float
    formula: str
    inputs: dict = field(default_factory=dict)
    std_error: float | None = None
    raw_value: float | None = None
    out_of_range: bool = False

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"estimate is not finite: {self.value}")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "formula": self.formula,
            "inputs": dict(self.inputs),
            "std_error": self.std_error,
            "raw_value": self.raw_value,
            "out_of_range": self.out_of_range,
        }


def _excursion_flag(raw: float, lo: float, hi: float, std_error: float | None) -> bool:
    """True when ``raw`` is outside [lo, hi] by more than noise can explain."""
    excess = max(lo - raw, raw - hi, 0.0)
    if excess == 0.0:
        return False
    allowed = EXACT_RANGE_TOL if not std_error else NOISE_SIGMAS * std_error
    if excess > allowed:
        warnings.warn(f"estimate {raw:.6g} outside [{lo}, {hi}] beyond noise tolerance", RangeWarning,
                      stacklevel=3)
        return True
    return False


def qubit_lambda_from_xy(x: float, y: float, std_error: float | None = None,
                         formula: str = "qubit_xy: lambda = sqrt(x^2 + y^2)") -> EstimateResult:
    """lambda = sqrt(x^2 + y^2) from the sigma_x / sigma_y means on E(|+><+|)."""
    lam = math.hypot(x, y)
    return EstimateResult(lam, formula, {"x": x, "y": y}, std_error, lam,
                          _excursion_flag(lam, 0.0, 1.0, std_error))


def qubit_lambda_from_z(mean_z: float, std_error: float | None = None) -> EstimateResult:
    """lambda = sqrt(2 <Z>) for the |phi+> two-copy scheme."""
    if mean_z < Z_NEGATIVE_LIMIT:
        raise InconsistentDataError(f"<Z> = {mean_z} is negative beyond shot noise")
    lam = math.sqrt(2 * max(mean_z, 0.0))
    err = None
    if std_error is not None:
        # d lambda / d<Z> = 1/lambda; at lambda = 0 use the sqrt-scale error
        err = std_error / lam if lam > 0 else math.sqrt(2 * std_error)
    flagged = _excursion_flag(2 * mean_z, 0.0, 1.0, None if std_error is None else 2 * std_error)
    return EstimateResult(lam, "qubit_z: lambda = sqrt(2 <Z>)", {"mean_z": mean_z}, err, lam, flagged)


def qubit_lambda_from_swap(mean_s: float, q: float, std_error: float | None = None) -> EstimateResult:
    """lambda = sqrt((3<S> - 2q) / (4q - 3)) for a qubit Werner probe.

    The radicand is clamped to [0, 1]; ``out_of_range`` is set when the clamp
    moved it by more than three standard errors.
    """
    denom = 4 * q - 3
    if abs(denom) <= SINGULAR_TOL:
        raise SingularConfigurationError("q = 3/4 makes the swap mean independent of lambda")
    radicand = (3 * mean_s - 2 * q) / denom
    rad_err = None if std_error is None else abs(3 / denom) * std_error
    flagged = _excursion_flag(radicand, 0.0, 1.0, rad_err)
    lam = math.sqrt(min(max(radicand, 0.0), 1.0))
    err = None
    if rad_err is not None:
        err = rad_err / (2 * lam) if lam > 0 else math.sqrt(rad_err)
    return EstimateResult(lam, "qubit_swap: lambda = sqrt((3<S> - 2q)/(4q - 3))",
                          {"mean_s": mean_s, "q": q}, err, radicand, flagged)


def qudit_avg_lambda_squared(mean_s: float, q: float, d: int, std_error: float | None = None) -> EstimateResult:
    """Average squared rate from the swap mean on a Werner probe.

    avg = ((d+1)<S> - 2q) / (2qd - (d+1)). The value is not clamped; it is
    flagged when it leaves [0, 1] by more than shot noise allows.
    """
    if d < 2:
        raise InvalidDimensionError(f"d must be at least 2, got {d}")
    denom = 2 * q * d - (d + 1)
    if abs(denom) <= SINGULAR_TOL:
        raise SingularConfigurationError(f"q = {q} equals d+/d^2 for d = {d}; the swap mean carries no rate")
    value = ((d + 1) * mean_s - 2 * q) / denom
    err = None if std_error is None else abs((d + 1) / denom) * std_error
    flagged = _excursion_flag(value, 0.0, 1.0, err)
    return EstimateResult(value, "qudit_swap: avg = ((d+1)<S> - 2q)/(2qd - (d+1))",
                          {"mean_s": mean_s, "q": q, "d": d}, err, value, flagged)


# ---------------------------------------------------------------------------
# double-commutator rate gamma
# ---------------------------------------------------------------------------

def equally_gapped_sum(K: float, d: int) -> float:
    """sum_{n=1}^{d-1} (d - n) K^{n^2}."""
    n = np.arange(1, d)
    return float(np.sum((d - n) * np.power(K, n**2)))


def equally_gapped_polynomial(K: float, avg: float, d: int) -> float:
    """avg * d_- - sum (d-n) K^{n^2}; its root in (0, 1) gives K = exp(-gap^2 / (hbar^2 gamma))."""
    return avg * antisymmetric_dim(d) - equally_gapped_sum(K, d)


def count_sign_changes(avg: float, d: int, grid: int = 2001) -> int:
    """Sign changes of the equally gapped polynomial on an interior grid of (0, 1).

    The grid is linear plus log-spaced towards both ends: small gamma puts the
    root near K = exp(-1/gamma), large gamma and d push it towards K = 1.
    """
    ks = np.unique(np.concatenate([
        np.linspace(0, 1, grid + 2)[1:-1],
        np.logspace(-300, 0, grid)[:-1],
        1 - np.logspace(-15, 0, grid)[:-1],
    ]))
    vals = np.array([equally_gapped_polynomial(k, avg, d) for k in ks])
    s = np.sign(vals)
    s = s[s != 0]
    return int(np.sum(s[1:] != s[:-1]))


@dataclass(frozen=True)
class GammaEstimate:
    gamma: float
    K: float
    lambda_jk: np.ndarray
    avg: float
    d: int
    delta: float | None = None
    hbar: float = 1.0
    std_error: float | None = None

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "K": self.K,
            "avg": self.avg,
            "d": self.d,
            "delta": self.delta,
            "hbar": self.hbar,
            "std_error": self.std_error,
            "lambda_jk": [[float(v) for v in row] for row in self.lambda_jk],
        }


def pair_rates_from_K(K: float, d: int) -> np.ndarray:
    """lambda_jk = K^{|j-k|^2 / 2}; needs no knowledge of the gap."""
    j = np.arange(d)
    return np.power(K, (j[:, None] - j[None, :]) ** 2 / 2.0)


def solve_K(avg: float, d: int, tol: float = 1e-13) -> float:
    """Unique K in (0, 1) with sum (d-n) K^{n^2} = avg * d_-.

    The sum is strictly increasing in K, zero at K = 0 and d_- at K = 1. The
    bisection runs on s = -ln K so that K near 0 (small gamma) keeps full
    relative precision.
    """
    if not 0.0 < avg < 1.0:
        raise OutOfRangeError(f"average rate {avg} outside (0, 1)")
    dm = antisymmetric_dim(d)
    n = np.arange(1, d)
    w = (d - n).astype(float)
    n2 = (n**2).astype(float)
    log_target = math.log(avg * dm)

    def g(s: float) -> float:
        # log sum (d-n) exp(-n^2 s) - log target, via log-sum-exp; decreasing in s
        e = np.log(w) - n2 * s
        m = e.max()
        return m + math.log(np.sum(np.exp(e - m))) - log_target

    lo, hi = 0.0, 1.0
    while g(hi) > 0:
        hi *= 2.0
        if hi > 1e300:
            raise OutOfRangeError(f"average rate {avg} too small to invert")
    s = find_root_monotone(g, lo, hi, tol=tol * max(hi, 1.0))
    return math.exp(-s)


def gamma_from_avg_lambda(avg: float, d: int, delta: float = 1.0, hbar: float = 1.0,
                          std_error: float | None = None) -> GammaEstimate:
    """Invert the equally gapped average rate for gamma and all pair rates.

    gamma = -delta^2 / (hbar^2 ln K). Only spectra with gaps (j-k)*delta are
    supported, for 2 <= d <= 32.
    """
    if not 2 <= d <= MAX_DIM:
        raise InvalidDimensionError(f"gamma inversion supports 2 <= d <= {MAX_DIM}, got {d}")
    if delta == 0:
        raise ValueError("gap must be non-zero")
    if avg >= 1.0 - BOUNDARY_TOL:
        raise OutOfRangeError(f"average rate {avg} >= 1: no decoherence, gamma is infinite",
                              boundary="gamma=inf" if avg <= 1.0 + BOUNDARY_TOL else None)
    if avg <= 0.0:
        raise OutOfRangeError(f"average rate {avg} <= 0: complete decoherence, gamma is zero",
                              boundary="gamma=0" if avg >= -BOUNDARY_TOL else None)
    K = solve_K(avg, d)
    s = -math.log(K)
    gamma = delta**2 / (hbar**2 * s)
    err = None
    if std_error is not None:
        # d avg / dK from the series, then chain through gamma(K)
        n = np.arange(1, d)
        davg_dK = float(np.sum((d - n) * n**2 * np.power(K, n**2 - 1))) / antisymmetric_dim(d)
        dgamma_dK = delta**2 / (hbar**2 * K * s**2)
        err = abs(dgamma_dK / davg_dK) * std_error if davg_dK > 0 else math.inf
    return GammaEstimate(gamma, K, pair_rates_from_K(K, d), avg, d, delta, hbar, err)


def forward_avg_lambda(model) -> float:
    """Average squared rate of a double-commutator model for any spectrum.

    avg = (1/d_-) sum_{j<k} exp(-t D_jk^2 / (hbar^2 gamma)).
    """
    d = model.d
    if d < 2:
        raise InvalidDimensionError("need at least two levels")
    delta = model.gaps()
    iu = np.triu_indices(d, k=1)
    terms = np.exp(-model.time * delta[iu] ** 2 / (model.hbar**2 * model.gamma))
    return float(np.sum(terms) / antisymmetric_dim(d))


def swap_mean_from_avg(avg: float, q: float, d: int) -> float:
    """<S> = [avg (q d^2 - d+) + q d] / d+, the forward relation behind the swap estimator."""
    dp = symmetric_dim(d)
    return (avg * (q * d * d - dp) + q * d) / dp
