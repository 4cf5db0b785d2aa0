"""Werner-state preparation by U x U twirling."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from .errors import ShapeError, UnsupportedDimensionError
from .measurement import SampledMean, expectation, sample_expectation, swap_operator
from .qmath import SeedLike, check_seed, dagger, haar_random_unitaries, make_rng, split_seed, trace_distance
from .states import DensityMatrix, purity, random_density_matrix, werner_state

HAAR_BATCH = 4096
HAAR = "haar-monte-carlo"
EXACT = "exact-design"


@dataclass(frozen=True)
class TwirlConfig:
    """``exact-design`` averages over the qubit Clifford group; ``haar-monte-carlo`` samples."""

    mode: Literal["haar-monte-carlo", "exact-design"] = "exact-design"
    samples: int = 20000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (HAAR, EXACT):
            raise ValueError(f"twirl mode must be {HAAR!r} or {EXACT!r}, got {self.mode!r}")
        if self.mode == HAAR and self.samples < 1:
            raise ValueError("haar twirl needs at least one sample")
        check_seed(self.seed)


def design_bound(d: int) -> int:
    """Minimal size d^4 - 2d^2 + 2 of a uniform unitary 2-design."""
    return d**4 - 2 * d**2 + 2


def _normalise_phase(u: np.ndarray) -> np.ndarray:
    flat = u.ravel()
    k = int(np.argmax(np.abs(flat) > 1e-9))
    return u * (abs(flat[k]) / flat[k])


@lru_cache(maxsize=1)
def _clifford_group() -> tuple:
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.array([[1, 0], [0, 1j]], dtype=complex)
    found = [np.eye(2, dtype=complex)]
    frontier = list(found)
    while frontier:
        nxt = []
        for u in frontier:
            for g in (h, s):
                v = _normalise_phase(g @ u)
                if not any(np.allclose(v, w, atol=1e-9) for w in found):
                    found.append(v)
                    nxt.append(v)
        frontier = nxt
    return tuple(found)


def clifford_2design_qubit() -> list[np.ndarray]:
    """The 24 single-qubit Cliffords modulo global phase, generated from H and S."""
    return [u.copy() for u in _clifford_group()]


def werner_projection(rho: DensityMatrix) -> DensityMatrix:
    """The exact Haar twirl: the Werner state with the same swap mean, q = (1 + <S>)/2."""
    d = _pair_dim(rho)
    q = (1 + expectation(swap_operator(d), rho)) / 2
    return werner_state(d, min(max(q, 0.0), 1.0))


def _pair_dim(rho: DensityMatrix) -> int:
    d = int(round(np.sqrt(rho.dim)))
    if d * d != rho.dim or d < 2:
        raise ShapeError(f"twirling needs a d x d bipartite state, got dimension {rho.dim}")
    return d


def _conjugate_sum(m: np.ndarray, unitaries: np.ndarray) -> np.ndarray:
    uu = np.einsum("nab,ncd->nacbd", unitaries, unitaries).reshape(len(unitaries), m.shape[0], m.shape[0])
    return (uu @ m @ np.conj(np.swapaxes(uu, 1, 2))).sum(axis=0)


def twirl(rho: DensityMatrix, cfg: TwirlConfig = TwirlConfig()) -> DensityMatrix:
    """Average (U x U) rho (U x U)^dagger over the Clifford design or Haar samples.

    Sampled unitaries are consumed batch by batch and never returned.
    """
    d = _pair_dim(rho)
    m = rho.matrix
    if cfg.mode == EXACT:
        if d != 2:
            raise UnsupportedDimensionError("exact design twirl is only available for qubits")
        group = np.array(_clifford_group())
        out = _conjugate_sum(m, group) / len(group)
    else:
        rng = make_rng(cfg.seed)
        out = np.zeros_like(m)
        remaining = cfg.samples
        while remaining:
            n = min(HAAR_BATCH, remaining)
            out += _conjugate_sum(m, haar_random_unitaries(d, n, rng))
            remaining -= n
        out /= cfg.samples
    return DensityMatrix((out + dagger(out)) / 2, (d, d))


def source_q(eta: DensityMatrix) -> float:
    """Werner weight reached by twirling eta x eta: (1 + Tr eta^2) / 2."""
    return (1 + purity(eta)) / 2


def werner_from_source(eta: DensityMatrix, cfg: TwirlConfig = TwirlConfig()) -> tuple[DensityMatrix, float]:
    return twirl(eta.tensor(eta), cfg), source_q(eta)


def purity_via_swap(eta: DensityMatrix, shots: int, seed: SeedLike) -> SampledMean:
    """Estimate Tr eta^2 as the swap mean on two copies of eta."""
    return sample_expectation(swap_operator(eta.dim), eta.tensor(eta), shots, seed)


def invariance_residual(rho: DensityMatrix, trials: int = 8, seed: SeedLike = 0) -> float:
    """Largest entrywise change of rho under random U x U conjugations."""
    d = _pair_dim(rho)
    us = haar_random_unitaries(d, trials, seed)
    worst = 0.0
    for u in us:
        uu = np.kron(u, u)
        worst = max(worst, float(np.max(np.abs(uu @ rho.matrix @ dagger(uu) - rho.matrix))))
    return worst


def twirl_check(d: int, samples: int, seed: int = 0) -> dict:
    """Twirl eta x eta for a random source eta and compare against the predicted Werner state."""
    s_eta, s_twirl, s_check = split_seed(seed, 3)
    eta = random_density_matrix(d, make_rng(s_eta))
    rho = eta.tensor(eta)
    out = twirl(rho, TwirlConfig(HAAR, samples, s_twirl))
    q = source_q(eta)
    target = werner_state(d, q)
    s_op = swap_operator(d)
    return {
        "d": d,
        "samples": samples,
        "seed": seed,
        "source_purity": purity(eta),
        "predicted_q": q,
        "trace_distance_to_werner": trace_distance(out.matrix, target.matrix),
        "swap_mean_shift": abs(expectation(s_op, out) - expectation(s_op, rho)),
        "invariance_residual": invariance_residual(out, seed=s_check),
    }
