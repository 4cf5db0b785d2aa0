"""Observables, process-POVM elements, exact expectations and shot sampling."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .channels import PureDecoherenceChannel, apply, choi
from .errors import InvalidDimensionError, ShapeError, StateValidityError, UnsupportedDimensionError
from .qmath import (
    DERIVED_ATOL,
    HERMITIAN_ATOL,
    SeedLike,
    as_matrix,
    dagger,
    hermitian_eigensystem,
    is_hermitian,
    ket,
    make_rng,
    permute_subsystems,
    swap_matrix,
    tensor_product,
)
from .states import DensityMatrix, pure_state

EIGENVALUE_MERGE_TOL = 1e-9
PROBABILITY_CLIP_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

KET_PLUS = ket([1, 1]) / np.sqrt(2)
# two-qubit vectors (|01> +- |10>)/sqrt2
PHI_PLUS = ket([0, 1, 1, 0]) / np.sqrt(2)
PHI_MINUS = ket([0, 1, -1, 0]) / np.sqrt(2)


def _proj(v: np.ndarray) -> np.ndarray:
    return v @ dagger(v)


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian operator, measured projectively on its distinct eigenvalues.

    Eigenvalues closer than ``1e-9`` are merged into one outcome, so the swap
    operator is a genuine two-outcome measurement.
    """

    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape[0] != m.shape[1] or not is_hermitian(m, HERMITIAN_ATOL):
            raise ShapeError(f"observable {self.name!r} is not a square Hermitian matrix")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, list[np.ndarray]]:
        """Distinct eigenvalues (ascending) and the projector onto each eigenspace."""
        vals, vecs = hermitian_eigensystem(self.matrix)
        groups: list[list[int]] = []
        for i, v in enumerate(vals):
            if groups and abs(v - vals[groups[-1][0]]) <= EIGENVALUE_MERGE_TOL:
                groups[-1].append(i)
            else:
                groups.append([i])
        outcomes = np.array([float(np.mean(vals[g])) for g in groups])
        projectors = [vecs[:, g] @ dagger(vecs[:, g]) for g in groups]
        return outcomes, projectors

    def outcome_probabilities(self, rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
        _check_dims(self, rho)
        outcomes, projectors = self.spectrum
        probs = np.array([np.real(np.trace(rho.matrix @ p)) for p in projectors])
        if np.any(probs < -PROBABILITY_CLIP_TOL):
            raise StateValidityError(f"negative outcome probability {probs.min():.3g}")
        probs = np.clip(probs, 0.0, None)
        return outcomes, probs / probs.sum()


def _check_dims(obs: Observable, rho: DensityMatrix) -> None:
    if obs.dim != rho.dim:
        raise ShapeError(f"observable acts on dimension {obs.dim}, state has {rho.dim}")


def swap_operator(d: int) -> Observable:
    if d < 2:
        raise InvalidDimensionError(f"swap needs d >= 2, got {d}")
    return Observable(swap_matrix(d), "S")


def z_operator() -> Observable:
    """(|01><10| + |10><01|)/2 on two qubits."""
    m = np.zeros((4, 4), dtype=complex)
    m[1, 2] = m[2, 1] = 0.5
    return Observable(m, "Z")


def pauli_x() -> Observable:
    return Observable(SIGMA_X, "sigma_x")


def pauli_y() -> Observable:
    return Observable(SIGMA_Y, "sigma_y")


def identity_observable(dim: int) -> Observable:
    return Observable(np.eye(dim), "I")


def expectation(obs: Observable, rho: DensityMatrix) -> float:
    _check_dims(obs, rho)
    val = np.trace(rho.matrix @ obs.matrix)
    if abs(val.imag) > DERIVED_ATOL:
        raise StateValidityError(f"expectation has imaginary part {val.imag:.3g}")
    return float(val.real)


@dataclass(frozen=True)
class SampledMean:
    mean: float
    std_error: float
    shots: int
    seed: int | None = None

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error, "shots": self.shots, "seed": self.seed}


def mean_from_counts(outcomes: np.ndarray, counts: np.ndarray, seed: int | None = None) -> SampledMean:
    shots = int(counts.sum())
    mean = float(np.dot(outcomes, counts) / shots)
    if shots > 1:
        var = float(np.dot(counts, (outcomes - mean) ** 2) / (shots - 1))
    else:
        var = 0.0
    return SampledMean(mean, float(np.sqrt(var / shots)), shots, seed)


def sample_counts(probs: np.ndarray, shots: int, seed: SeedLike) -> np.ndarray:
    if shots < 1:
        raise ValueError(f"shots must be at least 1, got {shots}")
    return make_rng(seed).multinomial(int(shots), probs)


def sample_expectation(obs: Observable, rho: DensityMatrix, shots: int, seed: SeedLike) -> SampledMean:
    """Simulate ``shots`` projective measurements of ``obs`` on ``rho``."""
    outcomes, probs = obs.outcome_probabilities(rho)
    counts = sample_counts(probs, shots, seed)
    return mean_from_counts(outcomes, counts, seed if isinstance(seed, int) else None)


# ---------------------------------------------------------------------------
# process POVMs
# ---------------------------------------------------------------------------

def ppovm_element(probe: np.ndarray, effect: np.ndarray) -> np.ndarray:
    """Process-POVM element probe^T x effect for preparing ``probe`` and observing ``effect``.

    Elements are laid out as (input/reference factors) x (output factors). For
    two copies that is (in1, in2, out1, out2).
    """
    return tensor_product(np.transpose(as_matrix(probe)), as_matrix(effect))


def choi_in_ppovm_order(ch: PureDecoherenceChannel, copies: int) -> np.ndarray:
    """Choi matrix of ch^{x copies} rearranged to (references..., outputs...)."""
    d = ch.d
    om = choi(ch).matrix  # (out, ref)
    if copies == 1:
        return permute_subsystems(om, (d, d), (1, 0))
    if copies == 2:
        # (out1, ref1, out2, ref2) -> (ref1, ref2, out1, out2)
        return permute_subsystems(np.kron(om, om), (d,) * 4, (1, 3, 0, 2))
    raise ValueError(f"copies must be 1 or 2, got {copies}")


def ppovm_probability(element: np.ndarray, ch: PureDecoherenceChannel, copies: int = 1) -> float:
    """Tr[Omega F] (one copy) or Tr[(Omega x Omega) F] (two copies)."""
    f = as_matrix(element)
    size = ch.d ** (2 * copies)
    if f.shape != (size, size):
        raise ShapeError(f"element of shape {f.shape} does not act on the {size}-dim Choi space")
    return float(np.real(np.trace(choi_in_ppovm_order(ch, copies) @ f)))


@dataclass(frozen=True, eq=False)
class ProcessPOVM:
    elements: tuple[np.ndarray, ...]
    labels: tuple[str, ...]
    copies: int = 1

    def __post_init__(self):
        if len(self.elements) != len(self.labels):
            raise ValueError("one label per element")
        for f, lab in zip(self.elements, self.labels):
            f = as_matrix(f)
            if not is_hermitian(f, HERMITIAN_ATOL) or np.linalg.eigvalsh((f + dagger(f)) / 2)[0] < -DERIVED_ATOL:
                raise ValueError(f"element {lab!r} is not positive semidefinite")

    def probabilities(self, ch: PureDecoherenceChannel) -> dict[str, float]:
        om = choi_in_ppovm_order(ch, self.copies)
        return {lab: float(np.real(np.trace(om @ f))) for f, lab in zip(self.elements, self.labels)}


def _sigma_eigvec(pauli: np.ndarray, sign: int) -> np.ndarray:
    vals, vecs = np.linalg.eigh(pauli)
    return vecs[:, [int(np.argmin(np.abs(vals - sign)))]]


def xy_product_ppovm() -> ProcessPOVM:
    """Probe |++>, measure sigma_x on copy 1 and sigma_y on copy 2.

    The label ``(s, t)`` means the x record is ``s`` and the y record is ``t``
    where the y record is the *negated* sigma_y outcome. With the probe |+> the
    sigma_y mean is -Im(omega_01), so the negation makes the records estimate
    (Re omega_01, Im omega_01) and p(s, t) = (1 + s Re w)(1 + t Im w)/4.
    """
    probe = _proj(np.kron(KET_PLUS, KET_PLUS))
    elements, labels = [], []
    for s in (1, -1):
        for t in (1, -1):
            v = np.kron(_sigma_eigvec(SIGMA_X, s), _sigma_eigvec(SIGMA_Y, -t))
            elements.append(ppovm_element(probe, _proj(v)))
            labels.append(f"{'+' if s > 0 else '-'},{'+' if t > 0 else '-'}")
    return ProcessPOVM(tuple(elements), tuple(labels), copies=2)


def entangled_z_ppovm() -> ProcessPOVM:
    """Probe |phi+> through both copies; outcomes |phi+>, |phi->, and the never-seen |00>,|11> block."""
    probe = _proj(PHI_PLUS)
    a = np.diag([1, 0, 0, 1]).astype(complex)
    return ProcessPOVM(
        (ppovm_element(probe, _proj(PHI_PLUS)), ppovm_element(probe, _proj(PHI_MINUS)), ppovm_element(probe, a)),
        ("+", "-", "o"),
        copies=2,
    )


def z_ppovm_observable() -> np.ndarray:
    """Q = |phi+><phi+| x Z, with Tr[(Omega x Omega) Q] = |omega_01|^2 / 2.

    Because Z carries a factor 1/2, Q is half of F+ - F- from ``entangled_z_ppovm``.
    """
    return ppovm_element(_proj(PHI_PLUS), z_operator().matrix)


def _bell_effects(phase: complex) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    plus = ket([1, 0, 0, phase]) / np.sqrt(2)
    minus = ket([1, 0, 0, -phase]) / np.sqrt(2)
    p, m = _proj(plus), _proj(minus)
    return p, m, np.eye(4) - p - m


def x_effects():
    """X+, X-, X_o on (output, reference): (|00> +- |11>) projectors and their complement."""
    return _bell_effects(1)


def y_effects():
    """Y+, Y-, Y_o: (|00> +- i|11>) projectors and their complement."""
    return _bell_effects(1j)


def t_operator() -> np.ndarray:
    xp, xm, _ = x_effects()
    yp, ym, _ = y_effects()
    return 0.5 * ((xp - xm) + 1j * (yp - ym))


def entangled_probe_ppovm(effects: Sequence[np.ndarray], labels: Sequence[str]) -> ProcessPOVM:
    """Single-copy PPOVM for a maximally entangled probe (one half through the channel).

    With the normalised probe Omega+/d the outcome probability is Tr[Omega E]/d,
    so each element is the effect itself (already in (output, reference) order
    for these symmetric effects) divided by d.
    """
    d = int(round(np.sqrt(effects[0].shape[0])))
    return ProcessPOVM(tuple(np.asarray(e) / d for e in effects), tuple(labels), copies=1)


def x_ppovm() -> ProcessPOVM:
    return entangled_probe_ppovm(x_effects(), ("X+", "X-", "Xo"))


def y_ppovm() -> ProcessPOVM:
    return entangled_probe_ppovm(y_effects(), ("Y+", "Y-", "Yo"))


def t_expectation(ch: PureDecoherenceChannel) -> complex:
    """Tr[Omega T] assembled from X and Y outcome probabilities, never from T directly.

    Equals omega_10 for a computational-basis qubit channel, so its modulus is lambda.
    """
    _require_qubit(ch)
    px = x_ppovm().probabilities(ch)
    py = y_ppovm().probabilities(ch)
    # probabilities carry the 1/d of the normalised probe; Tr[Omega T] uses the unnormalised one
    return complex((px["X+"] - px["X-"]) + 1j * (py["Y+"] - py["Y-"])) * ch.d / 2


def _require_qubit(ch: PureDecoherenceChannel) -> None:
    if ch.d != 2:
        raise UnsupportedDimensionError(f"qubit scheme called with d={ch.d}")


def qubit_xy_expectations(ch: PureDecoherenceChannel) -> tuple[float, float]:
    """(x, y) = (Re omega_01, Im omega_01) from sigma_x, sigma_y on E(|+><+|).

    The sigma_y mean on E(|+><+|) is -Im omega_01; y is reported with that
    sign undone so that x + iy = omega_01.
    """
    _require_qubit(ch)
    if not ch.has_computational_basis:
        raise UnsupportedDimensionError("the x/y scheme assumes the computational decoherence basis")
    out = apply(ch, DensityMatrix(_proj(KET_PLUS)))
    return expectation(pauli_x(), out), -expectation(pauli_y(), out)


def plus_state() -> DensityMatrix:
    return pure_state([1, 1])


def phi_plus_state() -> DensityMatrix:
    return DensityMatrix(_proj(PHI_PLUS), (2, 2))


def maximally_entangled_state(d: int) -> DensityMatrix:
    v = np.zeros(d * d)
    v[[j * d + j for j in range(d)]] = 1
    return pure_state(v, (d, d))
