"""Pure decoherence channels.

In its decoherence basis a pure decoherence channel multiplies the (j, k)
matrix element of a state by a complex factor ``omega[j, k]``; the diagonal is
left alone. Complete positivity is equivalent to ``omega`` being positive
semidefinite, which is checked on construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import ChannelValidityError, ConfigError, DomainError, InvalidDimensionError, ShapeError
from .qmath import (
    DERIVED_ATOL,
    HERMITIAN_ATOL,
    SeedLike,
    as_matrix,
    dagger,
    haar_random_unitary,
    is_unitary,
    make_rng,
    partial_trace,
)
from .states import DensityMatrix, antisymmetric_dim


@dataclass(frozen=True, eq=False)
class PureDecoherenceChannel:
    """Channel given by its decoherence basis and the matrix of factors omega.

    Parameters
    ----------
    omega : array_like
        d x d complex matrix with unit diagonal, Hermitian and PSD.
    basis : array_like, optional
        Unitary whose columns are the decoherence basis. Defaults to the
        computational basis.
    validate : bool
        Set to False only to build deliberately unphysical fixtures.
    """

    omega: np.ndarray
    basis: np.ndarray | None = None
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        w = as_matrix(self.omega)
        d = w.shape[0]
        if w.shape != (d, d) or d < 1:
            raise ShapeError(f"omega must be square, got {w.shape}")
        b = np.eye(d, dtype=complex) if self.basis is None else as_matrix(self.basis)
        if b.shape != (d, d):
            raise ShapeError(f"basis shape {b.shape} does not match omega {w.shape}")
        if self.validate:
            check_omega(w)
            if not is_unitary(b, DERIVED_ATOL):
                raise ChannelValidityError("decoherence basis is not unitary")
        w, b = w.copy(), b.copy()
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "basis", b)

    @property
    def d(self) -> int:
        return self.omega.shape[0]

    @property
    def rates(self) -> np.ndarray:
        """Inverse decoherence rates |omega_jk|."""
        return np.abs(self.omega)

    @property
    def has_computational_basis(self) -> bool:
        return bool(np.allclose(self.basis, np.eye(self.d), atol=DERIVED_ATOL))

    def in_basis(self, basis) -> "PureDecoherenceChannel":
        return PureDecoherenceChannel(self.omega, basis, validate=self.validate)

    def apply_operator(self, x: np.ndarray) -> np.ndarray:
        """Action on an arbitrary (not necessarily positive) operator."""
        b = self.basis
        return b @ (self.omega * (dagger(b) @ x @ b)) @ dagger(b)


def check_omega(w: np.ndarray) -> None:
    if np.max(np.abs(np.diag(w) - 1)) > HERMITIAN_ATOL:
        raise ChannelValidityError("omega must have a unit diagonal")
    if np.max(np.abs(w - dagger(w))) > HERMITIAN_ATOL:
        raise ChannelValidityError("omega must satisfy omega_jk = conj(omega_kj)")
    if np.max(np.abs(w)) > 1 + DERIVED_ATOL:
        raise ChannelValidityError("|omega_jk| exceeds 1")
    if np.linalg.eigvalsh((w + dagger(w)) / 2)[0] < -DERIVED_ATOL:
        raise ChannelValidityError("omega is not positive semidefinite (channel not CP)")


def identity_channel(d: int) -> PureDecoherenceChannel:
    return PureDecoherenceChannel(np.ones((d, d), dtype=complex))


def full_dephasing_channel(d: int) -> PureDecoherenceChannel:
    return PureDecoherenceChannel(np.eye(d, dtype=complex))


def qubit_channel_from_mixture(p: float, a: float, b: float) -> PureDecoherenceChannel:
    """rho -> p rho + (1-p) U rho U^dagger with U = diag(e^{ia}, e^{ib})."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"mixing weight p must lie in [0, 1], got {p}")
    w01 = p + (1 - p) * np.exp(1j * (a - b))
    return PureDecoherenceChannel(np.array([[1, w01], [np.conj(w01), 1]], dtype=complex))


def qubit_channel(omega01: complex, basis=None) -> PureDecoherenceChannel:
    return PureDecoherenceChannel(np.array([[1, omega01], [np.conj(omega01), 1]], dtype=complex), basis)


def random_channel(d: int, seed: SeedLike, random_basis: bool = False) -> PureDecoherenceChannel:
    """Random pure decoherence channel.

    omega is the Gram matrix of d random unit vectors, which is exactly the set
    of valid omega matrices; the vector length (rank) is drawn uniformly so that
    both weak and strong decoherence show up.
    """
    rng = make_rng(seed)
    rank = int(rng.integers(1, d + 1))
    v = rng.standard_normal((rank, d)) + 1j * rng.standard_normal((rank, d))
    v /= np.linalg.norm(v, axis=0)
    w = dagger(v) @ v
    w = (w + dagger(w)) / 2
    np.fill_diagonal(w, 1.0)
    basis = haar_random_unitary(d, rng) if random_basis else None
    return PureDecoherenceChannel(w, basis)


# ---------------------------------------------------------------------------
# action on states
# ---------------------------------------------------------------------------

def apply(ch: PureDecoherenceChannel, rho: DensityMatrix) -> DensityMatrix:
    if rho.dim != ch.d:
        raise ShapeError(f"channel acts on dimension {ch.d}, state has {rho.dim}")
    out = ch.apply_operator(rho.matrix)
    return DensityMatrix((out + dagger(out)) / 2, rho.factor_dims)


def two_copy_omega(ch: PureDecoherenceChannel) -> np.ndarray:
    """Factor matrix of ch x ch: entry ((j,k),(l,m)) is omega_jl omega_km."""
    return np.kron(ch.omega, ch.omega)


def apply_two_copies(ch: PureDecoherenceChannel, rho: DensityMatrix) -> DensityMatrix:
    d = ch.d
    if rho.dim != d * d:
        raise ShapeError(f"two-copy channel acts on dimension {d * d}, state has {rho.dim}")
    b = np.kron(ch.basis, ch.basis)
    out = b @ (two_copy_omega(ch) * (dagger(b) @ rho.matrix @ b)) @ dagger(b)
    dims = rho.factor_dims if len(rho.factor_dims) == 2 else (d, d)
    return DensityMatrix((out + dagger(out)) / 2, dims)


def apply_to_first(ch: PureDecoherenceChannel, rho: DensityMatrix) -> DensityMatrix:
    """(E x I)[rho] for a state on d x r, the channel acting on the first factor only."""
    d = ch.d
    if rho.dim % d:
        raise ShapeError(f"state dimension {rho.dim} is not a multiple of {d}")
    r = rho.dim // d
    b = np.kron(ch.basis, np.eye(r))
    out = b @ (np.kron(ch.omega, np.ones((r, r))) * (dagger(b) @ rho.matrix @ b)) @ dagger(b)
    return DensityMatrix((out + dagger(out)) / 2, (d, r))


# ---------------------------------------------------------------------------
# Choi representation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """(E x I)[Omega+] with Omega+ = sum_jk |jj><kk|, output factor first, trace d."""

    d: int
    matrix: np.ndarray

    @property
    def min_eigenvalue(self) -> float:
        m = self.matrix
        return float(np.linalg.eigvalsh((m + dagger(m)) / 2)[0])

    def is_positive(self, atol: float = DERIVED_ATOL) -> bool:
        return self.min_eigenvalue >= -atol

    def reference_marginal(self) -> np.ndarray:
        """Partial trace over the output factor; the identity iff trace preserving."""
        return partial_trace(self.matrix, (self.d, self.d), keep=[1])

    def is_trace_preserving(self, atol: float = DERIVED_ATOL) -> bool:
        return bool(np.max(np.abs(self.reference_marginal() - np.eye(self.d))) <= atol)

    def check(self) -> None:
        if not self.is_positive():
            raise ChannelValidityError(f"Choi matrix has eigenvalue {self.min_eigenvalue:.3g} < 0")
        if not self.is_trace_preserving():
            raise ChannelValidityError("Choi matrix marginal is not the identity")

    def act(self, x: np.ndarray) -> np.ndarray:
        """E(x) = Tr_ref[Omega (I x x^T)]."""
        d = self.d
        t = self.matrix.reshape(d, d, d, d)
        # t[a, r, b, s] * x^T[s, r] = t[a, r, b, s] * x[r, s]
        return np.einsum("arbs,rs->ab", t, np.asarray(x))


def choi(ch: PureDecoherenceChannel) -> ChoiMatrix:
    d = ch.d
    m = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        for k in range(d):
            e_jk = np.zeros((d, d), dtype=complex)
            e_jk[j, k] = 1.0
            m += np.kron(ch.apply_operator(e_jk), e_jk)
    return ChoiMatrix(d, m)


# ---------------------------------------------------------------------------
# double-commutator master equation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DoubleCommutatorModel:
    """drho/dt = -(i/hbar)[rho, H] - 1/(2 hbar^2 gamma) [[rho, H], H] with H = diag(energies)."""

    energies: tuple[float, ...]
    gamma: float
    hbar: float = 1.0
    time: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "energies", tuple(float(e) for e in self.energies))
        if len(self.energies) < 1:
            raise InvalidDimensionError("need at least one energy level")
        if not self.gamma > 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        if not self.hbar > 0:
            raise DomainError(f"hbar must be positive, got {self.hbar}")
        if not self.time >= 0:
            raise DomainError(f"time must be non-negative, got {self.time}")

    @property
    def d(self) -> int:
        return len(self.energies)

    def gaps(self) -> np.ndarray:
        h = np.asarray(self.energies)
        return h[:, None] - h[None, :]

    @classmethod
    def equally_gapped(cls, d: int, gap: float, gamma: float, hbar: float = 1.0, time: float = 1.0):
        return cls(tuple(gap * j for j in range(d)), gamma, hbar, time)


def channel_from_master_equation(model: DoubleCommutatorModel, basis=None) -> PureDecoherenceChannel:
    """omega_jk = exp[t (i D_jk / hbar - D_jk^2 / (2 hbar^2 gamma))] with D_jk = h_j - h_k."""
    delta = model.gaps()
    hb = model.hbar
    w = np.exp(model.time * (1j * delta / hb - delta**2 / (2 * hb**2 * model.gamma)))
    return PureDecoherenceChannel(w, basis)


def average_lambda_squared(ch: PureDecoherenceChannel) -> float:
    """Mean of |omega_jk|^2 over the d(d-1)/2 pairs j < k."""
    d = ch.d
    if d < 2:
        raise InvalidDimensionError("the average rate needs d >= 2")
    iu = np.triu_indices(d, k=1)
    return float(np.sum(np.abs(ch.omega[iu]) ** 2) / antisymmetric_dim(d))


# ---------------------------------------------------------------------------
# JSON channel specifications
# ---------------------------------------------------------------------------

_SPEC_KEYS = {
    "explicit": ({"type", "d", "omega"}, {"basis"}),
    "double_commutator": ({"type", "energies", "gamma"}, {"hbar", "time"}),
    "qubit_mixture": ({"type", "p", "a", "b"}, set()),
}


def _complex_matrix(raw: Any, d: int, name: str) -> np.ndarray:
    """Read [re, im] pairs, either d rows of d pairs or a flat row-major list of d^2 pairs."""
    a = np.asarray(raw, dtype=float)
    if a.shape == (d, d, 2):
        return a[..., 0] + 1j * a[..., 1]
    if a.shape == (d * d, 2):
        return (a[:, 0] + 1j * a[:, 1]).reshape(d, d)
    raise ConfigError(f"{name}: expected {d}x{d} [re, im] pairs, got array of shape {a.shape}")


def _encode_complex_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def channel_from_spec(spec: Mapping[str, Any]) -> PureDecoherenceChannel:
    if not isinstance(spec, Mapping) or "type" not in spec:
        raise ConfigError("channel spec must be an object with a 'type' field")
    kind = spec["type"]
    if kind not in _SPEC_KEYS:
        raise ConfigError(f"unknown channel type {kind!r}")
    required, optional = _SPEC_KEYS[kind]
    missing = required - spec.keys()
    extra = spec.keys() - required - optional
    if missing:
        raise ConfigError(f"channel spec missing {sorted(missing)}")
    if extra:
        raise ConfigError(f"unknown channel spec keys {sorted(extra)}")
    if kind == "explicit":
        d = int(spec["d"])
        omega = _complex_matrix(spec["omega"], d, "omega")
        basis = _complex_matrix(spec["basis"], d, "basis") if "basis" in spec else None
        return PureDecoherenceChannel(omega, basis)
    if kind == "double_commutator":
        return channel_from_master_equation(model_from_spec(spec))
    return qubit_channel_from_mixture(float(spec["p"]), float(spec["a"]), float(spec["b"]))


def model_from_spec(spec: Mapping[str, Any]) -> DoubleCommutatorModel:
    return DoubleCommutatorModel(
        tuple(spec["energies"]),
        float(spec["gamma"]),
        float(spec.get("hbar", 1.0)),
        float(spec.get("time", 1.0)),
    )


def channel_to_spec(ch: PureDecoherenceChannel) -> dict:
    spec = {"type": "explicit", "d": ch.d, "omega": _encode_complex_matrix(ch.omega)}
    if not ch.has_computational_basis:
        spec["basis"] = _encode_complex_matrix(ch.basis)
    return spec
