"""Density matrices, Werner states and the (anti)symmetric projectors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidDimensionError, ShapeError, StateValidityError
from .qmath import (
    DERIVED_ATOL,
    HERMITIAN_ATOL,
    SeedLike,
    as_matrix,
    dagger,
    is_hermitian,
    ket,
    make_rng,
    swap_matrix,
    tensor_product,
)

PSD_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated density operator.

    ``factor_dims`` records the tensor structure, e.g. ``(d, d)`` for the
    bipartite probes. Negative eigenvalues below ``-1e-10`` are rejected, never
    clamped.
    """

    matrix: np.ndarray
    factor_dims: tuple[int, ...] = field(default=())

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise ShapeError(f"density matrix must be square, got {m.shape}")
        dims = tuple(int(x) for x in self.factor_dims) or (m.shape[0],)
        if int(np.prod(dims)) != m.shape[0]:
            raise ShapeError(f"factor dims {dims} do not multiply to {m.shape[0]}")
        if not is_hermitian(m, HERMITIAN_ATOL):
            raise StateValidityError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > DERIVED_ATOL:
            raise StateValidityError(f"trace is {np.trace(m).real:.3g}, not 1")
        if np.linalg.eigvalsh((m + dagger(m)) / 2)[0] < -PSD_ATOL:
            raise StateValidityError("density matrix has a negative eigenvalue")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "factor_dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(tensor_product(self.matrix, other.matrix),
                             self.factor_dims + other.factor_dims)


def _check_pair_dim(d: int) -> None:
    if d < 2:
        raise InvalidDimensionError(f"subsystem dimension must be at least 2, got {d}")


def symmetric_dim(d: int) -> int:
    return d * (d + 1) // 2


def antisymmetric_dim(d: int) -> int:
    return d * (d - 1) // 2


def projector_symmetric(d: int) -> np.ndarray:
    """P+ = (I + S)/2 on d x d, of rank d(d+1)/2."""
    _check_pair_dim(d)
    return (np.eye(d * d) + swap_matrix(d)) / 2


def projector_antisymmetric(d: int) -> np.ndarray:
    """P- = (I - S)/2 on d x d, of rank d(d-1)/2."""
    _check_pair_dim(d)
    return (np.eye(d * d) - swap_matrix(d)) / 2


@dataclass(frozen=True)
class WernerSpec:
    d: int
    q: float

    def __post_init__(self):
        _check_pair_dim(self.d)
        if not 0.0 <= self.q <= 1.0:
            raise DomainError(f"Werner weight q must lie in [0, 1], got {self.q}")

    @property
    def singular_q(self) -> float:
        """The weight d+/d^2 at which the swap expectation carries no rate information."""
        return symmetric_dim(self.d) / self.d**2


def werner_state(d: int | WernerSpec, q: float | None = None) -> DensityMatrix:
    """q P+/d+ + (1-q) P-/d-.

    Accepts either ``werner_state(d, q)`` or ``werner_state(WernerSpec(d, q))``.
    """
    spec = d if isinstance(d, WernerSpec) else WernerSpec(int(d), float(q))
    dp, dm = symmetric_dim(spec.d), antisymmetric_dim(spec.d)
    rho = spec.q * projector_symmetric(spec.d) / dp + (1 - spec.q) * projector_antisymmetric(spec.d) / dm
    return DensityMatrix(rho, (spec.d, spec.d))


def werner_purity(d: int, q: float) -> float:
    return q**2 / symmetric_dim(d) + (1 - q) ** 2 / antisymmetric_dim(d)


def purity(rho: DensityMatrix) -> float:
    m = rho.matrix
    # Tr rho^2 = sum |rho_jk|^2 for Hermitian rho
    return float(np.sum(np.abs(m) ** 2))


def pure_state(amplitudes: Sequence[complex], factor_dims: Sequence[int] = ()) -> DensityMatrix:
    v = ket(amplitudes)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise DomainError("cannot normalise the zero vector")
    v = v / norm
    return DensityMatrix(v @ dagger(v), tuple(factor_dims))


def maximally_mixed(d: int) -> DensityMatrix:
    return DensityMatrix(np.eye(d) / d)


def diagonal_state(probabilities: Sequence[float]) -> DensityMatrix:
    p = np.asarray(probabilities, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1) > DERIVED_ATOL:
        raise DomainError("diagonal entries must be a probability vector")
    return DensityMatrix(np.diag(p).astype(complex))


def random_density_matrix(d: int, rng: SeedLike, rank: int | None = None,
                          factor_dims: Sequence[int] = ()) -> DensityMatrix:
    """Induced-measure random state: G G^dagger / Tr for a d x rank Ginibre G."""
    rank = d if rank is None else rank
    rng = make_rng(rng)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ dagger(g)
    rho = (rho + dagger(rho)) / 2
    return DensityMatrix(rho / np.trace(rho).real, tuple(factor_dims))
