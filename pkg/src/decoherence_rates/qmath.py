"""Dense complex linear algebra and numerical primitives.

Matrices are plain ``numpy.ndarray`` objects with a complex dtype. Random
streams are Philox generators, which are counter based, so a single integer
seed can be split into independent child streams without losing
reproducibility.
"""
from __future__ import annotations

from functools import reduce
from typing import Callable, Sequence, Union

import numpy as np

from .errors import BracketError, InvalidDimensionError, ShapeError

HERMITIAN_ATOL = 1e-12
DERIVED_ATOL = 1e-10
MAX_DIM = 32

SeedLike = Union[int, np.random.Generator]


# ---------------------------------------------------------------------------
# random streams
# ---------------------------------------------------------------------------

def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Return a generator for ``seed``; generators are passed through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(check_seed(seed)))


def split_seed(seed: int, n: int) -> list[int]:
    """Derive ``n`` independent 64-bit child seeds from ``seed``."""
    children = np.random.SeedSequence(check_seed(seed)).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conjugate(np.transpose(m))


def tensor_product(*factors) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not factors:
        raise ShapeError("tensor_product needs at least one factor")
    return reduce(np.kron, (as_matrix(f) for f in factors))


def is_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= atol)


def is_unitary(u: np.ndarray, atol: float = DERIVED_ATOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u @ dagger(u) - np.eye(u.shape[0]))) <= atol)


def basis_projector(index: int, d: int) -> np.ndarray:
    p = np.zeros((d, d), dtype=complex)
    p[index, index] = 1.0
    return p


def ket(amplitudes) -> np.ndarray:
    return np.asarray(amplitudes, dtype=complex).reshape(-1, 1)


def swap_matrix(d: int) -> np.ndarray:
    """Permutation matrix with S|jk> = |kj> on a d x d bipartite space."""
    if d < 1:
        raise InvalidDimensionError(f"dimension must be positive, got {d}")
    s = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        for k in range(d):
            s[k * d + j, j * d + k] = 1.0
    return s


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem of ``m`` whose index is not in ``keep``."""
    dims = list(dims)
    n = len(dims)
    m = np.asarray(m)
    if m.shape != (int(np.prod(dims)),) * 2:
        raise ShapeError(f"matrix of shape {m.shape} does not match subsystem dims {dims}")
    t = m.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # trace pairs from the highest axis down so earlier indices stay valid
    for count, i in enumerate(sorted(traced, reverse=True)):
        cur = n - count
        t = np.trace(t, axis1=i, axis2=i + cur)
    kept = [dims[i] for i in sorted(keep)]
    size = int(np.prod(kept)) if kept else 1
    return t.reshape(size, size)


def permute_subsystems(m: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of an operator: new factor ``i`` is old factor ``order[i]``."""
    dims = list(dims)
    n = len(dims)
    t = np.asarray(m).reshape(dims + dims)
    t = np.transpose(t, list(order) + [n + o for o in order])
    size = int(np.prod(dims))
    return t.reshape(size, size)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    diff = np.asarray(a) - np.asarray(b)
    diff = (diff + dagger(diff)) / 2
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def hermitian_eigensystem(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns
    -------
    eigenvalues : ndarray
        Real, ascending.
    eigenvectors : ndarray
        Unitary matrix whose columns are the matching eigenvectors.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1] or not is_hermitian(m, DERIVED_ATOL):
        raise ShapeError("hermitian_eigensystem requires a square Hermitian matrix")
    vals, vecs = np.linalg.eigh((m + dagger(m)) / 2)
    return vals, vecs


# ---------------------------------------------------------------------------
# Haar sampling
# ---------------------------------------------------------------------------

def haar_random_unitaries(d: int, n: int, seed: SeedLike) -> np.ndarray:
    """Stack of ``n`` Haar-distributed ``d x d`` unitaries, shape ``(n, d, d)``.

    QR of a complex Ginibre matrix, with the phases of R's diagonal moved into Q
    so the distribution is exactly Haar rather than biased by the QR convention.
    """
    if d < 1:
        raise InvalidDimensionError(f"dimension must be positive, got {d}")
    rng = make_rng(seed)
    z = (rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    phases = diag / np.abs(diag)
    return q * phases[:, None, :]


def haar_random_unitary(d: int, seed: SeedLike) -> np.ndarray:
    return haar_random_unitaries(d, 1, seed)[0]


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

def find_root_monotone(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12, max_iter: int = 2000
) -> float:
    """Bisection for a continuous monotone ``f`` with a sign change on ``[lo, hi]``.

    Iterates until the bracket is no wider than ``tol`` and returns its midpoint.
    """
    if not lo < hi:
        raise BracketError(f"empty bracket [{lo}, {hi}]")
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # bracket at float resolution
            break
        fmid = f(mid)
        if fmid == 0:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)
