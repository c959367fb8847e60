"""Dense complex linear algebra used by the simulator.

Permanents (Glynn/Gray-code via :mod:`qoptsim.kernels`, plus a brute-force
reference), Hermitian eigendecomposition, Cholesky and the no-pivot modified
Cholesky used to turn wavepacket overlap matrices into Gram-Schmidt
coefficients.
"""
from __future__ import annotations

import itertools

import numpy as np

from . import kernels

MAX_PERMANENT_SIZE = 20
MAX_NAIVE_SIZE = 9
DEFAULT_EPSILON = 1e-10
# relative pivot floor; anything at or below is treated as not positive definite
PIVOT_TOLERANCE = 1e-14


class NotPositiveDefinite(np.linalg.LinAlgError):
    """Raised when a Cholesky pivot is not strictly positive."""

    def __init__(self, index: int, pivot: float):
        super().__init__(f"matrix is not positive definite (pivot {index} = {pivot:.3e})")
        self.index = index
        self.pivot = pivot


def _square(m, what="matrix") -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} must be square, got shape {a.shape}")
    return a


def permanent_glynn(m, max_size: int = MAX_PERMANENT_SIZE) -> complex:
    """Matrix permanent in O(n 2^n) using the Glynn formula in Gray-code order.

    The empty matrix has permanent 1.
    """
    a = _square(m)
    if a.shape[0] > max_size:
        raise ValueError(f"permanent size {a.shape[0]} exceeds maximum {max_size}")
    return complex(kernels.permanent(a))


def permanent_naive(m) -> complex:
    """Permanent by explicit enumeration of all permutations (reference only)."""
    a = _square(m)
    n = a.shape[0]
    if n > MAX_NAIVE_SIZE:
        raise ValueError(f"naive permanent limited to n <= {MAX_NAIVE_SIZE}, got {n}")
    rows = np.arange(n)
    total = 0j
    for perm in itertools.permutations(range(n)):
        total += np.prod(a[rows, list(perm)])
    return complex(total)


def cholesky(s, tol: float = PIVOT_TOLERANCE) -> np.ndarray:
    """Lower-triangular L with L L^dagger = s for Hermitian positive definite s.

    Raises
    ------
    NotPositiveDefinite
        If a pivot is not larger than ``tol`` times the largest diagonal entry.
        The exception carries the failing row index.
    """
    a = _square(s)
    n = a.shape[0]
    floor = tol * max(1.0, float(np.max(np.abs(np.diag(a).real), initial=0.0)))
    low = np.zeros_like(a)
    for i in range(n):
        row = low[i, :i]
        pivot = a[i, i].real - float(np.vdot(row, row).real)
        if not pivot > floor:
            raise NotPositiveDefinite(i, pivot)
        diag = np.sqrt(pivot)
        low[i, i] = diag
        if i + 1 < n:
            # L[j, i] = (s[j, i] - sum_k L[j, k] conj(L[i, k])) / L[i, i]
            low[i + 1:, i] = (a[i + 1:, i] - low[i + 1:, :i] @ row.conj()) / diag
    return low


def hermitian_eig(s) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvector matrix of a Hermitian matrix."""
    a = _square(s)
    # symmetrize so round-off in the input cannot leak into the spectrum
    return np.linalg.eigh(0.5 * (a + a.conj().T))


def row_norm_error(low) -> float:
    """Largest deviation of a row's squared norm from one."""
    low = np.asarray(low)
    if low.size == 0:
        return 0.0
    return float(np.max(np.abs(np.sum(np.abs(low) ** 2, axis=1) - 1.0)))


def modified_cholesky(s, epsilon: float = DEFAULT_EPSILON) -> tuple[np.ndarray, float]:
    """No-pivot modified Cholesky of an overlap matrix.

    Positive definite input goes straight through :func:`cholesky`. Otherwise
    the matrix is eigendecomposed, every eigenvalue below ``epsilon`` is
    raised to ``epsilon``, the matrix is rebuilt as U D U^dagger and factored.
    Row order is never permuted, so row ``i`` of the factor still belongs to
    wavepacket ``i``.

    Returns the factor and the maximum row-norm error; the caller decides
    whether that error is acceptable.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    a = _square(s)
    try:
        low = cholesky(a)
    except NotPositiveDefinite:
        vals, vecs = hermitian_eig(a)
        clipped = np.where(vals < epsilon, epsilon, vals)
        fixed = (vecs * clipped) @ vecs.conj().T
        low = cholesky(0.5 * (fixed + fixed.conj().T))
    return low, row_norm_error(low)
