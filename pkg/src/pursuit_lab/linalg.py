"""Dense linear-algebra kernel.

Matrices are float64 numpy arrays stored column-major (Fortran order), since
every hot path reads whole columns ``phi_j``. Vectors are 1-D float64 arrays.
Support sets are sorted, duplicate-free int64 arrays. Values returned by the
constructors below are read-only so they can be shared between workers.
"""

from __future__ import annotations

import numpy as np

from .constants import TAU_RANK

__all__ = [
    "DimensionError",
    "RankDeficientError",
    "ConvergenceError",
    "as_matrix",
    "as_vector",
    "as_support",
    "matvec",
    "adjoint_matvec",
    "restrict_columns",
    "least_squares",
    "extreme_singular_values",
    "gram_extreme_eigenvalues",
]


class DimensionError(ValueError):
    """Operand shapes do not conform."""


class RankDeficientError(np.linalg.LinAlgError):
    """A restricted matrix is (numerically) rank deficient.

    ``support`` holds the offending column indices when known.
    """

    def __init__(self, message, support=None):
        super().__init__(message)
        self.support = None if support is None else tuple(int(i) for i in support)


class ConvergenceError(np.linalg.LinAlgError):
    """The symmetric eigensolver failed to converge."""


def _freeze(a):
    a.flags.writeable = False
    return a


def as_matrix(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64, order="F", copy=True)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"matrix dimensions must be positive, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return _freeze(a)


def as_vector(v) -> np.ndarray:
    v = np.array(v, dtype=np.float64, copy=True)
    if v.ndim == 2 and 1 in v.shape:
        v = v.reshape(-1)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {v.shape}")
    if v.size < 1:
        raise DimensionError("vector length must be positive")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return _freeze(v)


def as_support(indices, n: int) -> np.ndarray:
    """Sorted, duplicate-free index array with every entry in ``[0, n)``."""
    if not isinstance(indices, np.ndarray):
        indices = list(indices)
    idx = np.unique(np.asarray(indices, dtype=np.int64).reshape(-1))
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise IndexError(f"support indices must lie in [0, {n}), got {idx.tolist()}")
    return _freeze(idx)


def matvec(A: np.ndarray, v: np.ndarray) -> np.ndarray:
    if v.shape != (A.shape[1],):
        raise DimensionError(f"matvec: matrix is {A.shape}, vector has length {v.shape}")
    return A @ v


def adjoint_matvec(A: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``A^T u``: entry j is the inner product of column j with ``u``."""
    if u.shape != (A.shape[0],):
        raise DimensionError(f"adjoint_matvec: matrix is {A.shape}, vector has length {u.shape}")
    return A.T @ u


def restrict_columns(A: np.ndarray, support) -> np.ndarray:
    """Columns of ``A`` listed in ``support``, in support order (m x 0 when empty)."""
    idx = np.asarray(support, dtype=np.int64).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= A.shape[1]):
        raise IndexError(f"column index out of range for a matrix with {A.shape[1]} columns")
    return np.asfortranarray(A[:, idx])


def least_squares(A: np.ndarray, y: np.ndarray, support=None) -> np.ndarray:
    """Minimiser of ``||A z - y||_2`` via Householder QR.

    Raises RankDeficientError when some ``|R_ii|`` falls below
    ``TAU_RANK`` times the largest column norm, or when ``A`` has more
    columns than rows. ``support`` is only used to label that error.
    """
    m, n = A.shape
    if y.shape != (m,):
        raise DimensionError(f"least_squares: matrix is {A.shape}, rhs has length {y.shape}")
    if n == 0:
        return np.zeros(0)
    if n > m:
        raise RankDeficientError(f"{n} columns cannot be independent in R^{m}", support)
    scale = np.sqrt(np.max(np.einsum("ij,ij->j", A, A)))
    if scale == 0.0:
        raise RankDeficientError("all columns are zero", support)
    # numpy's reduced QR is LAPACK geqrf, i.e. Householder reflections
    Q, R = np.linalg.qr(A, mode="reduced")
    diag = np.abs(np.diag(R))
    if diag.min() < TAU_RANK * scale:
        raise RankDeficientError(
            f"restricted matrix is rank deficient (min |R_ii| = {diag.min():.3e}, "
            f"largest column norm = {scale:.3e})",
            support,
        )
    return np.linalg.solve(R, Q.T @ y)


def gram_extreme_eigenvalues(G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Smallest and largest eigenvalues of one or a stack of symmetric matrices."""
    try:
        ev = np.linalg.eigvalsh(G)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration did not converge: {exc}") from exc
    return ev[..., 0], ev[..., -1]


def extreme_singular_values(A: np.ndarray) -> tuple[float, float]:
    """``(sigma_min, sigma_max)`` of a small matrix, from the eigenvalues of ``A^T A``."""
    if A.size == 0:
        raise DimensionError("extreme_singular_values needs a nonempty matrix")
    lo, hi = gram_extreme_eigenvalues(A.T @ A)
    # sigma_min of a wide matrix is 0 even though A^T A may round slightly negative
    return float(np.sqrt(max(lo, 0.0))), float(np.sqrt(max(hi, 0.0)))
