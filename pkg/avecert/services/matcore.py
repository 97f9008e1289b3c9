"""
Dense real linear algebra primitives.

Every matrix handled by avecert is a read-only ``float64`` :class:`numpy.ndarray`
built through :func:`as_matrix` / :func:`as_vector`. The functions here are pure:
they never modify their inputs and keep no state between calls.
"""
import logging
import warnings
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy import linalg as sla

from avecert.core.config import settings
from avecert.core.errors import (
    DimensionMismatch,
    DimensionOverflow,
    InvalidMatrix,
    NonConvergence,
    SingularMatrix,
)

logger = logging.getLogger(__name__)


class Inversion(NamedTuple):
    """Inverse together with its reciprocal 1-norm condition estimate."""
    inverse: np.ndarray
    rcond: float


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def as_matrix(data) -> np.ndarray:
    """
    Build a validated read-only matrix.

    Args:
        data: Nested sequence of rows or a 2-D array (1-D input is read as a column)

    Returns:
        A fresh ``float64`` array with ``rows × cols`` finite entries

    Raises:
        DimensionMismatch: Ragged rows or rank above 2
        InvalidMatrix: Empty input or NaN/Inf entries
    """
    try:
        array = np.array(data, dtype=np.float64, copy=True)
    except (TypeError, ValueError) as e:
        raise DimensionMismatch(f"not a rectangular numeric array: {e}") from e
    if array.ndim == 0:
        array = array.reshape(1, 1)
    elif array.ndim == 1:
        array = array.reshape(-1, 1)
    if array.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got {array.ndim} dimensions")
    if array.size == 0:
        raise InvalidMatrix("matrix has no entries")
    if not np.all(np.isfinite(array)):
        raise InvalidMatrix("matrix contains NaN or Inf entries")
    return _freeze(array)


def as_vector(data) -> np.ndarray:
    """Build a validated read-only vector; a single row or column matrix is flattened."""
    try:
        array = np.array(data, dtype=np.float64, copy=True)
    except (TypeError, ValueError) as e:
        raise DimensionMismatch(f"not a numeric vector: {e}") from e
    if array.ndim == 0 or (array.ndim == 2 and 1 in array.shape):
        array = array.reshape(-1)
    if array.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {array.shape}")
    if array.size == 0:
        raise InvalidMatrix("vector has no entries")
    if not np.all(np.isfinite(array)):
        raise InvalidMatrix("vector contains NaN or Inf entries")
    return _freeze(array)


def _require_square(M: np.ndarray, name: str) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {M.shape}")


def norm_inf(M: np.ndarray) -> float:
    """Largest absolute entry (0 for an empty array)."""
    return float(np.max(np.abs(M))) if M.size else 0.0


def _lu(M: np.ndarray, name: str, rtol: Optional[float]):
    rtol = settings.SINGULAR_RTOL if rtol is None else rtol
    scale = norm_inf(M)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(M, check_finite=False)
    pivot = float(np.min(np.abs(np.diag(lu))))
    if scale == 0.0 or pivot < rtol * scale:
        raise SingularMatrix(name, pivot)
    return lu, piv


def invert_with_rcond(M: np.ndarray, *, name: str = "matrix", rtol: Optional[float] = None) -> Inversion:
    """
    Invert a square matrix by LU with partial pivoting.

    Args:
        M: Square matrix
        name: Name used in error messages (e.g. "A", "C")
        rtol: Singularity threshold relative to max |entry| (default ``settings.SINGULAR_RTOL``)

    Returns:
        The inverse and its reciprocal 1-norm condition estimate

    Raises:
        DimensionMismatch: M is not square
        SingularMatrix: A pivot fell below the singularity threshold
    """
    _require_square(M, name)
    lu, piv = _lu(M, name, rtol)
    n = M.shape[0]
    inverse = sla.lu_solve((lu, piv), np.eye(n), check_finite=False)
    rcond = 1.0 / (np.linalg.norm(M, 1) * np.linalg.norm(inverse, 1))

    backward = np.max(np.abs(M @ inverse - np.eye(n)))
    if backward > settings.INVERT_RTOL * norm_inf(M) * max(norm_inf(inverse), 1.0):
        logger.warning(f"Inverse of {name} is inaccurate: ||MN - I|| = {backward:.3e}, rcond = {rcond:.3e}")
    return Inversion(_freeze(inverse), float(rcond))


def invert(M: np.ndarray, *, name: str = "matrix", rtol: Optional[float] = None) -> np.ndarray:
    """Inverse of ``M``; see :func:`invert_with_rcond`."""
    return invert_with_rcond(M, name=name, rtol=rtol).inverse


def solve_linear(M: np.ndarray, rhs: np.ndarray, *, name: str = "matrix", rtol: Optional[float] = None) -> np.ndarray:
    """Solve ``M x = rhs`` with the same singularity rule as :func:`invert`."""
    _require_square(M, name)
    lu, piv = _lu(M, name, rtol)
    return sla.lu_solve((lu, piv), rhs, check_finite=False)


def signed_determinant(M: np.ndarray, *, rtol: Optional[float] = None) -> Tuple[float, bool]:
    """
    Determinant by LU with partial pivoting plus a sign-reliability flag.

    The determinant is flagged indeterminate when its magnitude is within
    ``rtol`` times the Hadamard bound (product of column 2-norms).

    Returns:
        (determinant, indeterminate)
    """
    _require_square(M, "matrix")
    rtol = settings.DETERMINANT_RTOL if rtol is None else rtol
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(M, check_finite=False)
    swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
    det = float(np.prod(np.diag(lu))) * (-1.0 if swaps % 2 else 1.0)
    hadamard = float(np.prod(np.linalg.norm(M, axis=0)))
    return det, abs(det) <= rtol * hadamard


def spectral_radius(M: np.ndarray) -> float:
    """
    Largest eigenvalue modulus of a square real matrix.

    Raises:
        DimensionMismatch: M is not square
        NonConvergence: The eigenvalue iteration failed
    """
    _require_square(M, "matrix")
    if not np.any(M):
        return 0.0
    try:
        eigenvalues = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as e:
        raise NonConvergence(f"eigenvalue iteration failed: {e}") from e
    return float(np.max(np.abs(eigenvalues)))


def sigma_extremes(M: np.ndarray) -> Tuple[float, float]:
    """
    Largest and smallest singular values.

    For a rectangular matrix the smallest of the ``min(rows, cols)`` singular
    values is returned as ``sigma_min``.
    """
    if M.size == 0:
        raise InvalidMatrix("singular values of an empty matrix")
    try:
        sigma = np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as e:
        raise NonConvergence(f"SVD did not converge: {e}") from e
    return float(sigma[0]), float(sigma[-1])


def sigma_max(M: np.ndarray) -> float:
    return sigma_extremes(M)[0]


def sigma_min(M: np.ndarray) -> float:
    return sigma_extremes(M)[1]


def kron(A: np.ndarray, B: np.ndarray, *, cap: Optional[int] = None) -> np.ndarray:
    """
    Kronecker product with a dimension cap.

    Raises:
        DimensionOverflow: Either product dimension exceeds ``cap`` (default ``settings.KRON_CAP``)
    """
    cap = settings.KRON_CAP if cap is None else cap
    rows = A.shape[0] * B.shape[0]
    cols = A.shape[1] * B.shape[1]
    if max(rows, cols) > cap:
        raise DimensionOverflow("Kronecker product order", max(rows, cols), cap)
    return _freeze(np.kron(A, B))


def lift_identity(A: np.ndarray, copies: int, *, cap: Optional[int] = None) -> np.ndarray:
    """``I_copies ⊗ A``, the block-diagonal lift used by the matrix equations."""
    return kron(np.eye(copies), A, cap=cap)


def vec(X: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return _freeze(np.array(X, dtype=np.float64).reshape(-1, order="F"))


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size != rows * cols:
        raise DimensionMismatch(f"cannot unvec length {v.size} into {rows}x{cols}")
    return _freeze(v.reshape((rows, cols), order="F").copy())


def abs_elementwise(M: np.ndarray) -> np.ndarray:
    """Entrywise absolute value."""
    return _freeze(np.abs(np.asarray(M, dtype=np.float64)))
