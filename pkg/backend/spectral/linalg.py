"""Dense symmetric eigensolving, singular values and numerical rank."""

# Built-in imports
from dataclasses import dataclass
from typing import Tuple, Union

# External imports
import numpy as np
import scipy.linalg

# Own imports
from common.exceptions import EigensolverError
from spectral.stepfn import StepFunction, from_counts


RANK_TOL = 1e-9
ZERO_SNAP = 1e-12
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Dense real symmetric matrix, checked at construction."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {entries.shape}")
        if entries.shape[0] == 0:
            raise ValueError("matrix dimension must be positive")
        scale = float(np.max(np.abs(entries))) if entries.size else 0.0
        asymmetry = float(np.max(np.abs(entries - entries.T)))
        if asymmetry > SYMMETRY_TOL * max(scale, 1e-300):
            raise ValueError(f"matrix is not symmetric (max asymmetry {asymmetry:.3e})")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __sub__(self, other: "SymMatrix") -> "SymMatrix":
        return SymMatrix(self.entries - other.entries)


MatrixLike = Union[SymMatrix, np.ndarray]


def _as_array(matrix: MatrixLike) -> np.ndarray:
    if isinstance(matrix, SymMatrix):
        return matrix.entries
    array = np.asarray(matrix, dtype=float)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {array.shape}")
    return array


def _snap_zeros(values: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    values = values.copy()
    values[np.abs(values) <= ZERO_SNAP * scale] = 0.0
    return values


def sym_spectrum(
    matrix: MatrixLike, return_vectors: bool = False
) -> Union[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
    """
    All eigenvalues of a symmetric matrix, ascending, with multiplicity.
    :param matrix: a SymMatrix (or an array, validated as one).
    :param return_vectors: also return the orthonormal eigenvectors (columns).
    """
    sym = matrix if isinstance(matrix, SymMatrix) else SymMatrix(matrix)
    try:
        if return_vectors:
            eigenvalues, eigenvectors = scipy.linalg.eigh(sym.entries)
            return _snap_zeros(eigenvalues), eigenvectors
        eigenvalues = scipy.linalg.eigh(sym.entries, eigvals_only=True)
    except scipy.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigh did not converge (dim={sym.dim}): {exc}") from exc
    return _snap_zeros(eigenvalues)


def singular_values(matrix: MatrixLike) -> np.ndarray:
    """
    Singular values, ascending: the spectrum of the positive square root of
    M^T M, computed directly by LAPACK SVD.
    """
    array = _as_array(matrix)
    try:
        values = scipy.linalg.svdvals(array)
    except scipy.linalg.LinAlgError as exc:
        raise EigensolverError(f"svd did not converge (dim={array.shape[0]}): {exc}") from exc
    return _snap_zeros(np.sort(np.maximum(values, 0.0)))


def numerical_rank(matrix: MatrixLike, tol: float = RANK_TOL) -> int:
    """Count of singular values above tol * max(1, largest singular value)."""
    if tol <= 0:
        raise ValueError("rank tolerance must be positive")
    array = _as_array(matrix)
    if not np.any(array):
        return 0
    values = singular_values(array)
    threshold = tol * max(1.0, float(values[-1]))
    return int(np.count_nonzero(values > threshold))


def spectral_distribution(matrix: MatrixLike) -> StepFunction:
    """Normalized eigenvalue counting function N_M (mass 1/dim per eigenvalue)."""
    eigenvalues = sym_spectrum(matrix)
    return from_counts(eigenvalues, eigenvalues.size)
