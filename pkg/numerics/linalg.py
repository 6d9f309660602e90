from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from utils.config import TOLERANCES
from utils.exceptions import AsymmetryError, DimensionMismatchError, NotPositiveDefiniteError


@dataclass(frozen=True)
class RealSymmetricEvd:
    """Eigen-decomposition with eigenvalues sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dimension(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def smallest(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def largest(self) -> float:
        return float(self.eigenvalues[0])

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


def _check_square(M: np.ndarray, name: str) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {M.shape}")


def check_hermitian(M: np.ndarray, tol: float, name: str = "matrix") -> None:
    """Elementwise check |M - M^H| <= tol * max(1, max|M|)."""
    _check_square(M, name)
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    deviation = float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0
    if deviation > tol * scale:
        raise AsymmetryError(f"{name} deviates from symmetry by {deviation:.3e}")


def hermitian_solve(A, b, *, tol: Optional[float] = None) -> np.ndarray:
    """Solve A x = b for Hermitian positive-definite A via Cholesky."""
    tol = TOLERANCES.hermitian if tol is None else tol
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    check_hermitian(A, tol, "A")
    if b.shape[0] != A.shape[0]:
        raise DimensionMismatchError(f"rhs length {b.shape[0]} does not match A of size {A.shape[0]}")

    try:
        factor = linalg.cho_factor(A, lower=True)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc
    return linalg.cho_solve(factor, b)


def real_symmetric_evd(M, *, tol: Optional[float] = None) -> RealSymmetricEvd:
    tol = TOLERANCES.symmetric if tol is None else tol
    M = np.asarray(M, dtype=float)
    check_hermitian(M, tol, "M")

    values, vectors = linalg.eigh(M)
    return RealSymmetricEvd(
        eigenvalues=_frozen(values[::-1]),
        eigenvectors=_frozen(vectors[:, ::-1]),
    )
