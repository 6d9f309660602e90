"""Expected steering outer products under uniform angle uncertainty."""
import numpy as np

from numerics.special import sinc
from radar.geometry import ArrayGeometry
from utils.exceptions import DomainError


def _pairwise(positions: np.ndarray) -> np.ndarray:
    return positions[:, None] - positions[None, :]


def _kernel(outer: np.ndarray, inner: np.ndarray, wavelength: float, varpi: float, delta: float, sign: float) -> np.ndarray:
    if delta < 0:
        raise DomainError(f"angle uncertainty must be nonnegative, got {delta}")
    n_outer, n_inner = outer.shape[0], inner.shape[0]
    d_outer, d_inner = _pairwise(outer), _pairwise(inner)
    # index order (m, p, n, q): blocks over the outer array, entries over the inner one
    d_tilde = 2.0 * (d_outer[:, None, :, None] + d_inner[None, :, None, :]) / wavelength
    kernel = np.exp(sign * 1j * np.pi * d_tilde * varpi) * sinc(d_tilde * delta) / (n_outer * n_inner)
    kernel = kernel.reshape(n_outer * n_inner, n_outer * n_inner)
    return (kernel + kernel.conj().T) / 2


def c_kernel(geometry: ArrayGeometry, varpi: float, delta: float) -> np.ndarray:
    """E[(a_t kron a_r)(a_t kron a_r)^H] for omega ~ U(varpi - delta, varpi + delta)."""
    return _kernel(geometry.tx_positions, geometry.rx_positions, geometry.wavelength, varpi, delta, -1.0)


def d_kernel(geometry: ArrayGeometry, varpi: float, delta: float) -> np.ndarray:
    """E[(a_r* kron a_t*)(a_r* kron a_t*)^H] for omega ~ U(varpi - delta, varpi + delta)."""
    return _kernel(geometry.rx_positions, geometry.tx_positions, geometry.wavelength, varpi, delta, 1.0)
