import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from utils.config import TOLERANCES
from utils.exceptions import AngleOutOfRangeError, DimensionMismatchError, InvalidSceneError


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Transmit/receive element positions (same length unit as the wavelength)."""

    tx_positions: np.ndarray
    rx_positions: np.ndarray
    wavelength: float = 1.0

    def __post_init__(self):
        tx = np.array(self.tx_positions, dtype=float).reshape(-1)
        rx = np.array(self.rx_positions, dtype=float).reshape(-1)
        if tx.size < 1 or rx.size < 1:
            raise InvalidSceneError("geometry needs at least one transmit and one receive element")
        if not (np.all(np.isfinite(tx)) and np.all(np.isfinite(rx))):
            raise InvalidSceneError("element positions must be finite")
        if not (math.isfinite(self.wavelength) and self.wavelength > 0):
            raise InvalidSceneError(f"wavelength must be positive, got {self.wavelength}")
        tx.setflags(write=False)
        rx.setflags(write=False)
        object.__setattr__(self, "tx_positions", tx)
        object.__setattr__(self, "rx_positions", rx)
        object.__setattr__(self, "wavelength", float(self.wavelength))

    @classmethod
    def uniform_linear(
        cls, n_tx: int, n_rx: int, wavelength: float = 1.0, spacing: Optional[float] = None
    ) -> "ArrayGeometry":
        """ULA with element k at k * spacing; half-wavelength spacing by default."""
        if n_tx < 1 or n_rx < 1:
            raise InvalidSceneError(f"element counts must be positive, got {n_tx}, {n_rx}")
        spacing = wavelength / 2 if spacing is None else spacing
        return cls(
            tx_positions=np.arange(n_tx) * spacing,
            rx_positions=np.arange(n_rx) * spacing,
            wavelength=wavelength,
        )

    @property
    def n_tx(self) -> int:
        return self.tx_positions.shape[0]

    @property
    def n_rx(self) -> int:
        return self.rx_positions.shape[0]

    def __repr__(self) -> str:
        return f"ArrayGeometry(n_tx={self.n_tx}, n_rx={self.n_rx}, wavelength={self.wavelength})"


def check_angle(theta) -> None:
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)) or np.any(np.abs(theta) > math.pi / 2 + TOLERANCES.angle):
        raise AngleOutOfRangeError(f"angles must lie in [-pi/2, pi/2], got {theta}")


def steering_from_normalized(positions: np.ndarray, wavelength: float, omega) -> np.ndarray:
    """
    Unit-norm steering vectors exp(-j 2 pi d_k omega / lambda) / sqrt(N).

    ``omega`` = sin(theta) may be a scalar or an array; the element axis is
    appended last.
    """
    omega = np.asarray(omega, dtype=float)
    phase = np.multiply.outer(omega, positions) * (-2.0 * np.pi / wavelength)
    return np.exp(1j * phase) / np.sqrt(positions.shape[0])


def tx_steering(geometry: ArrayGeometry, theta) -> np.ndarray:
    check_angle(theta)
    return steering_from_normalized(geometry.tx_positions, geometry.wavelength, np.sin(theta))


def rx_steering(geometry: ArrayGeometry, theta) -> np.ndarray:
    check_angle(theta)
    return steering_from_normalized(geometry.rx_positions, geometry.wavelength, np.sin(theta))


def channel_matrix(geometry: ArrayGeometry, theta: float, code_length: int) -> np.ndarray:
    """Dense A(theta) = I_L kron a_r a_t^T of shape (N_r L, N_t L)."""
    block = np.outer(rx_steering(geometry, theta), tx_steering(geometry, theta))
    return np.kron(np.eye(code_length), block)


def response(geometry: ArrayGeometry, S: np.ndarray, omega) -> np.ndarray:
    """
    A(omega) s for waveform matrix S (N_t x L), without forming A.

    Output has shape omega.shape + (N_r L,), laid out as vec of the
    N_r x L matrix a_r (a_t^T S).
    """
    if S.ndim != 2 or S.shape[0] != geometry.n_tx:
        raise DimensionMismatchError(f"waveform matrix shape {S.shape} does not match N_t={geometry.n_tx}")
    a_t = steering_from_normalized(geometry.tx_positions, geometry.wavelength, omega)
    a_r = steering_from_normalized(geometry.rx_positions, geometry.wavelength, omega)
    beam = a_t @ S
    out = beam[..., :, None] * a_r[..., None, :]
    return out.reshape(out.shape[:-2] + (-1,))


def adjoint_response(geometry: ArrayGeometry, W: np.ndarray, omega) -> np.ndarray:
    """A(omega)^H w for filter matrix W (N_r x L); output omega.shape + (N_t L,)."""
    if W.ndim != 2 or W.shape[0] != geometry.n_rx:
        raise DimensionMismatchError(f"filter matrix shape {W.shape} does not match N_r={geometry.n_rx}")
    a_t = steering_from_normalized(geometry.tx_positions, geometry.wavelength, omega)
    a_r = steering_from_normalized(geometry.rx_positions, geometry.wavelength, omega)
    combined = a_r.conj() @ W
    out = combined[..., :, None] * a_t.conj()[..., None, :]
    return out.reshape(out.shape[:-2] + (-1,))
