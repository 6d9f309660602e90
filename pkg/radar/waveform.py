import logging
import math
from dataclasses import dataclass

import numpy as np

from radar.geometry import ArrayGeometry, check_angle, steering_from_normalized
from utils.config import TOLERANCES
from utils.exceptions import DimensionMismatchError, InvalidWaveformError
from utils.units import to_db

logger = logging.getLogger(__name__)


def one_bit_quantize(x) -> np.ndarray:
    """Entrywise sign(Re) + j sign(Im) with sign(0) = +1."""
    x = np.asarray(x)
    return np.where(x.real >= 0, 1.0, -1.0) + 1j * np.where(x.imag >= 0, 1.0, -1.0)


def alphabet_scale(dimension: int) -> float:
    return 1.0 / math.sqrt(2 * dimension)


@dataclass(frozen=True, eq=False)
class Waveform:
    """
    Transmit waveform s = vec(S), S of shape (N_t, L), column-major.

    ``one_bit`` waveforms carry entries from (1/sqrt(2 N_t L)) {+-1 +-j}
    exactly.
    """

    s: np.ndarray
    n_tx: int
    one_bit: bool = False

    def __post_init__(self):
        s = np.array(self.s, dtype=complex).reshape(-1)
        if self.n_tx < 1 or s.size % self.n_tx:
            raise DimensionMismatchError(f"waveform length {s.size} is not a multiple of N_t={self.n_tx}")
        energy = float(np.vdot(s, s).real)
        if abs(energy - 1.0) > TOLERANCES.unit_energy:
            raise InvalidWaveformError(f"waveform energy {energy!r} is not 1")
        if self.one_bit:
            scale = alphabet_scale(s.size)
            if not (np.all(np.abs(s.real) == scale) and np.all(np.abs(s.imag) == scale)):
                raise InvalidWaveformError("one-bit waveform has entries outside the alphabet")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    @property
    def dimension(self) -> int:
        return self.s.shape[0]

    @property
    def code_length(self) -> int:
        return self.dimension // self.n_tx

    @property
    def matrix(self) -> np.ndarray:
        return self.s.reshape(self.code_length, self.n_tx).T

    @property
    def realified(self) -> np.ndarray:
        return np.concatenate([self.s.real, self.s.imag])

    @classmethod
    def from_matrix(cls, S: np.ndarray, one_bit: bool = False) -> "Waveform":
        S = np.asarray(S)
        return cls(s=S.T.reshape(-1), n_tx=S.shape[0], one_bit=one_bit)

    @classmethod
    def from_signs(cls, signs, n_tx: int) -> "Waveform":
        """Scale a {+-1 +-j} vector (after a sign map) onto the alphabet."""
        signs = one_bit_quantize(signs)
        scale = alphabet_scale(signs.size)
        return cls(s=scale * signs.real + 1j * (scale * signs.imag), n_tx=n_tx, one_bit=True)

    @classmethod
    def random_one_bit(cls, n_tx: int, code_length: int, rng: np.random.Generator) -> "Waveform":
        n = n_tx * code_length
        re = rng.choice((-1.0, 1.0), size=n)
        im = rng.choice((-1.0, 1.0), size=n)
        return cls.from_signs(re + 1j * im, n_tx)

    def symbols(self) -> np.ndarray:
        """2-bit alphabet index per entry: bit 0 is a negative real part, bit 1 a negative imaginary part."""
        if not self.one_bit:
            raise InvalidWaveformError("only one-bit waveforms have symbol indices")
        return ((self.s.real < 0).astype(np.uint8) | ((self.s.imag < 0).astype(np.uint8) << 1))

    @classmethod
    def from_symbols(cls, symbols, n_tx: int) -> "Waveform":
        symbols = np.asarray(symbols, dtype=np.uint8)
        if np.any(symbols > 3):
            raise InvalidWaveformError("symbol indices must be in 0..3")
        re = np.where(symbols & 1, -1.0, 1.0)
        im = np.where(symbols & 2, -1.0, 1.0)
        return cls.from_signs(re + 1j * im, n_tx)


def matched_phase_onebit_waveform(geometry: ArrayGeometry, theta0: float, code_length: int) -> Waveform:
    """
    One-bit waveform whose phases approximate those matched to theta0.

    Element k uses phi_k = 2 pi d_k sin(theta0)/lambda + pi/4, and the
    quadrant of phi_k mod 2 pi picks one of pi/4, 3pi/4, 5pi/4, 7pi/4.
    """
    check_angle(theta0)
    matched = 2 * np.pi * geometry.tx_positions * math.sin(theta0) / geometry.wavelength
    cell = np.floor(np.mod(matched + np.pi / 4, 2 * np.pi) / (np.pi / 2))
    chosen = np.pi / 4 + np.minimum(cell, 3) * np.pi / 2
    column = np.sign(np.cos(chosen)) + 1j * np.sign(np.sin(chosen))
    signs = np.tile(column, code_length)
    return Waveform.from_signs(signs, geometry.n_tx)


def matched_phase_waveform(geometry: ArrayGeometry, theta0: float, code_length: int) -> Waveform:
    """Infinite-resolution waveform e^{j 2 pi d_k sin(theta0)/lambda} / sqrt(N_t L)."""
    check_angle(theta0)
    matched = 2 * np.pi * geometry.tx_positions * math.sin(theta0) / geometry.wavelength
    column = np.exp(1j * matched) / math.sqrt(geometry.n_tx * code_length)
    return Waveform(s=np.tile(column, code_length), n_tx=geometry.n_tx)


def residual_phases(geometry: ArrayGeometry, theta0: float, waveform: Waveform) -> np.ndarray:
    """Per-element phase offset from the matched phase, wrapped to [-pi, pi)."""
    matched = 2 * np.pi * geometry.tx_positions * math.sin(theta0) / geometry.wavelength
    offset = np.angle(waveform.matrix) - matched[:, None]
    return np.mod(offset + np.pi, 2 * np.pi) - np.pi


def transmit_beampattern(geometry: ArrayGeometry, waveform: Waveform, theta):
    """F(theta) = ||a_t(theta)^T S||^2; scalar or array theta."""
    check_angle(theta)
    if waveform.n_tx != geometry.n_tx:
        raise DimensionMismatchError(f"waveform N_t={waveform.n_tx} but geometry N_t={geometry.n_tx}")
    a_t = steering_from_normalized(geometry.tx_positions, geometry.wavelength, np.sin(theta))
    power = np.sum(np.abs(a_t @ waveform.matrix) ** 2, axis=-1)
    return float(power) if np.ndim(power) == 0 else power


def lis_margin_db(h, noise_power: float) -> float:
    """10 log10(max_l |h_l|^2 / sigma^2); strongly negative values mean the low-SNR regime holds."""
    h = np.asarray(h)
    peak = float(np.max(np.abs(h) ** 2)) if h.size else 0.0
    return to_db(peak / noise_power)
