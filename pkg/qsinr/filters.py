from dataclasses import dataclass
from typing import Union

import numpy as np

from radar.geometry import response
from radar.scene import RadarScene
from radar.waveform import Waveform
from utils.exceptions import DimensionMismatchError, NonFiniteFilterError, ZeroFilterError


@dataclass(frozen=True, eq=False)
class Filter:
    """Receive filter w = vec(W), W of shape (N_r, L), column-major."""

    w: np.ndarray
    n_rx: int

    def __post_init__(self):
        w = np.array(self.w, dtype=complex).reshape(-1)
        if self.n_rx < 1 or w.size % self.n_rx:
            raise DimensionMismatchError(f"filter length {w.size} is not a multiple of N_r={self.n_rx}")
        if not np.all(np.isfinite(w)):
            raise NonFiniteFilterError("filter entries must be finite")
        if not np.any(w):
            raise ZeroFilterError("filter must be nonzero")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def code_length(self) -> int:
        return self.w.shape[0] // self.n_rx

    @property
    def matrix(self) -> np.ndarray:
        return self.w.reshape(self.code_length, self.n_rx).T

    @property
    def energy(self) -> float:
        return float(np.vdot(self.w, self.w).real)

    @classmethod
    def matched(cls, scene: RadarScene, waveform: Waveform) -> "Filter":
        """w = A(theta0) s."""
        return cls(w=target_response(scene, waveform), n_rx=scene.n_rx)


FilterLike = Union[Filter, np.ndarray]


def as_vector(w: FilterLike) -> np.ndarray:
    if isinstance(w, Filter):
        return w.w
    return np.asarray(w, dtype=complex).reshape(-1)


def target_response(scene: RadarScene, waveform: Waveform) -> np.ndarray:
    """A(theta0) s."""
    return response(scene.geometry, waveform.matrix, np.sin(scene.target.angle))
