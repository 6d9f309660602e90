import dataclasses
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from radar.geometry import ArrayGeometry, channel_matrix, check_angle, response
from radar.waveform import Waveform
from utils.config import TOLERANCES
from utils.exceptions import DimensionMismatchError, DomainError, InvalidSceneError

logger = logging.getLogger(__name__)


class TargetKind(str, Enum):
    NFT = "nft"  # nonfluctuating, fixed amplitude alpha0
    RFT = "rft"  # Rayleigh fluctuating, xi0 ~ CN(0, sigma0^2)


@dataclass(frozen=True)
class TargetModel:
    angle: float
    kind: TargetKind = TargetKind.NFT
    amplitude: complex = 0j
    variance: float = 0.0

    def __post_init__(self):
        try:
            check_angle(self.angle)
        except ValueError as exc:
            raise InvalidSceneError(f"target angle: {exc}") from exc
        object.__setattr__(self, "kind", TargetKind(self.kind))
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if self.kind is TargetKind.RFT and not self.variance > 0:
            raise InvalidSceneError(f"RFT target needs a positive variance, got {self.variance}")

    @classmethod
    def nft(cls, angle: float, amplitude: complex) -> "TargetModel":
        return cls(angle=angle, kind=TargetKind.NFT, amplitude=amplitude)

    @classmethod
    def rft(cls, angle: float, variance: float) -> "TargetModel":
        return cls(angle=angle, kind=TargetKind.RFT, variance=variance)

    @property
    def power(self) -> float:
        """|alpha0|^2 for NFT, sigma0^2 for RFT."""
        if self.kind is TargetKind.RFT:
            return self.variance
        return abs(self.amplitude) ** 2

    def with_power(self, power: float) -> "TargetModel":
        if self.kind is TargetKind.RFT:
            return dataclasses.replace(self, variance=power)
        phase = np.angle(self.amplitude) if self.amplitude != 0 else 0.0
        return dataclasses.replace(self, amplitude=math.sqrt(power) * np.exp(1j * phase))


@dataclass(frozen=True)
class InterferenceSource:
    """Interferer at normalized angle omega ~ U(varpi - delta, varpi + delta)."""

    mean_normalized_angle: float
    uncertainty: float = 0.0
    power: float = 1.0

    def __post_init__(self):
        varpi, delta = self.mean_normalized_angle, self.uncertainty
        if not -1.0 <= varpi <= 1.0:
            raise InvalidSceneError(f"normalized angle must be in [-1, 1], got {varpi}")
        if not delta >= 0:
            raise InvalidSceneError(f"angle uncertainty must be nonnegative, got {delta}")
        if varpi - delta < -1.0 - TOLERANCES.angle or varpi + delta > 1.0 + TOLERANCES.angle:
            raise InvalidSceneError(f"[{varpi - delta}, {varpi + delta}] leaves [-1, 1]")
        if not self.power > 0:
            raise InvalidSceneError(f"interference power must be positive, got {self.power}")

    @classmethod
    def from_angle(cls, angle: float, uncertainty: float = 0.0, power: float = 1.0) -> "InterferenceSource":
        return cls(mean_normalized_angle=math.sin(angle), uncertainty=uncertainty, power=power)

    @property
    def is_stochastic(self) -> bool:
        return self.uncertainty > 0

    @property
    def mean_angle(self) -> float:
        return math.asin(self.mean_normalized_angle)


@dataclass(frozen=True)
class RadarScene:
    geometry: ArrayGeometry
    target: TargetModel
    interferences: Tuple[InterferenceSource, ...] = field(default_factory=tuple)
    noise_power: float = 1.0
    code_length: int = 1

    def __post_init__(self):
        object.__setattr__(self, "interferences", tuple(self.interferences))
        if not self.noise_power > 0:
            raise InvalidSceneError(f"noise power must be positive, got {self.noise_power}")
        if int(self.code_length) != self.code_length or self.code_length < 1:
            raise InvalidSceneError(f"code length must be a positive integer, got {self.code_length}")
        object.__setattr__(self, "code_length", int(self.code_length))

    @property
    def n_tx(self) -> int:
        return self.geometry.n_tx

    @property
    def n_rx(self) -> int:
        return self.geometry.n_rx

    @property
    def num_interferences(self) -> int:
        return len(self.interferences)

    @property
    def snapshot_dim(self) -> int:
        return self.n_rx * self.code_length

    @property
    def waveform_dim(self) -> int:
        return self.n_tx * self.code_length

    @property
    def is_stochastic(self) -> bool:
        return any(source.is_stochastic for source in self.interferences)

    def target_channel(self) -> np.ndarray:
        return channel_matrix(self.geometry, self.target.angle, self.code_length)

    def interference_channel(self, k: int) -> np.ndarray:
        """A(theta_k) at the mean angle of interferer k."""
        return channel_matrix(self.geometry, self.interferences[k].mean_angle, self.code_length)

    def replace_interference(self, power: Optional[float] = None, delta: Optional[float] = None) -> "RadarScene":
        """Set the power and/or uncertainty of every interferer."""
        sources = []
        for source in self.interferences:
            changes = {}
            if power is not None:
                changes["power"] = power
            if delta is not None:
                changes["uncertainty"] = delta
            sources.append(dataclasses.replace(source, **changes))
        return dataclasses.replace(self, interferences=tuple(sources))

    def with_target(self, target: TargetModel) -> "RadarScene":
        return dataclasses.replace(self, target=target)

    def with_geometry(self, geometry: ArrayGeometry) -> "RadarScene":
        return dataclasses.replace(self, geometry=geometry)

    def with_code_length(self, code_length: int) -> "RadarScene":
        return dataclasses.replace(self, code_length=code_length)


def noise_free_returns(
    scene: RadarScene,
    waveform: Waveform,
    interference_draw: Sequence[complex],
    target_draw: complex,
    angle_draw: Sequence[float],
) -> Tuple[np.ndarray, np.ndarray]:
    """
    h1 = xi0 A(theta0) s + sum_k xi_k A(omega_k) s and h0 = h1 without the target term.
    """
    xi = np.asarray(interference_draw, dtype=complex).reshape(-1)
    omega = np.asarray(angle_draw, dtype=float).reshape(-1)
    if xi.size != scene.num_interferences or omega.size != scene.num_interferences:
        raise DimensionMismatchError(
            f"scene has {scene.num_interferences} interferers, got {xi.size} amplitudes and {omega.size} angles"
        )
    if waveform.dimension != scene.waveform_dim:
        raise DimensionMismatchError(f"waveform length {waveform.dimension} != N_t L = {scene.waveform_dim}")
    for source, w_k in zip(scene.interferences, omega):
        lo = source.mean_normalized_angle - source.uncertainty - TOLERANCES.angle
        hi = source.mean_normalized_angle + source.uncertainty + TOLERANCES.angle
        if not lo <= w_k <= hi:
            raise DomainError(f"interference angle draw {w_k} outside [{lo}, {hi}]")

    S = waveform.matrix
    if xi.size:
        h0 = xi @ response(scene.geometry, S, omega)
    else:
        h0 = np.zeros(scene.snapshot_dim, dtype=complex)
    h1 = h0 + complex(target_draw) * response(scene.geometry, S, math.sin(scene.target.angle))
    return h1, h0
