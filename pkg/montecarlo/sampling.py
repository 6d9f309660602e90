import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from radar.geometry import response
from radar.scene import RadarScene, TargetKind
from radar.waveform import Waveform, one_bit_quantize


def complex_gaussian(rng: np.random.Generator, shape, power: float = 1.0) -> np.ndarray:
    """Circular CN(0, power): real and imaginary parts each with variance power/2."""
    scale = math.sqrt(power / 2.0)
    return scale * rng.standard_normal(shape) + 1j * (scale * rng.standard_normal(shape))


@dataclass(frozen=True)
class TrialDraws:
    interference: np.ndarray  # (B, K) amplitudes xi_k
    angles: np.ndarray  # (B, K) normalized angles omega_k
    target: np.ndarray  # (B,) xi_0

    @property
    def size(self) -> int:
        return self.target.shape[0]


def draw_trials(
    scene: RadarScene,
    rng: np.random.Generator,
    size: int,
    *,
    draw_angles: bool = True,
    draw_target: bool = True,
) -> TrialDraws:
    powers = np.array([source.power for source in scene.interferences], dtype=float)
    means = np.array([source.mean_normalized_angle for source in scene.interferences], dtype=float)
    deltas = np.array([source.uncertainty for source in scene.interferences], dtype=float)

    interference = complex_gaussian(rng, (size, scene.num_interferences)) * np.sqrt(powers)
    angles = np.tile(means, (size, 1))
    moving = deltas > 0
    if draw_angles and np.any(moving):
        angles[:, moving] = rng.uniform(means[moving] - deltas[moving], means[moving] + deltas[moving], size=(size, int(moving.sum())))

    target = scene.target
    if target.kind is TargetKind.RFT and draw_target:
        xi0 = complex_gaussian(rng, size, target.variance)
    elif target.kind is TargetKind.RFT:
        xi0 = np.full(size, math.sqrt(target.variance), dtype=complex)
    else:
        xi0 = np.full(size, target.amplitude, dtype=complex)
    return TrialDraws(interference=interference, angles=angles, target=xi0)


def block_returns(scene: RadarScene, waveform: Waveform, draws: TrialDraws) -> Tuple[np.ndarray, np.ndarray]:
    """Noise-free returns (h1, h0) for every trial of a block, each of shape (B, N_r L)."""
    S = waveform.matrix
    if scene.num_interferences:
        responses = response(scene.geometry, S, draws.angles)
        h0 = np.einsum("bk,bkn->bn", draws.interference, responses)
    else:
        h0 = np.zeros((draws.size, scene.snapshot_dim), dtype=complex)
    target = response(scene.geometry, S, math.sin(scene.target.angle))
    h1 = h0 + draws.target[:, None] * target[None, :]
    return h1, h0


def filter_outputs(w: np.ndarray, returns: np.ndarray, noise: np.ndarray) -> np.ndarray:
    """z = w^H Q(h + v) for each row."""
    return one_bit_quantize(returns + noise) @ w.conj()
