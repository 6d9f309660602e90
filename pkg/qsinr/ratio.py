import math

import numpy as np

from qsinr.filters import FilterLike, as_vector, target_response
from qsinr.matrices import phi_matrix, xi_quadratic
from radar.scene import RadarScene
from radar.waveform import Waveform
from utils.exceptions import ZeroFilterError


def _energy(w: np.ndarray) -> float:
    energy = float(np.vdot(w, w).real)
    if energy == 0.0:
        raise ZeroFilterError("filter must be nonzero")
    return energy


def rho(w: FilterLike, waveform: Waveform, scene: RadarScene) -> float:
    """(2/(pi sigma^2)) |w^H A(theta0) s|^2 / (w^H Xi(s) w + w^H w)."""
    w = as_vector(w)
    energy = _energy(w)
    gain = abs(np.vdot(w, target_response(scene, waveform))) ** 2
    return 2.0 / (math.pi * scene.noise_power) * gain / (xi_quadratic(w, waveform, scene) + energy)


def rho_phi_form(w: FilterLike, waveform: Waveform, scene: RadarScene) -> float:
    """Same ratio with the denominator written as s^H Phi(w) s."""
    w = as_vector(w)
    _energy(w)
    gain = abs(np.vdot(w, target_response(scene, waveform))) ** 2
    denominator = float(np.vdot(waveform.s, phi_matrix(w, scene) @ waveform.s).real)
    return 2.0 / (math.pi * scene.noise_power) * gain / denominator


def qsinr(w: FilterLike, waveform: Waveform, scene: RadarScene) -> float:
    """sigma0^2 rho for RFT targets, |alpha0|^2 rho for NFT targets."""
    return scene.target.power * rho(w, waveform, scene)


def infinite_bit_sinr(w: FilterLike, waveform: Waveform, scene: RadarScene) -> float:
    """Classical SINR of the same (w, s) with unquantized converters."""
    w = as_vector(w)
    energy = _energy(w)
    gain = abs(np.vdot(w, target_response(scene, waveform))) ** 2
    interference = math.pi * scene.noise_power / 2.0 * xi_quadratic(w, waveform, scene)
    return scene.target.power * gain / (interference + scene.noise_power * energy)
