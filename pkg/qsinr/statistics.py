import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from numerics.special import erf
from qsinr.detection import pd_nft, pd_rft, threshold_for_pf
from qsinr.filters import FilterLike, as_vector, target_response
from qsinr.matrices import xi_quadratic
from radar.geometry import response
from radar.scene import RadarScene, TargetKind
from radar.waveform import Waveform
from utils.exceptions import DimensionMismatchError, DomainError


class Prop1Moments(NamedTuple):
    """First-order and exact moments of one quantized sample Q(h + v)."""

    mean: complex
    variance: float
    exact_mean: complex
    exact_variance: float


def prop1_moments(h: complex, sigma_sq: float) -> Prop1Moments:
    if not sigma_sq > 0:
        raise DomainError(f"noise power must be positive, got {sigma_sq}")
    h = complex(h)
    sigma = math.sqrt(sigma_sq)
    exact_mean = complex(erf(h.real / sigma), erf(h.imag / sigma))
    return Prop1Moments(
        mean=math.sqrt(4.0 / (math.pi * sigma_sq)) * h,
        variance=2.0,
        exact_mean=exact_mean,
        exact_variance=2.0 - abs(exact_mean) ** 2,
    )


def _beta_from_response(w: np.ndarray, As: np.ndarray, sigma_sq: float) -> complex:
    return complex(math.sqrt(4.0 / (math.pi * sigma_sq)) * np.vdot(As, w))


def beta(w: FilterLike, waveform: Waveform, A_theta: np.ndarray, sigma_sq: float) -> complex:
    """sqrt(4/(pi sigma^2)) s^H A^H(theta) w."""
    w = as_vector(w)
    if A_theta.shape != (w.shape[0], waveform.dimension):
        raise DimensionMismatchError(f"channel of shape {A_theta.shape} does not fit w ({w.shape[0]}) and s ({waveform.dimension})")
    return _beta_from_response(w, A_theta @ waveform.s, sigma_sq)


def target_beta(w: FilterLike, waveform: Waveform, scene: RadarScene) -> complex:
    return _beta_from_response(as_vector(w), target_response(scene, waveform), scene.noise_power)


def interference_betas(w: FilterLike, waveform: Waveform, scene: RadarScene) -> np.ndarray:
    """beta_1 ... beta_K at the mean interference angles."""
    w = as_vector(w)
    if not scene.interferences:
        return np.zeros(0, dtype=complex)
    omegas = np.array([source.mean_normalized_angle for source in scene.interferences])
    responses = response(scene.geometry, waveform.matrix, omegas)
    return np.array([_beta_from_response(w, As, scene.noise_power) for As in responses])


def sigma_in_sq(w: FilterLike, waveform: Waveform, scene: RadarScene) -> float:
    """
    Interference-plus-noise power of z = w^H y.

    Equals 2 w^H w + beta^H Sigma beta for fixed angles and
    2 (w^H w + w^H Xi(s) w) in general, the two agreeing when every delta is 0.
    """
    w = as_vector(w)
    energy = float(np.vdot(w, w).real)
    if not scene.is_stochastic:
        betas = interference_betas(w, waveform, scene)
        powers = np.array([source.power for source in scene.interferences])
        return 2.0 * energy + float(np.sum(powers * np.abs(betas) ** 2))
    return 2.0 * (energy + xi_quadratic(w, waveform, scene))


@dataclass(frozen=True)
class DetectionReport:
    sigma_in_sq: float
    beta0: complex
    betas: np.ndarray
    qsinr: float
    rho: float
    pf: float
    pd: float
    threshold: Optional[float] = None
    kind: TargetKind = TargetKind.NFT
    # P_d of uncertain-angle scenes rests on the same Gaussian argument as fixed angles
    stochastic: bool = False


def detection_report(w: FilterLike, waveform: Waveform, scene: RadarScene, target_pf: float) -> DetectionReport:
    w = as_vector(w)
    power = sigma_in_sq(w, waveform, scene)
    beta0 = target_beta(w, waveform, scene)
    threshold = threshold_for_pf(target_pf, power)
    rho = abs(beta0) ** 2 / power
    if scene.target.kind is TargetKind.RFT:
        pd = pd_rft(target_pf, scene.target.variance, beta0, power)
    else:
        pd = pd_nft(target_pf, scene.target.amplitude, beta0, power)
    return DetectionReport(
        sigma_in_sq=power,
        beta0=beta0,
        betas=interference_betas(w, waveform, scene),
        qsinr=scene.target.power * rho,
        rho=rho,
        pf=target_pf,
        pd=pd,
        threshold=threshold,
        kind=scene.target.kind,
        stochastic=scene.is_stochastic,
    )
