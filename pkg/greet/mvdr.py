import logging

import numpy as np

from numerics.linalg import hermitian_solve
from qsinr.filters import Filter, target_response
from qsinr.matrices import xi_matrix
from radar.scene import RadarScene
from radar.waveform import Waveform
from utils.exceptions import DegenerateTargetResponseError

logger = logging.getLogger(__name__)

# ||A(theta0) s|| below this (for unit-energy s) counts as no target response
_DEGENERATE_RESPONSE = 1e-12


def mvdr_filter(waveform: Waveform, scene: RadarScene) -> Filter:
    """
    Distortionless minimum-variance filter for a fixed waveform:
    w = (Xi(s) + I)^-1 A(theta0) s / (s^H A^H(theta0) (Xi(s) + I)^-1 A(theta0) s).
    """
    target = target_response(scene, waveform)
    if np.linalg.norm(target) <= _DEGENERATE_RESPONSE:
        raise DegenerateTargetResponseError("A(theta0) s vanishes; no distortionless filter exists")

    covariance = xi_matrix(waveform, scene) + np.eye(scene.snapshot_dim)
    x = hermitian_solve(covariance, target)
    gain = float(np.vdot(target, x).real)
    return Filter(w=x / gain, n_rx=scene.n_rx)
