import logging
import math
from typing import Optional

import numpy as np

from numerics.linalg import check_hermitian
from qsinr.filters import FilterLike, as_vector
from qsinr.kernels import c_kernel, d_kernel
from radar.geometry import adjoint_response, response
from radar.scene import InterferenceSource, RadarScene
from radar.waveform import Waveform
from utils.config import TOLERANCES
from utils.exceptions import DimensionMismatchError, ZeroFilterError

logger = logging.getLogger(__name__)


def hermitize(M: np.ndarray) -> np.ndarray:
    return (M + M.conj().T) / 2


def interference_weight(source: InterferenceSource, scene: RadarScene) -> float:
    """2 sigma_k^2 / (pi sigma^2)."""
    return 2.0 * source.power / (math.pi * scene.noise_power)


def _use_kernel(source: InterferenceSource, use_kernels: Optional[bool]) -> bool:
    return source.is_stochastic if use_kernels is None else use_kernels


def _check_waveform(waveform: Waveform, scene: RadarScene) -> None:
    if waveform.n_tx != scene.n_tx or waveform.dimension != scene.waveform_dim:
        raise DimensionMismatchError(f"waveform length {waveform.dimension} does not match N_t L = {scene.waveform_dim}")


def _filter_matrix(w: np.ndarray, scene: RadarScene) -> np.ndarray:
    if w.shape[0] != scene.snapshot_dim:
        raise DimensionMismatchError(f"filter length {w.shape[0]} does not match N_r L = {scene.snapshot_dim}")
    return w.reshape(scene.code_length, scene.n_rx).T


def xi_matrix(waveform: Waveform, scene: RadarScene, *, use_kernels: Optional[bool] = None) -> np.ndarray:
    """
    Interference term Xi(s) of shape (N_r L, N_r L).

    Interferers with uncertainty use the C kernel; ``use_kernels`` forces the
    kernel path (True) or the mean-angle outer product (False) for all of them.
    """
    _check_waveform(waveform, scene)
    n = scene.snapshot_dim
    xi = np.zeros((n, n), dtype=complex)
    if not scene.interferences:
        return xi

    S = waveform.matrix
    lifted = None
    for source in scene.interferences:
        weight = interference_weight(source, scene)
        if _use_kernel(source, use_kernels):
            if lifted is None:
                lifted = np.kron(S.T, np.eye(scene.n_rx))
            kernel = c_kernel(scene.geometry, source.mean_normalized_angle, source.uncertainty)
            xi += weight * (lifted @ kernel @ lifted.conj().T)
        else:
            v = response(scene.geometry, S, source.mean_normalized_angle)
            xi += weight * np.outer(v, v.conj())
    return hermitize(xi)


def phi_matrix(w: FilterLike, scene: RadarScene, *, use_kernels: Optional[bool] = None) -> np.ndarray:
    """Phi(w) = sum_k weight_k A_k^H w w^H A_k + ||w||^2 I, shape (N_t L, N_t L)."""
    w = as_vector(w)
    energy = float(np.vdot(w, w).real)
    if energy == 0.0:
        raise ZeroFilterError("phi_matrix needs a nonzero filter")
    W = _filter_matrix(w, scene)

    phi = energy * np.eye(scene.waveform_dim, dtype=complex)
    lifted = None
    for source in scene.interferences:
        weight = interference_weight(source, scene)
        if _use_kernel(source, use_kernels):
            if lifted is None:
                lifted = np.kron(W.T, np.eye(scene.n_tx))
            kernel = d_kernel(scene.geometry, source.mean_normalized_angle, source.uncertainty)
            phi += weight * (lifted @ kernel @ lifted.conj().T)
        else:
            u = adjoint_response(scene.geometry, W, source.mean_normalized_angle)
            phi += weight * np.outer(u, u.conj())
    return hermitize(phi)


def xi_quadratic(w: FilterLike, waveform: Waveform, scene: RadarScene, *, use_kernels: Optional[bool] = None) -> float:
    """w^H Xi(s) w without forming Xi."""
    w = as_vector(w)
    _check_waveform(waveform, scene)
    W = _filter_matrix(w, scene)
    S = waveform.matrix
    total = 0.0
    for source in scene.interferences:
        weight = interference_weight(source, scene)
        if _use_kernel(source, use_kernels):
            # (S^T kron I_Nr)^H w = vec(W S^H), laid out in (m, p) order
            projected = (S.conj() @ W.T).reshape(-1)
            kernel = c_kernel(scene.geometry, source.mean_normalized_angle, source.uncertainty)
            total += weight * float(np.vdot(projected, kernel @ projected).real)
        else:
            v = response(scene.geometry, S, source.mean_normalized_angle)
            total += weight * abs(np.vdot(w, v)) ** 2
    return total


def gamma_matrix(w: FilterLike, A_theta0: np.ndarray) -> np.ndarray:
    """Gamma(w) = A^H(theta0) w w^H A(theta0), rank one."""
    u = A_theta0.conj().T @ as_vector(w)
    return np.outer(u, u.conj())


def gamma_matrix_for_scene(w: FilterLike, scene: RadarScene) -> np.ndarray:
    W = _filter_matrix(as_vector(w), scene)
    u = adjoint_response(scene.geometry, W, math.sin(scene.target.angle))
    return np.outer(u, u.conj())


def realify(M: np.ndarray, *, tol: Optional[float] = None) -> np.ndarray:
    """[[Re M, -Im M], [Im M, Re M]] for Hermitian M."""
    tol = TOLERANCES.hermitian if tol is None else tol
    M = np.asarray(M, dtype=complex)
    check_hermitian(M, tol, "M")
    re, im = M.real, M.imag
    return np.block([[re, -im], [im, re]])


def realify_vec(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.concatenate([v.real, v.imag])


def complexify_vec(v_tilde) -> np.ndarray:
    v_tilde = np.asarray(v_tilde, dtype=float).reshape(-1)
    if v_tilde.size % 2:
        raise DimensionMismatchError(f"real-valued vector must have even length, got {v_tilde.size}")
    half = v_tilde.size // 2
    return v_tilde[:half] + 1j * v_tilde[half:]
