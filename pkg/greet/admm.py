"""
Inner solver of the waveform step.

For a fixed filter the waveform step minimises the real-valued ratio
s^T Phi s / s^T Gamma s over the one-bit alphabet. The alphabet is relaxed to
the box |s_k| <= 1/sqrt(n) and two splitting copies are introduced: t carries
the numerator under a unit-norm constraint, r carries the denominator.
Each iteration updates s (box projection), t (secular equation solved by
bisection), r (closed form in the rank-two eigenbasis of Gamma) and then the
scaled duals u1, u2.
"""
import logging
import math
from typing import NamedTuple, Optional, Tuple

import numpy as np

from greet.config import AdmmState, Diagnostics, GreetConfig
from numerics.linalg import RealSymmetricEvd, real_symmetric_evd
from numerics.roots import bisection_root, quartic_real_roots
from qsinr.filters import FilterLike
from qsinr.matrices import complexify_vec, gamma_matrix_for_scene, phi_matrix, realify
from radar.scene import RadarScene
from radar.waveform import Waveform
from utils.config import TOLERANCES
from utils.exceptions import DegenerateProjectionError, DomainError, EtaUndefinedError, RankViolationError

logger = logging.getLogger(__name__)

# relative tie window when two quartic candidates reach the same value
_TIE = 1e-12
_MAX_BRACKET_STEPS = 2000


class AdmmResult(NamedTuple):
    waveform: Waveform
    state: AdmmState
    diagnostics: Diagnostics


def admm_objective(s_tilde: np.ndarray, phi_tilde: np.ndarray, gamma_tilde: np.ndarray) -> float:
    """s^T Phi s / s^T Gamma s, +inf where the denominator vanishes."""
    denominator = float(s_tilde @ gamma_tilde @ s_tilde)
    if denominator <= 0.0:
        return math.inf
    return float(s_tilde @ phi_tilde @ s_tilde) / denominator


def s_update_target(t, u1, r, u2, rho1: float, rho2: float) -> np.ndarray:
    """b = rho1 (t + u1) + rho2 (r + u2)."""
    return rho1 * (np.asarray(t) + u1) + rho2 * (np.asarray(r) + u2)


def admm_s_update(t, u1, r, u2, rho1: float, rho2: float, n: int) -> np.ndarray:
    bound = 1.0 / math.sqrt(n)
    b = s_update_target(t, u1, r, u2, rho1, rho2)
    return np.clip(b / (rho1 + rho2), -bound, bound)


def box_kkt_violations(
    s_tilde: np.ndarray, b: np.ndarray, rho1: float, rho2: float, n: int, *, tol: float = 1e-12
) -> np.ndarray:
    """
    Mask of entries breaking the optimality conditions of
    min (rho1 + rho2)/2 ||s||^2 - b^T s over |s_k| <= 1/sqrt(n).
    """
    bound = 1.0 / math.sqrt(n)
    unconstrained = b / (rho1 + rho2)
    at_upper = np.isclose(s_tilde, bound, rtol=0.0, atol=tol)
    at_lower = np.isclose(s_tilde, -bound, rtol=0.0, atol=tol)
    interior = ~(at_upper | at_lower)

    bad = np.zeros(s_tilde.shape, dtype=bool)
    bad |= interior & (np.abs(s_tilde - unconstrained) > tol)
    bad |= at_upper & (unconstrained < bound - tol)
    bad |= at_lower & (unconstrained > -bound + tol)
    bad |= np.abs(s_tilde) > bound + tol
    return bad


def t_subproblem_objective(t, phi_tilde, s_tilde, u1, eta: float, rho1: float) -> float:
    """eta t^T Phi t + rho1/2 ||t - s + u1||^2."""
    t = np.asarray(t, dtype=float)
    gap = t - s_tilde + u1
    return float(eta * (t @ phi_tilde @ t) + 0.5 * rho1 * (gap @ gap))


def t_secular(nu: float, weights: np.ndarray, shift: np.ndarray) -> float:
    """||t(nu)||^2 - 1; strictly decreasing to the right of the pole at -min(shift)/2."""
    return float(np.sum(weights / (shift + 2 * nu) ** 2)) - 1.0


def _hard_case(g, shift, left, rho1, smallest_mask) -> np.ndarray:
    t_hat = np.zeros_like(g)
    rest = ~smallest_mask
    t_hat[rest] = rho1 * g[rest] / (shift[rest] + 2 * left)
    missing = max(0.0, 1.0 - float(t_hat @ t_hat))
    t_hat[np.flatnonzero(smallest_mask)[0]] = math.sqrt(missing)
    return t_hat


def admm_t_update(
    phi_evd: RealSymmetricEvd,
    s_tilde: np.ndarray,
    u1: np.ndarray,
    r: np.ndarray,
    gamma_tilde: np.ndarray,
    rho1: float,
    tol: Optional[float] = None,
    *,
    previous_t: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, float]:
    """
    Unit-norm minimiser of eta t^T Phi t + rho1/2 ||t - (s - u1)||^2 with
    eta = 1 / r^T Gamma r.

    In the eigenbasis of Phi the minimiser is t_k = rho1 g_k / (2 eta gamma_k + rho1 + 2 nu),
    where nu is the root of sum_k t_k^2 = 1 to the right of its pole.

    Returns:
        (t, nu); nu is nan when the previous t is kept because g vanishes.
    """
    tol = TOLERANCES.bisection if tol is None else tol
    curvature = float(r @ gamma_tilde @ r)
    if curvature <= TOLERANCES.eta * max(float(np.trace(gamma_tilde)), np.finfo(float).tiny):
        raise EtaUndefinedError(f"r^T Gamma r = {curvature:.3e} leaves eta undefined")
    eta = 1.0 / curvature

    eigenvalues, P = phi_evd.eigenvalues, phi_evd.eigenvectors
    g = P.T @ (s_tilde - u1)
    if not np.any(g):
        if previous_t is None:
            raise DegenerateProjectionError("s - u1 vanishes and there is no previous t to keep")
        logger.debug("t-update kept the previous iterate, s - u1 = 0")
        return np.array(previous_t, dtype=float), math.nan

    shift = 2 * eta * eigenvalues + rho1
    weights = (rho1 * g) ** 2
    left = -(eta * phi_evd.smallest) - rho1 / 2

    def secular(nu: float) -> float:
        return t_secular(nu, weights, shift)

    step = max(1.0, abs(left))
    for _ in range(_MAX_BRACKET_STEPS):
        if secular(left + step) < 0:
            break
        step *= 2
    hi = left + step

    lo_step = step
    floor = np.finfo(float).eps * max(1.0, abs(left))
    while secular(left + lo_step) <= 0:
        lo_step /= 2
        if lo_step < floor:
            smallest = np.isclose(shift, shift.min(), rtol=1e-12, atol=0.0)
            logger.debug("t-update hit the hard case, g has no weight on the smallest eigenvector")
            t_hat = _hard_case(g, shift, left, rho1, smallest)
            return P @ t_hat, left

    nu = bisection_root(secular, left + lo_step, hi, tol)
    t_hat = rho1 * g / (shift + 2 * nu)
    t_hat /= np.linalg.norm(t_hat)
    return P @ t_hat, nu


def r_plane_objective(r1: float, r2: float, q1: float, q2: float, p: float) -> float:
    return p / (r1 * r1 + r2 * r2) + (r1 - q1) ** 2 + (r2 - q2) ** 2


def _plane_candidates(q1: float, q2: float, p: float):
    if q1 == 0.0 and q2 == 0.0:
        radius = p ** 0.25
        return [(radius, 0.0)]
    if q2 == 0.0:
        return [(x, 0.0) for x in quartic_real_roots(1.0, -q1, 0.0, 0.0, -p)]
    if q1 == 0.0:
        return [(0.0, x) for x in quartic_real_roots(1.0, -q2, 0.0, 0.0, -p)]

    # pivot on the larger coordinate, the other follows the direction of q
    scale = p * (max(abs(q1), abs(q2)) ** 4) / (q1 * q1 + q2 * q2) ** 2
    if abs(q1) >= abs(q2):
        return [(x, q2 * x / q1) for x in quartic_real_roots(1.0, -q1, 0.0, 0.0, -scale)]
    return [(q1 * x / q2, x) for x in quartic_real_roots(1.0, -q2, 0.0, 0.0, -scale)]


def solve_rank_two_plane(q1: float, q2: float, p: float) -> Tuple[float, float]:
    """Minimiser of p / (r1^2 + r2^2) + (r1 - q1)^2 + (r2 - q2)^2 for p > 0."""
    candidates = [c for c in _plane_candidates(q1, q2, p) if c[0] != 0.0 or c[1] != 0.0]
    if not candidates:
        raise DomainError(f"no real stationary point for q=({q1!r}, {q2!r}), p={p!r}")

    values = [r_plane_objective(c[0], c[1], q1, q2, p) for c in candidates]
    best = min(values)
    window = best + _TIE * max(1.0, abs(best))
    tied = [c for c, value in zip(candidates, values) if value <= window]
    return max(tied, key=lambda c: (abs(c[0]), c[0] > 0))


def check_rank_two(gamma_evd: RealSymmetricEvd, rank_tol: float) -> float:
    """Common value of the two equal leading eigenvalues of a realified rank-one Gamma."""
    eigenvalues = gamma_evd.eigenvalues
    if gamma_evd.dimension < 2 or eigenvalues[0] <= 0:
        raise RankViolationError("Gamma has no positive eigenvalue pair")
    top = float(eigenvalues[0])
    if abs(top - float(eigenvalues[1])) > rank_tol * top:
        raise RankViolationError(f"leading eigenvalues {top:.6g}, {eigenvalues[1]:.6g} differ")
    if gamma_evd.dimension > 2 and np.max(np.abs(eigenvalues[2:])) > rank_tol * top:
        raise RankViolationError(f"Gamma is not rank two, third eigenvalue {eigenvalues[2]:.3e}")
    return (top + float(eigenvalues[1])) / 2


def admm_r_update(
    gamma_evd: RealSymmetricEvd,
    s_tilde: np.ndarray,
    u2: np.ndarray,
    t: np.ndarray,
    phi_tilde: np.ndarray,
    rho2: float,
    *,
    rank_tol: Optional[float] = None,
) -> np.ndarray:
    """
    Minimiser of t^T Phi t / r^T Gamma r + rho2/2 ||r - (s - u2)||^2.

    Only the two Gamma eigen-coordinates move; the rest equal those of s - u2.
    """
    rank_tol = TOLERANCES.rank if rank_tol is None else rank_tol
    level = check_rank_two(gamma_evd, rank_tol)
    target = s_tilde - u2
    basis = gamma_evd.eigenvectors[:, :2]
    q = basis.T @ target
    p = 2.0 * float(t @ phi_tilde @ t) / (level * rho2)
    if p == 0.0:
        return target.copy()

    r12 = np.array(solve_rank_two_plane(float(q[0]), float(q[1]), p))
    return target + basis @ (r12 - q)


def admm_dual_update(state: AdmmState) -> AdmmState:
    return state.replace(u1=state.u1 + state.t - state.s_tilde, u2=state.u2 + state.r - state.s_tilde)


def admm_solve(
    w: FilterLike,
    scene: RadarScene,
    init: AdmmState,
    config: GreetConfig,
    *,
    diagnostics: Optional[Diagnostics] = None,
    outer: int = 0,
) -> AdmmResult:
    """Run the inner iterations for a fixed filter and project onto the alphabet."""
    diagnostics = Diagnostics() if diagnostics is None else diagnostics
    phi_tilde = realify(phi_matrix(w, scene))
    gamma_tilde = realify(gamma_matrix_for_scene(w, scene))
    phi_evd = real_symmetric_evd(phi_tilde)
    gamma_evd = real_symmetric_evd(gamma_tilde)
    n = 2 * scene.waveform_dim

    state = init
    for iteration in range(config.max_admm_iters):
        s_new = admm_s_update(state.t, state.u1, state.r, state.u2, config.rho1, config.rho2, n)
        t, nu = admm_t_update(
            phi_evd, s_new, state.u1, state.r, gamma_tilde, config.rho1, config.bisection_tol, previous_t=state.t
        )
        r = admm_r_update(gamma_evd, s_new, state.u2, t, phi_tilde, config.rho2, rank_tol=config.rank_tol)

        residual_d = float(np.linalg.norm(s_new - state.s_tilde))
        state = admm_dual_update(state.replace(s_tilde=s_new, t=t, r=r))
        residual_c1 = float(np.linalg.norm(t - s_new))
        residual_c2 = float(np.linalg.norm(r - s_new))
        diagnostics.record_admm(
            outer,
            admm_objective(s_new, phi_tilde, gamma_tilde),
            residual_d,
            residual_c1,
            residual_c2,
            s_new,
            nu,
        )

        if config.residual_epsilon is not None and max(residual_d, residual_c1, residual_c2) < config.residual_epsilon:
            logger.debug(f"ADMM stopped after {iteration + 1} iterations")
            break

    waveform = Waveform.from_signs(complexify_vec(state.s_tilde), scene.n_tx)
    return AdmmResult(waveform=waveform, state=state, diagnostics=diagnostics)
