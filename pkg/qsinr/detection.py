import math
from typing import Iterable

import numpy as np

from numerics.special import marcum_q1
from radar.scene import TargetKind
from utils.exceptions import DomainError


def _check_pf(pf: float) -> None:
    if not 0.0 < pf <= 1.0:
        raise DomainError(f"false-alarm probability must be in (0, 1], got {pf}")


def pf(threshold: float, sigma_in_sq: float) -> float:
    """Rayleigh false-alarm probability exp(-T^2 / sigma_in^2)."""
    if threshold < 0:
        raise DomainError(f"threshold must be nonnegative, got {threshold}")
    if not sigma_in_sq > 0:
        raise DomainError(f"sigma_in^2 must be positive, got {sigma_in_sq}")
    return math.exp(-threshold * threshold / sigma_in_sq)


def threshold_for_pf(target_pf: float, sigma_in_sq: float) -> float:
    _check_pf(target_pf)
    if not sigma_in_sq > 0:
        raise DomainError(f"sigma_in^2 must be positive, got {sigma_in_sq}")
    return math.sqrt(-sigma_in_sq * math.log(target_pf))


def pd_rft(pf: float, sigma0_sq: float, beta0: complex, sigma_in_sq: float) -> float:
    """Detection probability of a Rayleigh fluctuating target."""
    _check_pf(pf)
    if not sigma0_sq > 0:
        raise DomainError(f"RFT variance must be positive, got {sigma0_sq}")
    gain = sigma0_sq * abs(beta0) ** 2 / sigma_in_sq
    return math.exp(math.log(pf) / (1.0 + gain))


def pd_nft(pf: float, alpha0: complex, beta0: complex, sigma_in_sq: float) -> float:
    """Detection probability of a nonfluctuating target (Rice statistic)."""
    _check_pf(pf)
    a = math.sqrt(2.0 * abs(alpha0) ** 2 * abs(beta0) ** 2 / sigma_in_sq)
    return marcum_q1(a, math.sqrt(-2.0 * math.log(pf)))


def pd_from_qsinr(pf: float, qsinr: float, kind: TargetKind) -> float:
    """P_d written through QSINR = power * |beta0|^2 / sigma_in^2."""
    if TargetKind(kind) is TargetKind.RFT:
        return pd_rft(pf, 1.0, math.sqrt(qsinr), 1.0)
    return pd_nft(pf, 1.0, math.sqrt(qsinr), 1.0)


def roc_curve(qsinr: float, kind: TargetKind, pf_grid: Iterable[float]) -> np.ndarray:
    """Analytic (P_f, P_d) pairs, shape (n, 2)."""
    rows = [(p, pd_from_qsinr(p, qsinr, kind)) for p in pf_grid]
    return np.asarray(rows, dtype=float).reshape(-1, 2)
