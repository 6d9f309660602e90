import logging
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import optimize

from utils.config import TOLERANCES
from utils.exceptions import BracketError, DegenerateCoefficientError

logger = logging.getLogger(__name__)

_NEWTON_STEPS = 4


def polyval_real(coeffs: Sequence[float], x: float) -> float:
    """Evaluate a polynomial given highest-degree-first coefficients."""
    return float(np.polyval(np.asarray(coeffs, dtype=float), x))


def _polish(coeffs: np.ndarray, x: float) -> float:
    derivative = np.polyder(coeffs)
    best, best_residual = x, abs(polyval_real(coeffs, x))
    for _ in range(_NEWTON_STEPS):
        slope = polyval_real(derivative, x)
        if slope == 0.0:
            break
        x = x - polyval_real(coeffs, x) / slope
        residual = abs(polyval_real(coeffs, x))
        if residual < best_residual:
            best, best_residual = x, residual
    return float(best)


def quartic_real_roots(
    c4: float,
    c3: float,
    c2: float,
    c1: float,
    c0: float,
    *,
    residual_tol: Optional[float] = None,
    imag_tol: Optional[float] = None,
) -> List[float]:
    """
    Real roots of c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0.

    Roots come from the eigenvalues of the companion matrix; candidates with a
    negligible imaginary part are Newton-polished and kept when the polynomial
    residual is within tolerance. Repeated roots may appear up to their
    multiplicity. The result is sorted ascending.
    """
    if c4 == 0:
        raise DegenerateCoefficientError("quartic_real_roots needs c4 != 0")

    residual_tol = TOLERANCES.quartic_residual if residual_tol is None else residual_tol
    imag_tol = TOLERANCES.quartic_imag if imag_tol is None else imag_tol

    coeffs = np.array([c4, c3, c2, c1, c0], dtype=float)
    scale = max(1.0, float(np.max(np.abs(coeffs))))

    roots = []
    for z in np.roots(coeffs):
        if abs(z.imag) > imag_tol * max(1.0, abs(z)):
            continue
        x = _polish(coeffs, float(z.real))
        residual = abs(polyval_real(coeffs, x))
        if residual <= residual_tol * scale:
            roots.append(x)
        else:
            logger.debug(f"Rejected quartic candidate {z} (residual {residual:.3e})")
    return sorted(roots)


def bisection_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Optional[float] = None,
) -> float:
    """
    Root of a continuous, strictly monotone function on [lo, hi].

    Raises:
        BracketError: if f(lo) and f(hi) have the same strict sign.
    """
    tol = TOLERANCES.bisection if tol is None else tol
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return float(lo)
    if f_hi == 0.0:
        return float(hi)
    if f_lo * f_hi > 0:
        raise BracketError(f"f({lo})={f_lo:.6g} and f({hi})={f_hi:.6g} share a sign")
    return float(optimize.bisect(f, lo, hi, xtol=tol, maxiter=2000))
