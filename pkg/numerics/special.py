import math

import numpy as np
from scipy import special, stats

from utils.exceptions import DomainError


def erf(x):
    """Error function; accepts scalars or arrays."""
    return special.erf(x)


def sinc(x):
    """Normalized sinc, sin(pi x)/(pi x) with sinc(0) = 1."""
    return np.sinc(x)


def marcum_q1(a: float, b: float) -> float:
    """
    First-order Marcum Q function.

    Q(a, b) = integral_b^inf t exp(-(t^2 + a^2)/2) I0(a t) dt, which is the
    survival function of a noncentral chi-square with two degrees of freedom
    and noncentrality a^2, evaluated at b^2.

    Raises:
        DomainError: if either argument is negative or not finite.
    """
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"marcum_q1 needs finite arguments, got a={a}, b={b}")
    if a < 0 or b < 0:
        raise DomainError(f"marcum_q1 needs nonnegative arguments, got a={a}, b={b}")

    if b == 0.0:
        return 1.0
    if a == 0.0:
        return math.exp(-0.5 * b * b)
    value = float(stats.ncx2.sf(b * b, 2, a * a))
    return min(max(value, 0.0), 1.0)
