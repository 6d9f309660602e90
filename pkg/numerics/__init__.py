from numerics.special import erf, sinc, marcum_q1
from numerics.roots import quartic_real_roots, bisection_root, polyval_real
from numerics.linalg import RealSymmetricEvd, hermitian_solve, real_symmetric_evd
from numerics.rng import make_generator

__all__ = [
    "erf",
    "sinc",
    "marcum_q1",
    "quartic_real_roots",
    "bisection_root",
    "polyval_real",
    "RealSymmetricEvd",
    "hermitian_solve",
    "real_symmetric_evd",
    "make_generator",
]
