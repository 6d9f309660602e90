from qsinr.detection import pd_from_qsinr, pd_nft, pd_rft, pf, roc_curve, threshold_for_pf
from qsinr.filters import Filter, as_vector, target_response
from qsinr.kernels import c_kernel, d_kernel
from qsinr.matrices import (
    complexify_vec,
    gamma_matrix,
    gamma_matrix_for_scene,
    hermitize,
    phi_matrix,
    realify,
    realify_vec,
    xi_matrix,
    xi_quadratic,
)
from qsinr.ratio import infinite_bit_sinr, qsinr, rho, rho_phi_form
from qsinr.statistics import (
    DetectionReport,
    Prop1Moments,
    beta,
    detection_report,
    interference_betas,
    prop1_moments,
    sigma_in_sq,
    target_beta,
)

__all__ = [
    "DetectionReport",
    "Filter",
    "Prop1Moments",
    "as_vector",
    "beta",
    "c_kernel",
    "complexify_vec",
    "d_kernel",
    "detection_report",
    "gamma_matrix",
    "gamma_matrix_for_scene",
    "hermitize",
    "infinite_bit_sinr",
    "interference_betas",
    "pd_from_qsinr",
    "pd_nft",
    "pd_rft",
    "pf",
    "phi_matrix",
    "prop1_moments",
    "qsinr",
    "realify",
    "realify_vec",
    "rho",
    "rho_phi_form",
    "roc_curve",
    "sigma_in_sq",
    "target_beta",
    "target_response",
    "threshold_for_pf",
    "xi_matrix",
    "xi_quadratic",
]
