from greet.admm import (
    AdmmResult,
    admm_dual_update,
    admm_objective,
    admm_r_update,
    admm_s_update,
    admm_solve,
    admm_t_update,
    box_kkt_violations,
    solve_rank_two_plane,
)
from greet.config import AdmmState, Diagnostics, GreetConfig, random_admm_state
from greet.designer import GreetResult, greet, matched_filter_qsinr, one_bit_qsinr_bound
from greet.mvdr import mvdr_filter

__all__ = [
    "AdmmResult",
    "AdmmState",
    "Diagnostics",
    "GreetConfig",
    "GreetResult",
    "admm_dual_update",
    "admm_objective",
    "admm_r_update",
    "admm_s_update",
    "admm_solve",
    "admm_t_update",
    "box_kkt_violations",
    "greet",
    "matched_filter_qsinr",
    "mvdr_filter",
    "one_bit_qsinr_bound",
    "random_admm_state",
    "solve_rank_two_plane",
]
