from montecarlo.config import McConfig, McEstimate, Prop1Rae
from montecarlo.harness import (
    Hypothesis,
    empirical_pd,
    empirical_pf,
    output_power_mc,
    output_samples,
    prop1_rae,
    qsinr_mc,
    run_blocks,
)
from montecarlo.sampling import TrialDraws, block_returns, complex_gaussian, draw_trials, filter_outputs

__all__ = [
    "Hypothesis",
    "McConfig",
    "McEstimate",
    "Prop1Rae",
    "TrialDraws",
    "block_returns",
    "complex_gaussian",
    "draw_trials",
    "empirical_pd",
    "empirical_pf",
    "filter_outputs",
    "output_power_mc",
    "output_samples",
    "prop1_rae",
    "qsinr_mc",
    "run_blocks",
]
