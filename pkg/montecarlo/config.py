from typing import NamedTuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, NonNegativeInt, PositiveInt


class McConfig(BaseModel):
    """Trial count, seed and sampling switches of a Monte Carlo run."""

    model_config = ConfigDict(frozen=True)

    trials: PositiveInt = 10_000
    seed: NonNegativeInt = 0
    # redraw omega_k ~ U(varpi_k - delta_k, varpi_k + delta_k) for uncertain interferers
    draw_interference_angles: bool = True
    # redraw xi_0 ~ CN(0, sigma_0^2) for fluctuating targets; fixed targets ignore it
    draw_target: bool = True
    block_size: PositiveInt = 512
    workers: PositiveInt = 1
    progress: bool = False

    @property
    def block_count(self) -> int:
        return -(-self.trials // self.block_size)

    def block_sizes(self):
        full, rest = divmod(self.trials, self.block_size)
        return [self.block_size] * full + ([rest] if rest else [])


Number = Union[float, np.ndarray]


class McEstimate(NamedTuple):
    estimate: Number
    stderr: Number
    trials: int
    redrawn: int = 0


class Prop1Rae(NamedTuple):
    """Relative errors of the first-order moments of Q(h + v) against simulation and closed form."""

    rae_mean: float
    rae_var: float
    margin_mean: float
    margin_var: float
    exact_rae_mean: float
    exact_rae_var: float
    mc_mean: complex
    mc_var: float
    # True when |E y| is too small for a relative error and the absolute one is reported
    absolute_mean: bool = False
