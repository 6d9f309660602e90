import math
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, NonNegativeInt, PositiveFloat, PositiveInt

from utils.config import TOLERANCES


class GreetConfig(BaseModel):
    """Penalties, iteration limits and tolerances of the alternating designer."""

    model_config = ConfigDict(frozen=True)

    rho1: PositiveFloat = 2.0
    rho2: PositiveFloat = 30.0
    max_admm_iters: PositiveInt = 200
    max_altopt_iters: PositiveInt = 50
    bisection_tol: PositiveFloat = TOLERANCES.bisection
    rank_tol: PositiveFloat = TOLERANCES.rank
    seed: NonNegativeInt = 0
    # independent random starts; the best final pair wins
    restarts: PositiveInt = 1
    # stop the inner loop once all three residuals drop below this
    residual_epsilon: Optional[PositiveFloat] = None
    # return the highest-QSINR pair visited instead of the last iterate
    keep_best: bool = True


@dataclass(frozen=True)
class AdmmState:
    s_tilde: np.ndarray
    t: np.ndarray
    r: np.ndarray
    u1: np.ndarray
    u2: np.ndarray

    @classmethod
    def start(cls, s_tilde: np.ndarray, t: np.ndarray, r: np.ndarray) -> "AdmmState":
        zeros = np.zeros_like(s_tilde, dtype=float)
        return cls(s_tilde=np.asarray(s_tilde, dtype=float), t=t, r=r, u1=zeros, u2=zeros.copy())

    def replace(self, **changes) -> "AdmmState":
        return replace(self, **changes)


@dataclass
class Diagnostics:
    """Per-iteration traces of the inner solver and QSINR per outer iteration."""

    outer_index: List[int] = field(default_factory=list)
    objective_trace: List[float] = field(default_factory=list)
    residual_d: List[float] = field(default_factory=list)
    residual_c1: List[float] = field(default_factory=list)
    residual_c2: List[float] = field(default_factory=list)
    modulus_min: List[float] = field(default_factory=list)
    modulus_max: List[float] = field(default_factory=list)
    nu_trace: List[float] = field(default_factory=list)
    qsinr_trace: List[float] = field(default_factory=list)

    def record_admm(
        self,
        outer: int,
        objective: float,
        residual_d: float,
        residual_c1: float,
        residual_c2: float,
        s_tilde: np.ndarray,
        nu: float,
    ) -> None:
        modulus = np.abs(s_tilde)
        self.outer_index.append(outer)
        self.objective_trace.append(objective)
        self.residual_d.append(residual_d)
        self.residual_c1.append(residual_c1)
        self.residual_c2.append(residual_c2)
        self.modulus_min.append(float(modulus.min()))
        self.modulus_max.append(float(modulus.max()))
        self.nu_trace.append(nu)

    @property
    def admm_iterations(self) -> int:
        return len(self.residual_d)

    def admm_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            {
                "outer": self.outer_index,
                "objective": self.objective_trace,
                "residual_d": self.residual_d,
                "residual_c1": self.residual_c1,
                "residual_c2": self.residual_c2,
                "modulus_min": self.modulus_min,
                "modulus_max": self.modulus_max,
                "nu": self.nu_trace,
            }
        )
        frame.insert(1, "iteration", frame.groupby("outer").cumcount())
        return frame

    def qsinr_frame(self) -> pd.DataFrame:
        values = np.asarray(self.qsinr_trace, dtype=float)
        with np.errstate(divide="ignore"):
            db = 10 * np.log10(values)
        return pd.DataFrame({"outer": np.arange(values.size), "qsinr": values, "qsinr_db": db})


def random_admm_state(n: int, rng: np.random.Generator, s_tilde: Optional[np.ndarray] = None) -> AdmmState:
    """Random t, r with entries +-1/sqrt(n) and zero duals."""
    scale = 1.0 / math.sqrt(n)
    t = rng.choice((-scale, scale), size=n)
    r = rng.choice((-scale, scale), size=n)
    return AdmmState.start(np.zeros(n) if s_tilde is None else s_tilde, t, r)
