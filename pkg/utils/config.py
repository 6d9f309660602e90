import os
import logging

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, PositiveFloat

load_dotenv()

logger = logging.getLogger(__name__)


class Tolerances(BaseModel):
    """
    Numerical tolerances used across the library.

    Every field can be overridden with an ``ONEBIT_TOL_<FIELD>`` environment
    variable, e.g. ``ONEBIT_TOL_HERMITIAN=1e-9``.
    """

    model_config = ConfigDict(frozen=True)

    hermitian: PositiveFloat = 1e-10
    symmetric: PositiveFloat = 1e-10
    unit_energy: PositiveFloat = 1e-10
    quartic_residual: PositiveFloat = 1e-8
    quartic_imag: PositiveFloat = 1e-6
    bisection: PositiveFloat = 1e-12
    rank: PositiveFloat = 1e-8
    eta: PositiveFloat = 1e-12
    angle: PositiveFloat = 1e-12


def _from_env() -> Tolerances:
    values = {}
    for name in Tolerances.model_fields:
        raw = os.getenv(f"ONEBIT_TOL_{name.upper()}")
        if raw is None:
            continue
        try:
            values[name] = float(raw)
        except ValueError:
            logger.warning(f"Ignoring non-numeric ONEBIT_TOL_{name.upper()}={raw!r}")
    return Tolerances(**values)


TOLERANCES = _from_env()
