import numpy as np

from utils.constants import DB_FLOOR


def to_db(value):
    """10*log10 of a power ratio; nonpositive values map to DB_FLOOR."""
    value = np.asarray(value, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(value > 0, 10.0 * np.log10(np.where(value > 0, value, 1.0)), DB_FLOOR)
    return float(out) if out.ndim == 0 else out


def from_db(db):
    out = np.power(10.0, np.asarray(db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out
