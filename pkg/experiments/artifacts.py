"""
Designed waveforms and filters on disk.

Waveform files store the 2-bit alphabet index of every entry, so a reloaded
one-bit waveform is exact::

    onebit-waveform v1
    n_tx 4
    code_length 3
    0132
    ...

one line per time slot, one digit per transmit element. Filters are CSV files
of real and imaginary parts after a ``# onebit-filter v1 n_rx=<N_r>`` line.
"""
import logging
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from qsinr.filters import Filter
from radar.waveform import Waveform
from utils.constants import WAVEFORM_FORMAT, WAVEFORM_FORMAT_VERSION
from utils.exceptions import InvalidWaveformError

logger = logging.getLogger(__name__)

FILTER_FORMAT = "onebit-filter"


def write_waveform(waveform: Waveform, path: Union[str, Path]) -> Path:
    path = Path(path)
    symbols = waveform.symbols().reshape(waveform.code_length, waveform.n_tx)
    lines = [
        f"{WAVEFORM_FORMAT} v{WAVEFORM_FORMAT_VERSION}",
        f"n_tx {waveform.n_tx}",
        f"code_length {waveform.code_length}",
    ]
    lines += ["".join(str(int(value)) for value in row) for row in symbols]
    path.write_text("\n".join(lines) + "\n")
    logger.debug(f"Wrote waveform {waveform.n_tx}x{waveform.code_length} to {path}")
    return path


def _header_value(line: str, key: str) -> int:
    name, _, value = line.partition(" ")
    if name != key or not value.strip().isdigit():
        raise InvalidWaveformError(f"expected '{key} <int>', got {line!r}")
    return int(value)


def read_waveform(path: Union[str, Path]) -> Waveform:
    lines = Path(path).read_text().split()
    if len(lines) < 6 or lines[0] != WAVEFORM_FORMAT:
        raise InvalidWaveformError(f"{path} is not a {WAVEFORM_FORMAT} file")
    if lines[1] != f"v{WAVEFORM_FORMAT_VERSION}":
        raise InvalidWaveformError(f"unsupported waveform file version {lines[1]}")

    n_tx = _header_value(f"{lines[2]} {lines[3]}", "n_tx")
    code_length = _header_value(f"{lines[4]} {lines[5]}", "code_length")
    rows = lines[6:]
    if len(rows) != code_length or any(len(row) != n_tx for row in rows):
        raise InvalidWaveformError(f"expected {code_length} rows of {n_tx} symbols in {path}")
    if any(char not in "0123" for row in rows for char in row):
        raise InvalidWaveformError(f"symbols must be digits 0-3 in {path}")

    symbols = np.array([[int(char) for char in row] for row in rows], dtype=np.uint8).reshape(-1)
    return Waveform.from_symbols(symbols, n_tx)


def write_filter(w: Filter, path: Union[str, Path]) -> Path:
    path = Path(path)
    frame = pd.DataFrame({"re": w.w.real, "im": w.w.imag})
    with path.open("w", newline="") as handle:
        handle.write(f"# {FILTER_FORMAT} v1 n_rx={w.n_rx}\n")
        frame.to_csv(handle, index=False, float_format="%.17g")
    return path


def read_filter(path: Union[str, Path]) -> Filter:
    path = Path(path)
    with path.open() as handle:
        header = handle.readline().split()
    if len(header) != 4 or header[1] != FILTER_FORMAT or not header[3].startswith("n_rx="):
        raise InvalidWaveformError(f"{path} is not a {FILTER_FORMAT} file")
    frame = pd.read_csv(path, skiprows=1)
    return Filter(w=frame["re"].to_numpy() + 1j * frame["im"].to_numpy(), n_rx=int(header[3][len("n_rx="):]))
