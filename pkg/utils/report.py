import logging
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import pandas as pd
from django.utils import timezone

from utils.constants import APP_NAME, APP_VERSION

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


class CsvReportMixin:

    """
    Mixin to provide a standard CSV format for experiment tables.
    Every table starts with one ``#`` line naming the tool and the time of the
    run, followed by a header row; each row carries the seed and the run
    parameters so a file describes itself.
    """

    def report(
        self,
        frame: pd.DataFrame,
        path: Union[str, Path],
        seed: int,
        parameters: Optional[Mapping[str, Any]] = None,
        title: str = "",
    ) -> Path:
        """
        Write one experiment table.

        Args:
            frame: The rows to write
            path: Destination file; parent directories are created
            seed: Seed of the run, appended as a ``seed`` column
            parameters: Scene and run parameters, appended as constant columns
                unless the table already has a column of that name
            title: Short table name for the header line

        Returns:
            The path written
        """
        path = Path(path)
        table = frame.copy()
        for key, value in (parameters or {}).items():
            if key not in table.columns:
                table[key] = value
        table["seed"] = seed

        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            handle.write(f"# {APP_NAME} {APP_VERSION} {title} {timezone.now().isoformat()}\n")
            table.to_csv(handle, index=False, float_format=FLOAT_FORMAT)

        logger.info(f"Wrote {len(table)} rows to {path}")
        return path


def read_report(path: Union[str, Path]) -> pd.DataFrame:
    """Load a table written by CsvReportMixin.report."""
    return pd.read_csv(path, skiprows=1)
