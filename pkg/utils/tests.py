import numpy as np
import pandas as pd
import pytest

from utils import config
from utils.constants import DB_FLOOR
from utils.exceptions import DomainError, OneBitRadarError
from utils.report import CsvReportMixin, read_report
from utils.units import from_db, to_db


class TestUnits:
    def test_scalar(self):
        assert to_db(100.0) == pytest.approx(20.0)
        assert from_db(-10.0) == pytest.approx(0.1)
        assert isinstance(to_db(2.0), float)

    def test_nonpositive_maps_to_floor(self):
        assert to_db(0.0) == DB_FLOOR
        np.testing.assert_array_equal(to_db(np.array([-1.0, 1.0])), [DB_FLOOR, 0.0])

    def test_arrays(self):
        values = np.array([0.5, 1.0, 8.0])
        np.testing.assert_allclose(from_db(to_db(values)), values)


class TestTolerances:
    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("ONEBIT_TOL_RANK", "1e-6")
        assert config._from_env().rank == 1e-6

    def test_bad_value_is_ignored(self, monkeypatch, mocker):
        warning = mocker.patch("utils.config.logger.warning")
        monkeypatch.setenv("ONEBIT_TOL_ETA", "small")
        assert config._from_env().eta == config.Tolerances().eta
        warning.assert_called_once()


class TestReport:
    @pytest.fixture
    def reporter(self):
        return CsvReportMixin()

    def test_rows_carry_seed_and_parameters(self, reporter, tmp_path):
        frame = pd.DataFrame({"nrl": [40, 100], "c1_db": [20.0, 20.0]})
        path = reporter.report(frame, tmp_path / "sub" / "t.csv", seed=9, parameters={"n_tx": 8, "nrl": -1}, title="t")
        header = path.read_text().splitlines()[0]
        assert header.startswith("# OneBitRadar 0.1.0 t ")
        table = read_report(path)
        assert table["seed"].tolist() == [9, 9]
        assert table["n_tx"].tolist() == [8, 8]
        assert table["nrl"].tolist() == [40, 100]

    def test_frame_is_not_modified(self, reporter, tmp_path):
        frame = pd.DataFrame({"x": [1.0]})
        reporter.report(frame, tmp_path / "t.csv", seed=0, parameters={"y": 2})
        assert list(frame.columns) == ["x"]


def test_errors_are_value_errors():
    assert issubclass(DomainError, OneBitRadarError)
    with pytest.raises(ValueError):
        raise DomainError("negative threshold")
