import io
import math

import numpy as np
import pandas as pd
import pytest
import yaml
from django.conf import settings
from django.core.management import call_command, get_commands
from django.core.management.base import CommandError

from experiments.artifacts import read_filter, read_waveform, write_filter, write_waveform
from experiments.runners import (
    run_codesign,
    run_detection_curves,
    run_experiment,
    run_mc_validate,
    run_noise_only_loss,
    run_uncertainty_sweep,
    parse_array,
)
from experiments.spec import ExperimentKind, ExperimentSpec, parse_grid, parse_overrides
from qsinr import Filter
from radar import ArrayGeometry, Waveform, matched_phase_onebit_waveform
from utils.exceptions import ExperimentError, InvalidSceneError, InvalidWaveformError
from utils.report import read_report

NOISE_ONLY = {
    "version": 1,
    "geometry": {"n_tx": 8, "n_rx": 5},
    "target": {"angle_deg": 22, "kind": "nft", "power_db": 20},
    "noise_power_db": 0,
    "code_length": 8,
}

SMALL_INTERFERENCE = {
    "version": 1,
    "geometry": {"n_tx": 2, "n_rx": 2},
    "target": {"angle_deg": 10, "kind": "nft", "power_db": 10},
    "interferences": [{"angle_deg": -40, "delta": 0.0, "power_db": 20}],
    "noise_power_db": 0,
    "code_length": 2,
}

FAST_GREET = {"rho1": None, "rho2": None, "admm_iters": 5, "alt_iters": 2}


@pytest.fixture
def noise_scene(tmp_path):
    path = tmp_path / "noise_only.yaml"
    path.write_text(yaml.safe_dump(NOISE_ONLY))
    return path


@pytest.fixture
def interference_scene(tmp_path):
    path = tmp_path / "interference.yaml"
    path.write_text(yaml.safe_dump(SMALL_INTERFERENCE))
    return path


def _spec(kind, scene, out, **options):
    return ExperimentSpec.from_options(kind, {"scene": scene, "out": out, **options})


class TestParsing:
    def test_grid(self):
        assert parse_grid("power_db=20,30; delta=0,0.1") == {"power_db": ["20", "30"], "delta": ["0", "0.1"]}
        assert parse_grid(None) == {}
        assert parse_grid("nrl=40;") == {"nrl": ["40"]}

    @pytest.mark.parametrize("text", ["power_db", "=1,2", "delta="])
    def test_bad_grid(self, text):
        with pytest.raises(ExperimentError):
            parse_grid(text)

    def test_overrides(self):
        assert parse_overrides(["target.angle_deg=0", " code_length = 4"]) == {"target.angle_deg": "0", "code_length": "4"}
        with pytest.raises(ExperimentError):
            parse_overrides(["target.angle_deg"])

    def test_array(self):
        assert parse_array("4x8") == (4, 8)
        assert parse_array("8X16") == (8, 16)
        with pytest.raises(ValueError):
            parse_array("48")


class TestExperimentSpec:
    def test_greet_flags(self, noise_scene, tmp_path):
        spec = _spec(ExperimentKind.CODESIGN, noise_scene, tmp_path, seed=7, rho1=3.0, admm_iters=12, alt_iters=None, restarts=3)
        config = spec.greet_config()
        assert (config.rho1, config.max_admm_iters, config.seed) == (3.0, 12, 7)
        assert config.rho2 == 30.0
        assert config.max_altopt_iters == 50
        assert config.restarts == 3

    def test_trials_precedence(self, noise_scene, tmp_path):
        spec = _spec(ExperimentKind.MC_VALIDATE, noise_scene, tmp_path)
        assert spec.mc_config().trials == 10_000
        assert spec.mc_config(trials=500).trials == 500
        spec = _spec(ExperimentKind.MC_VALIDATE, noise_scene, tmp_path, trials=64, workers=2)
        mc = spec.mc_config(trials=500, block_size=16)
        assert (mc.trials, mc.workers, mc.block_size) == (64, 2, 16)

    def test_trials_setting_overrides_runner_default(self, noise_scene, tmp_path, monkeypatch):
        monkeypatch.setitem(settings.MC_DEFAULTS, "trials", 300)
        spec = _spec(ExperimentKind.MC_VALIDATE, noise_scene, tmp_path)
        assert spec.mc_config(trials=500).trials == 300
        assert spec.mc_config().trials == 300
        assert _spec(ExperimentKind.MC_VALIDATE, noise_scene, tmp_path, trials=64).mc_config(trials=500).trials == 64

    def test_invalid_options(self, noise_scene, tmp_path):
        with pytest.raises(ExperimentError):
            _spec(ExperimentKind.MC_VALIDATE, noise_scene, tmp_path, trials=0)
        spec = _spec(ExperimentKind.CODESIGN, noise_scene, tmp_path, rho1=-1.0)
        with pytest.raises(ExperimentError):
            spec.greet_config()

    def test_grid_values(self, noise_scene, tmp_path):
        spec = _spec(ExperimentKind.NOISE_ONLY_LOSS, noise_scene, tmp_path, grid="nrl=40,100;design=greet")
        assert spec.grid_values("nrl", [1], int) == [40, 100]
        assert spec.grid_values("design", ["matched"], str) == ["greet"]
        assert spec.grid_values("delta", [0.0, 0.1]) == [0.0, 0.1]
        bad = _spec(ExperimentKind.NOISE_ONLY_LOSS, noise_scene, tmp_path, grid="nrl=forty")
        with pytest.raises(ExperimentError):
            bad.grid_values("nrl", [1], int)

    def test_overrides_reach_scene(self, noise_scene, tmp_path):
        spec = _spec(ExperimentKind.NOISE_ONLY_LOSS, noise_scene, tmp_path, set=["target.angle_deg=0", "code_length=3"])
        scene = spec.scene()
        assert scene.target.angle == 0.0
        assert scene.code_length == 3

    def test_bundled_scene_by_name(self, tmp_path):
        scene = _spec(ExperimentKind.NOISE_ONLY_LOSS, "noise_only.yaml", tmp_path).scene()
        assert (scene.n_tx, scene.n_rx, scene.code_length) == (8, 5, 8)

    def test_missing_scene(self, tmp_path):
        spec = _spec(ExperimentKind.NOISE_ONLY_LOSS, tmp_path / "absent.yaml", tmp_path)
        with pytest.raises(InvalidSceneError):
            spec.scene()


class TestArtifacts:
    def test_waveform_reloads_exactly(self, tmp_path):
        rng = np.random.default_rng(3)
        waveform = Waveform.random_one_bit(3, 5, rng)
        path = write_waveform(waveform, tmp_path / "design.wave")
        loaded = read_waveform(path)
        assert loaded.one_bit
        assert loaded.n_tx == 3
        np.testing.assert_array_equal(loaded.s, waveform.s)

    def test_waveform_layout(self, tmp_path):
        waveform = matched_phase_onebit_waveform(ArrayGeometry.uniform_linear(4, 1), 0.0, 2)
        lines = write_waveform(waveform, tmp_path / "broadside.wave").read_text().splitlines()
        assert lines == ["onebit-waveform v1", "n_tx 4", "code_length 2", "0000", "0000"]

    @pytest.mark.parametrize(
        "text",
        [
            "onebit-waveform v2\nn_tx 1\ncode_length 1\n0\n",
            "onebit-waveform v1\nn_tx 2\ncode_length 1\n0\n",
            "onebit-waveform v1\nn_tx 1\ncode_length 1\n4\n",
            "something else\n",
        ],
    )
    def test_bad_waveform_file(self, tmp_path, text):
        path = tmp_path / "bad.wave"
        path.write_text(text)
        with pytest.raises(InvalidWaveformError):
            read_waveform(path)

    def test_filter_reloads(self, tmp_path):
        rng = np.random.default_rng(4)
        w = Filter(w=rng.normal(size=6) + 1j * rng.normal(size=6), n_rx=3)
        loaded = read_filter(write_filter(w, tmp_path / "w.csv"))
        assert loaded.n_rx == 3
        np.testing.assert_array_equal(loaded.w, w.w)

    def test_bad_filter_file(self, tmp_path):
        path = tmp_path / "w.csv"
        path.write_text("re,im\n1,0\n")
        with pytest.raises(InvalidWaveformError):
            read_filter(path)


class TestRunners:
    def test_noise_only_loss(self, noise_scene, tmp_path):
        spec = _spec(ExperimentKind.NOISE_ONLY_LOSS, noise_scene, tmp_path, trials=200, grid="nrl=40,100")
        table = run_noise_only_loss(spec).tables["noise_loss"]
        assert table["nrl"].tolist() == [40, 100]
        np.testing.assert_allclose(table["c1_db"], 20.0, atol=1e-9)
        np.testing.assert_allclose(table["c2_db"], 19.15, atol=0.05)
        np.testing.assert_allclose(table["c3_db"], 18.04, atol=0.01)
        np.testing.assert_allclose(table["c4_db"], 17.19, atol=0.06)
        assert np.all(np.isfinite(table["c4_mc_db"]))

    def test_broadside_has_no_transmit_loss(self, noise_scene, tmp_path):
        spec = _spec(
            ExperimentKind.NOISE_ONLY_LOSS, noise_scene, tmp_path, trials=50, grid="nrl=40", set=["target.angle_deg=0"]
        )
        table = run_noise_only_loss(spec).tables["noise_loss"]
        assert table["c2_db"].iloc[0] == pytest.approx(table["c1_db"].iloc[0])

    def test_noise_only_loss_rejects_interference(self, interference_scene, tmp_path):
        spec = _spec(ExperimentKind.NOISE_ONLY_LOSS, interference_scene, tmp_path, trials=50)
        with pytest.raises(ExperimentError):
            run_noise_only_loss(spec)

    def test_reruns_are_identical(self, noise_scene, tmp_path):
        spec = _spec(ExperimentKind.NOISE_ONLY_LOSS, noise_scene, tmp_path, trials=100, seed=5, grid="nrl=20")
        pd.testing.assert_frame_equal(
            run_noise_only_loss(spec).tables["noise_loss"], run_noise_only_loss(spec).tables["noise_loss"]
        )

    def test_detection_curves(self, interference_scene, tmp_path, mocker):
        warning = mocker.patch("experiments.runners.logger.warning")
        spec = _spec(
            ExperimentKind.DETECTION_CURVES,
            interference_scene,
            tmp_path,
            trials=500,
            grid="pf=0.1,1e-6;power_db=0,10;roc_power_db=5",
        )
        result = run_detection_curves(spec)
        pf_table, pd_table, roc = (result.tables[name] for name in ("detect_pf", "detect_pd", "detect_roc"))

        assert pf_table["pf"].iloc[0] == 1.0
        assert pf_table["pf_mc"].iloc[0] == pytest.approx(1.0, abs=0.01)
        assert np.isnan(pf_table["pf_mc"].iloc[-1])
        assert warning.called
        assert pd_table["pd_mc"][pd_table["pf"] == 0.1].notna().all()
        assert pd_table["pd_mc"][pd_table["pf"] == 1e-6].isna().all()
        assert roc["pd"].iloc[-1] == pytest.approx(1.0)
        assert result.parameters["design"] == "mvdr"

    def test_unknown_design(self, interference_scene, tmp_path):
        spec = _spec(ExperimentKind.DETECTION_CURVES, interference_scene, tmp_path, trials=100, grid="design=lmmse")
        with pytest.raises(ExperimentError):
            run_detection_curves(spec)

    def test_codesign(self, interference_scene, tmp_path):
        spec = _spec(ExperimentKind.CODESIGN, interference_scene, tmp_path, grid="delta=0,0.1", **FAST_GREET)
        result = run_codesign(spec)
        table = result.tables["codesign"]
        assert table["delta"].tolist() == [0.0, 0.1]
        assert table["one_bit"].all()
        assert len(result.tables["codesign_trace"]) == 2 * 3
        assert len(result.tables["codesign_diagnostics"]) == 2 * 2 * 5
        for name in table["waveform_file"]:
            waveform = read_waveform(tmp_path / name)
            assert (waveform.n_tx, waveform.code_length) == (2, 2)
        assert all(path.exists() for path in result.artifacts)

    def test_codesign_needs_interference(self, noise_scene, tmp_path):
        with pytest.raises(ExperimentError):
            run_codesign(_spec(ExperimentKind.CODESIGN, noise_scene, tmp_path, **FAST_GREET))

    def test_mc_validate(self, noise_scene, tmp_path):
        spec = _spec(
            ExperimentKind.MC_VALIDATE,
            noise_scene,
            tmp_path,
            trials=2000,
            grid="snr_db=-20;asymptote_nrl=10;asymptote_snr_db=0",
            set=["code_length=2"],
        )
        tables = run_mc_validate(spec).tables
        assert set(tables) == {"validate_prop1", "validate_sigma_in", "validate_pf", "validate_asymptote"}
        assert len(tables["validate_pf"]) == 20
        assert np.isfinite(tables["validate_prop1"]["rae_mean"].iloc[0])
        assert tables["validate_asymptote"]["ceiling_db"].iloc[0] == pytest.approx(10 * math.log10(9))

    def test_uncertainty_sweep(self, interference_scene, tmp_path):
        spec = _spec(
            ExperimentKind.UNCERTAINTY_SWEEP,
            interference_scene,
            tmp_path,
            grid="arrays=2x2,2x3;deltas=0;power_db=20",
            **FAST_GREET,
        )
        table = run_experiment(spec).tables["sweep"]
        assert list(zip(table["n_tx"], table["n_rx"])) == [(2, 2), (2, 3)]
        assert np.all(np.isfinite(table["qsinr_db"]))

    def test_sweep_needs_interference(self, noise_scene, tmp_path):
        with pytest.raises(ExperimentError):
            run_uncertainty_sweep(_spec(ExperimentKind.UNCERTAINTY_SWEEP, noise_scene, tmp_path, **FAST_GREET))


class TestCommands:
    def test_noise_loss_writes_csv(self, noise_scene, tmp_path):
        out = tmp_path / "results"
        stdout = io.StringIO()
        call_command(
            "noise_loss", "--scene", str(noise_scene), "--out", str(out), "--trials", "100", "--seed", "3",
            "--grid", "nrl=40", stdout=stdout,
        )
        first_line = (out / "noise_loss.csv").read_text().splitlines()[0]
        assert first_line.startswith("# OneBitRadar")
        table = read_report(out / "noise_loss.csv")
        assert table["seed"].tolist() == [3]
        assert table["n_tx"].tolist() == [8]
        assert table["experiment"].tolist() == ["noise-only-loss"]
        assert "noise_loss" in stdout.getvalue()

    def test_codesign_writes_artifacts(self, interference_scene, tmp_path):
        out = tmp_path / "designs"
        call_command(
            "codesign", "--scene", str(interference_scene), "--out", str(out), "--admm-iters", "5", "--alt-iters", "2", "--restarts", "2",
            stdout=io.StringIO(),
        )
        assert (out / "codesign.csv").exists()
        assert (out / "codesign_diagnostics.csv").exists()
        assert (out / "codesign_scene.yaml").exists()
        assert len(list(out.glob("*.wave"))) == 1

    def test_hyphenated_noise_loss_name(self, noise_scene, tmp_path):
        assert "noise-loss" in get_commands()
        call_command(
            "noise-loss", "--scene", str(noise_scene), "--out", str(tmp_path), "--trials", "50", "--grid", "nrl=40",
            stdout=io.StringIO(),
        )
        assert read_report(tmp_path / "noise_loss.csv")["experiment"].tolist() == ["noise-only-loss"]

    def test_library_errors_become_command_errors(self, interference_scene, tmp_path):
        with pytest.raises(CommandError):
            call_command("noise_loss", "--scene", str(interference_scene), "--out", str(tmp_path), stdout=io.StringIO())

    def test_bad_grid(self, noise_scene, tmp_path):
        with pytest.raises(CommandError):
            call_command(
                "validate", "--scene", str(noise_scene), "--out", str(tmp_path), "--grid", "snr_db", stdout=io.StringIO()
            )
