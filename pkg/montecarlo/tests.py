import math

import numpy as np
import pytest
from pydantic import ValidationError

from montecarlo import (
    Hypothesis,
    McConfig,
    block_returns,
    complex_gaussian,
    draw_trials,
    empirical_pd,
    empirical_pf,
    output_power_mc,
    prop1_rae,
    qsinr_mc,
    run_blocks,
)
from numerics import make_generator
from qsinr import Filter, detection_report, infinite_bit_sinr, pf, sigma_in_sq, threshold_for_pf
from radar import (
    ArrayGeometry,
    InterferenceSource,
    RadarScene,
    TargetModel,
    Waveform,
    matched_phase_onebit_waveform,
    noise_free_returns,
)
from utils.exceptions import DomainError
from utils.units import to_db


def _noise_only(n_tx, n_rx, code_length, theta0_deg, power):
    return RadarScene(
        geometry=ArrayGeometry.uniform_linear(n_tx, n_rx),
        target=TargetModel.nft(math.radians(theta0_deg), math.sqrt(power)),
        code_length=code_length,
    )


def _matched_pair(scene):
    waveform = matched_phase_onebit_waveform(scene.geometry, scene.target.angle, scene.code_length)
    return Filter.matched(scene, waveform), waveform


@pytest.fixture
def interference_scene():
    return RadarScene(
        geometry=ArrayGeometry.uniform_linear(4, 4),
        target=TargetModel.nft(math.radians(10), 1.0),
        interferences=(
            InterferenceSource.from_angle(math.radians(-40), 0.0, 2.0),
            InterferenceSource.from_angle(math.radians(30), 0.1, 2.0),
        ),
        code_length=50,
    )


@pytest.fixture
def random_waveform():
    return Waveform.random_one_bit(4, 50, make_generator(5))


class TestConfig:
    def test_blocks_cover_trials(self):
        mc = McConfig(trials=1300, block_size=512)
        assert mc.block_sizes() == [512, 512, 276]
        assert mc.block_count == 3

    def test_rejects_zero_trials(self):
        with pytest.raises(ValidationError):
            McConfig(trials=0)

    def test_blocks_keep_order(self):
        mc = McConfig(trials=10, block_size=3, workers=3)
        assert run_blocks(lambda rng, size: size, mc) == [3, 3, 3, 1]


class TestSampling:
    def test_circular_gaussian(self):
        rng = make_generator(11)
        v = complex_gaussian(rng, 100_000, 2.0)
        bound = 3 * 2.0 / math.sqrt(v.size)
        assert abs(np.mean(v**2)) < bound * math.sqrt(2)
        assert np.mean(np.abs(v) ** 2) == pytest.approx(2.0, abs=bound * math.sqrt(2))

    def test_block_matches_single_trial(self, interference_scene, random_waveform):
        draws = draw_trials(interference_scene, make_generator(3), 4)
        h1, h0 = block_returns(interference_scene, random_waveform, draws)
        for row in range(draws.size):
            single_h1, single_h0 = noise_free_returns(
                interference_scene,
                random_waveform,
                draws.interference[row],
                draws.target[row],
                draws.angles[row],
            )
            np.testing.assert_allclose(h1[row], single_h1, atol=1e-12)
            np.testing.assert_allclose(h0[row], single_h0, atol=1e-12)

    def test_angle_draws(self, interference_scene):
        draws = draw_trials(interference_scene, make_generator(4), 2000)
        fixed, moving = interference_scene.interferences
        assert np.all(draws.angles[:, 0] == fixed.mean_normalized_angle)
        assert np.all(np.abs(draws.angles[:, 1] - moving.mean_normalized_angle) <= moving.uncertainty)
        assert np.all(draws.target == 1.0)

        frozen = draw_trials(interference_scene, make_generator(4), 10, draw_angles=False)
        assert np.all(frozen.angles[:, 1] == moving.mean_normalized_angle)

    def test_fluctuating_target(self, interference_scene):
        scene = interference_scene.with_target(TargetModel.rft(math.radians(10), 3.0))
        draws = draw_trials(scene, make_generator(8), 50_000)
        assert np.mean(np.abs(draws.target) ** 2) == pytest.approx(3.0, rel=0.05)
        fixed = draw_trials(scene, make_generator(8), 5, draw_target=False)
        np.testing.assert_allclose(fixed.target, math.sqrt(3.0))


class TestQsinrMc:
    def test_deterministic_across_workers(self, interference_scene, random_waveform):
        w = Filter.matched(interference_scene, random_waveform)
        one = qsinr_mc(w, random_waveform, interference_scene, McConfig(trials=2000, block_size=256, seed=9))
        many = qsinr_mc(w, random_waveform, interference_scene, McConfig(trials=2000, block_size=256, seed=9, workers=4))
        assert one == many

    def test_absent_target(self, interference_scene, random_waveform):
        scene = interference_scene.with_target(TargetModel.nft(math.radians(10), 0.0))
        estimate = qsinr_mc(Filter.matched(scene, random_waveform), random_waveform, scene, McConfig(trials=1000))
        assert estimate.estimate == 0.0

    def test_redraws_zero_outputs(self, mocker):
        scene = _noise_only(1, 2, 1, 0.0, 0.01)
        waveform = Waveform.from_signs(np.array([1 + 1j]), n_tx=1)
        warning = mocker.patch("montecarlo.harness.logger.warning")
        estimate = qsinr_mc(np.array([1.0, 1.0]), waveform, scene, McConfig(trials=400, seed=1))
        assert estimate.redrawn > 0
        warning.assert_called_once()

    @pytest.mark.slow
    def test_one_bit_adc_loss(self):
        scene = _noise_only(8, 8, 256, 0.0, 0.01 * 2048)
        w, waveform = _matched_pair(scene)
        estimate = qsinr_mc(w, waveform, scene, McConfig(trials=10_000, seed=1))
        loss = to_db(infinite_bit_sinr(w, waveform, scene)) - to_db(estimate.estimate)
        assert loss == pytest.approx(10 * math.log10(math.pi / 2), abs=0.2)

    @pytest.mark.slow
    def test_combined_converter_loss(self):
        scene = _noise_only(8, 5, 400, 22.0, 100.0)
        w, waveform = _matched_pair(scene)
        estimate = qsinr_mc(w, waveform, scene, McConfig(trials=10_000, seed=2))
        assert 20.0 - to_db(estimate.estimate) == pytest.approx(2.81, abs=0.25)

    @pytest.mark.slow
    @pytest.mark.parametrize("n_rx,code_length", [(4, 16), (4, 64)])
    def test_saturates_at_snapshot_size(self, n_rx, code_length):
        snapshots = n_rx * code_length
        scene = _noise_only(4, n_rx, code_length, 0.0, 100.0 * snapshots)
        w, waveform = _matched_pair(scene)
        estimate = qsinr_mc(w, waveform, scene, McConfig(trials=10_000, seed=3))
        assert estimate.estimate == pytest.approx(snapshots - 1, rel=0.05)


class TestEmpiricalProbabilities:
    def test_threshold_edges(self, interference_scene, random_waveform):
        w = Filter.matched(interference_scene, random_waveform)
        mc = McConfig(trials=500)
        assert empirical_pf(w, random_waveform, interference_scene, 0.0, mc).estimate == pytest.approx(1.0, abs=0.01)
        assert empirical_pf(w, random_waveform, interference_scene, 1e6, mc).estimate == 0.0
        with pytest.raises(DomainError):
            empirical_pf(w, random_waveform, interference_scene, -1.0, mc)

    def test_threshold_is_strict(self, interference_scene, random_waveform, mocker):
        mocker.patch("montecarlo.harness.output_samples", return_value=np.array([1.0, 2.0j, 3.0 + 0j]))
        w = Filter.matched(interference_scene, random_waveform)
        estimate = empirical_pd(w, random_waveform, interference_scene, np.array([1.0, 2.0, 3.0]), McConfig(trials=3))
        np.testing.assert_allclose(estimate.estimate, [2 / 3, 1 / 3, 0.0])

    def test_zero_amplitude_detects_like_false_alarm(self, random_waveform):
        scene = _noise_only(4, 4, 50, 10.0, 0.0)
        w = Filter.matched(scene, random_waveform)
        mc = McConfig(trials=3000, seed=4)
        thresholds = np.linspace(0.0, 40.0, 9)
        pd_hat = empirical_pd(w, random_waveform, scene, thresholds, mc)
        pf_hat = empirical_pf(w, random_waveform, scene, thresholds, mc)
        np.testing.assert_array_equal(pd_hat.estimate, pf_hat.estimate)

    def test_detection_grows_with_power(self, random_waveform):
        mc = McConfig(trials=4000, seed=6)
        base = _noise_only(4, 4, 50, 10.0, 1.0)
        w = Filter.matched(base, random_waveform)
        threshold = threshold_for_pf(0.01, sigma_in_sq(w, random_waveform, base))
        estimates = [
            empirical_pd(w, random_waveform, base.with_target(base.target.with_power(power)), threshold, mc)
            for power in (0.5, 2.0, 5.0, 10.0)
        ]
        for low, high in zip(estimates, estimates[1:]):
            assert high.estimate >= low.estimate - 3 * math.hypot(low.stderr, high.stderr)

    @pytest.mark.slow
    def test_false_alarm_curve(self):
        scene = _noise_only(4, 5, 100, 22.0, 1.0)
        waveform = Waveform.random_one_bit(4, 100, make_generator(12))
        w = Filter.matched(scene, waveform)
        power = sigma_in_sq(w, waveform, scene)
        thresholds = np.array([threshold_for_pf(p, power) for p in np.geomspace(0.01, 0.9, 20)])

        estimate = empirical_pf(w, waveform, scene, thresholds, McConfig(trials=100_000, seed=13))
        analytic = np.array([pf(t, power) for t in thresholds])
        binomial = np.sqrt(analytic * (1 - analytic) / estimate.trials)
        assert np.max(np.abs(estimate.estimate - analytic) / binomial) <= 3.0

    @pytest.mark.slow
    def test_detection_matches_rice_model(self):
        scene = _noise_only(4, 5, 100, 10.0, 5.0)
        waveform = Waveform.random_one_bit(4, 100, make_generator(14))
        w = Filter.matched(scene, waveform)
        report = detection_report(w, waveform, scene, 0.01)
        estimate = empirical_pd(w, waveform, scene, report.threshold, McConfig(trials=20_000, seed=15))
        assert abs(estimate.estimate - report.pd) <= 3 * max(estimate.stderr, 1e-3)


class TestOutputPower:
    def test_matches_interference_plus_noise_power(self, interference_scene, random_waveform):
        scene = interference_scene.replace_interference(delta=0.0)
        w = Filter.matched(scene, random_waveform)
        estimate = output_power_mc(w, random_waveform, scene, McConfig(trials=20_000, seed=16), Hypothesis.H0)
        assert abs(estimate.estimate - sigma_in_sq(w, random_waveform, scene)) <= 3 * estimate.stderr


class TestMomentErrors:
    @pytest.mark.parametrize("snr_db,bound", [(-20, 0.01), (-10, 0.07)])
    def test_relative_errors(self, snr_db, bound):
        magnitude = math.sqrt(10 ** (snr_db / 10) / 2)
        report = prop1_rae(complex(magnitude, magnitude), 1.0, McConfig(trials=1_000_000, block_size=50_000, seed=17))
        assert report.rae_mean < bound + report.margin_mean
        assert report.rae_var < bound + report.margin_var
        assert report.exact_rae_mean < bound
        assert report.exact_rae_var < bound

    def test_zero_signal(self):
        report = prop1_rae(0j, 1.0, McConfig(trials=100_000, block_size=10_000, seed=18))
        assert report.absolute_mean
        assert report.rae_mean <= report.margin_mean
        assert report.exact_rae_mean == 0.0
