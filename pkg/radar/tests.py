import math

import numpy as np
import pytest

from radar import (
    ArrayGeometry,
    InterferenceSource,
    RadarScene,
    TargetKind,
    TargetModel,
    Waveform,
    channel_matrix,
    lis_margin_db,
    load_scene,
    matched_phase_onebit_waveform,
    matched_phase_waveform,
    noise_free_returns,
    one_bit_quantize,
    residual_phases,
    response,
    rx_steering,
    save_scene,
    scene_from_dict,
    scene_parameters,
    transmit_beampattern,
    tx_steering,
)
from utils.exceptions import (
    AngleOutOfRangeError,
    DimensionMismatchError,
    DomainError,
    InvalidSceneError,
    InvalidWaveformError,
)
from utils.units import to_db


@pytest.fixture
def geometry():
    return ArrayGeometry.uniform_linear(8, 5)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def _random_unit(rng, n):
    s = rng.normal(size=n) + 1j * rng.normal(size=n)
    return s / np.linalg.norm(s)


class TestSteering:
    def test_ula_positions(self):
        g = ArrayGeometry.uniform_linear(3, 2, wavelength=2.0)
        np.testing.assert_allclose(g.tx_positions, [0, 1, 2])
        np.testing.assert_allclose(g.rx_positions, [0, 1])

    def test_broadside(self, geometry):
        np.testing.assert_allclose(tx_steering(geometry, 0.0), np.ones(8) / math.sqrt(8))
        np.testing.assert_allclose(rx_steering(geometry, 0.0), np.ones(5) / math.sqrt(5))

    def test_endfire_phase_step(self):
        g = ArrayGeometry.uniform_linear(2, 2)
        np.testing.assert_allclose(tx_steering(g, math.pi / 2), np.array([1, -1]) / math.sqrt(2), atol=1e-15)

    def test_unit_norm_on_grid(self, geometry):
        for theta in np.linspace(-math.pi / 2, math.pi / 2, 181):
            assert np.linalg.norm(tx_steering(geometry, theta)) == pytest.approx(1, abs=1e-12)
            assert np.linalg.norm(rx_steering(geometry, theta)) == pytest.approx(1, abs=1e-12)

    def test_out_of_range(self, geometry):
        with pytest.raises(AngleOutOfRangeError):
            tx_steering(geometry, 2.0)
        with pytest.raises(AngleOutOfRangeError):
            rx_steering(geometry, float("nan"))

    def test_invalid_geometry(self):
        with pytest.raises(InvalidSceneError):
            ArrayGeometry(tx_positions=[], rx_positions=[0.0])
        with pytest.raises(InvalidSceneError):
            ArrayGeometry(tx_positions=[0.0], rx_positions=[0.0], wavelength=0.0)


class TestChannelMatrix:
    def test_single_block(self, geometry):
        theta = 0.3
        A = channel_matrix(geometry, theta, 1)
        np.testing.assert_allclose(A, np.outer(rx_steering(geometry, theta), tx_steering(geometry, theta)))

    def test_broadside_blocks(self, geometry):
        A = channel_matrix(geometry, 0.0, 3)
        block = np.ones((5, 8)) / math.sqrt(40)
        for l in range(3):
            np.testing.assert_allclose(A[5 * l:5 * l + 5, 8 * l:8 * l + 8], block)

    def test_blocks_identical_and_off_diagonal_zero(self, geometry):
        A = channel_matrix(geometry, -0.7, 4)
        first = A[:5, :8]
        for l in range(1, 4):
            assert np.array_equal(A[5 * l:5 * l + 5, 8 * l:8 * l + 8], first)
        assert not np.any(A[:5, 8:])

    def test_contraction(self, geometry, rng):
        for _ in range(20):
            s = _random_unit(rng, 8 * 4)
            A = channel_matrix(geometry, rng.uniform(-1.5, 1.5), 4)
            assert np.linalg.norm(A @ s) <= 1 + 1e-12

    def test_response_matches_dense(self, geometry, rng):
        waveform = Waveform(s=_random_unit(rng, 8 * 6), n_tx=8)
        omegas = rng.uniform(-1, 1, size=5)
        stacked = response(geometry, waveform.matrix, omegas)
        for omega, row in zip(omegas, stacked):
            dense = channel_matrix(geometry, math.asin(omega), 6) @ waveform.s
            np.testing.assert_allclose(row, dense, atol=1e-13)


class TestQuantizer:
    def test_examples(self):
        np.testing.assert_array_equal(one_bit_quantize([0.3 - 0.7j, -2 + 0.01j]), [1 - 1j, -1 + 1j])

    def test_zero_maps_to_plus_one(self):
        np.testing.assert_array_equal(one_bit_quantize([0j, -0.0 + 0j]), [1 + 1j, 1 + 1j])

    def test_idempotent(self, rng):
        x = rng.normal(size=50) + 1j * rng.normal(size=50)
        q = one_bit_quantize(x)
        np.testing.assert_array_equal(one_bit_quantize(q), q)
        assert set(np.unique(q.real)) <= {-1.0, 1.0}
        assert set(np.unique(q.imag)) <= {-1.0, 1.0}


class TestWaveform:
    def test_random_one_bit_in_alphabet(self, rng):
        waveform = Waveform.random_one_bit(4, 8, rng)
        scale = 1 / math.sqrt(2 * 32)
        assert waveform.one_bit
        assert np.all(np.abs(waveform.s.real) == scale)
        assert np.all(np.abs(waveform.s.imag) == scale)
        assert np.vdot(waveform.s, waveform.s).real == pytest.approx(1, abs=1e-12)

    def test_symbols_roundtrip(self, rng):
        waveform = Waveform.random_one_bit(3, 5, rng)
        restored = Waveform.from_symbols(waveform.symbols(), 3)
        assert np.array_equal(restored.s, waveform.s)

    def test_matrix_is_column_major(self):
        S = np.arange(6).reshape(2, 3) + 1j
        S = S / np.linalg.norm(S)
        waveform = Waveform.from_matrix(S)
        np.testing.assert_allclose(waveform.s[:2], S[:, 0])
        np.testing.assert_allclose(waveform.matrix, S)

    def test_rejects_energy(self):
        with pytest.raises(InvalidWaveformError):
            Waveform(s=np.ones(4), n_tx=2)

    def test_rejects_off_alphabet(self):
        s = np.full(4, 0.5 + 0j)
        with pytest.raises(InvalidWaveformError):
            Waveform(s=s, n_tx=2, one_bit=True)

    def test_rejects_bad_length(self):
        with pytest.raises(DimensionMismatchError):
            Waveform(s=np.ones(3) / math.sqrt(3), n_tx=2)


class TestMatchedPhase:
    def test_broadside(self, geometry):
        waveform = matched_phase_onebit_waveform(geometry, 0.0, 4)
        np.testing.assert_allclose(waveform.s, np.full(32, (1 + 1j) / math.sqrt(64)))
        assert transmit_beampattern(geometry, waveform, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_loss_at_22_degrees(self, geometry):
        theta0 = math.radians(22)
        waveform = matched_phase_onebit_waveform(geometry, theta0, 10)
        assert to_db(transmit_beampattern(geometry, waveform, theta0)) == pytest.approx(-0.85, abs=0.05)

    def test_worst_case_below_3db(self, geometry):
        for theta0 in np.linspace(-math.pi / 2, math.pi / 2, 721):
            waveform = matched_phase_onebit_waveform(geometry, theta0, 2)
            assert transmit_beampattern(geometry, waveform, theta0) >= 0.5 - 1e-12

    def test_residual_phases_in_quadrant(self, geometry):
        for theta0 in np.linspace(-1.5, 1.5, 61):
            waveform = matched_phase_onebit_waveform(geometry, theta0, 3)
            delta = residual_phases(geometry, theta0, waveform)
            assert np.all(delta > -1e-12)
            assert np.all(delta <= math.pi / 2 + 1e-12)

    def test_infinite_bit_reference(self, geometry):
        theta0 = math.radians(-37)
        waveform = matched_phase_waveform(geometry, theta0, 5)
        assert transmit_beampattern(geometry, waveform, theta0) == pytest.approx(1.0, abs=1e-12)


class TestBeampattern:
    def test_single_column(self, geometry, rng):
        column = _random_unit(rng, 8)
        S = np.zeros((8, 3), dtype=complex)
        S[:, 0] = column
        waveform = Waveform.from_matrix(S)
        theta = 0.4
        expected = abs(tx_steering(geometry, theta) @ column) ** 2
        assert transmit_beampattern(geometry, waveform, theta) == pytest.approx(expected, rel=1e-12)

    def test_upper_bound(self, geometry, rng):
        waveform = Waveform(s=_random_unit(rng, 8 * 4), n_tx=8)
        pattern = transmit_beampattern(geometry, waveform, np.linspace(-1.5, 1.5, 50))
        assert np.all(pattern >= 0)
        assert np.all(pattern <= 8 + 1e-12)


class TestReturns:
    @pytest.fixture
    def scene(self, geometry):
        return RadarScene(
            geometry=geometry,
            target=TargetModel.nft(math.radians(10), 2.0),
            interferences=(InterferenceSource(-0.5, 0.1, 10.0), InterferenceSource(0.6, 0.0, 5.0)),
            code_length=4,
        )

    def test_noise_only(self, geometry, rng):
        scene = RadarScene(geometry=geometry, target=TargetModel.nft(0.2, 3.0), code_length=4)
        waveform = Waveform.random_one_bit(8, 4, rng)
        h1, h0 = noise_free_returns(scene, waveform, [], 3.0, [])
        assert not np.any(h0)
        np.testing.assert_allclose(h1, 3.0 * scene.target_channel() @ waveform.s, atol=1e-14)

    def test_target_difference(self, scene, rng):
        waveform = Waveform.random_one_bit(8, 4, rng)
        h1, h0 = noise_free_returns(scene, waveform, [1 + 1j, -0.5j], 0.7 - 0.2j, [-0.45, 0.6])
        np.testing.assert_allclose(h1 - h0, (0.7 - 0.2j) * scene.target_channel() @ waveform.s, atol=1e-13)
        h1, h0 = noise_free_returns(scene, waveform, [1 + 1j, -0.5j], 0.0, [-0.45, 0.6])
        np.testing.assert_array_equal(h1, h0)

    def test_dimension_mismatch(self, scene, rng):
        waveform = Waveform.random_one_bit(8, 4, rng)
        with pytest.raises(DimensionMismatchError):
            noise_free_returns(scene, waveform, [1.0], 1.0, [-0.5])

    def test_angle_outside_uncertainty(self, scene, rng):
        waveform = Waveform.random_one_bit(8, 4, rng)
        with pytest.raises(DomainError):
            noise_free_returns(scene, waveform, [1.0, 1.0], 1.0, [-0.3, 0.6])

    def test_lis_margin(self, geometry, rng):
        scene = RadarScene(geometry=geometry, target=TargetModel.nft(0.0, 0.1), code_length=2)
        waveform = matched_phase_onebit_waveform(geometry, 0.0, 2)
        h1, _ = noise_free_returns(scene, waveform, [], 0.1, [])
        peak = np.max(np.abs(h1) ** 2)
        assert lis_margin_db(h1, 1.0) == pytest.approx(10 * math.log10(peak))


class TestSceneModel:
    def test_rft_needs_variance(self):
        with pytest.raises(InvalidSceneError):
            TargetModel(angle=0.0, kind=TargetKind.RFT)

    def test_interference_bounds(self):
        with pytest.raises(InvalidSceneError):
            InterferenceSource(0.95, 0.1, 1.0)
        with pytest.raises(InvalidSceneError):
            InterferenceSource(0.0, -0.1, 1.0)
        with pytest.raises(InvalidSceneError):
            InterferenceSource(0.0, 0.0, 0.0)

    def test_replace_interference(self, geometry):
        scene = RadarScene(
            geometry=geometry,
            target=TargetModel.nft(0.0, 1.0),
            interferences=(InterferenceSource(0.1), InterferenceSource(-0.2)),
            code_length=2,
        )
        changed = scene.replace_interference(power=100.0, delta=0.05)
        assert all(s.power == 100.0 and s.uncertainty == 0.05 for s in changed.interferences)
        assert changed.is_stochastic and not scene.is_stochastic

    def test_target_with_power_keeps_phase(self):
        target = TargetModel.nft(0.0, 1j).with_power(4.0)
        assert target.amplitude == pytest.approx(2j)


SCENE_YAML = """
version: 1
name: desk
geometry: {n_tx: 4, n_rx: 8}
target: {angle_deg: -21, kind: nft, power_db: 20}
interferences:
  - {angle_deg: -48, delta: 0.1, power_db: 30}
  - {normalized_angle: 0.2, power: 10}
noise_power_db: 0
code_length: 16
"""


class TestSceneFile:
    def test_load(self, tmp_path):
        path = tmp_path / "scene.yaml"
        path.write_text(SCENE_YAML)
        scene = load_scene(path)
        assert (scene.n_tx, scene.n_rx, scene.code_length) == (4, 8, 16)
        assert scene.target.angle == pytest.approx(math.radians(-21))
        assert scene.target.power == pytest.approx(100.0)
        assert scene.interferences[0].mean_normalized_angle == pytest.approx(math.sin(math.radians(-48)))
        assert scene.interferences[0].power == pytest.approx(1000.0)
        assert scene.interferences[1].power == 10.0
        assert scene.noise_power == pytest.approx(1.0)
        np.testing.assert_allclose(scene.geometry.tx_positions, [0, 0.5, 1.0, 1.5])

    def test_overrides(self, tmp_path):
        path = tmp_path / "scene.yaml"
        path.write_text(SCENE_YAML)
        scene = load_scene(path, {"target.angle_deg": "0", "interferences.1.delta": "0.2", "target.kind": "rft"})
        assert scene.target.angle == 0.0
        assert scene.target.kind is TargetKind.RFT
        assert scene.interferences[1].uncertainty == 0.2

    def test_rejects_version(self):
        with pytest.raises(InvalidSceneError):
            scene_from_dict({"version": 2, "geometry": {"n_tx": 2, "n_rx": 2}, "target": {"angle_deg": 0, "power": 1}, "code_length": 1})

    def test_rejects_double_power(self):
        document = {
            "version": 1,
            "geometry": {"n_tx": 2, "n_rx": 2},
            "target": {"angle_deg": 0, "power": 1, "power_db": 0},
            "code_length": 1,
        }
        with pytest.raises(InvalidSceneError):
            scene_from_dict(document)

    def test_rejects_unknown_key(self):
        with pytest.raises(InvalidSceneError):
            scene_from_dict({"version": 1, "geometry": {"n_tx": 2, "n_rx": 2, "spacng": 1}, "target": {"angle_deg": 0, "power": 1}, "code_length": 1})

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidSceneError):
            load_scene(tmp_path / "nope.yaml")

    def test_parameters(self, tmp_path):
        path = tmp_path / "scene.yaml"
        path.write_text(SCENE_YAML)
        params = scene_parameters(load_scene(path))
        assert params["target_power_db"] == pytest.approx(20.0)
        assert params["interference1_power_db"] == pytest.approx(30.0)
        assert params["interference2_delta"] == 0.0
        assert params["num_interferences"] == 2

    def test_saved_scene_reloads(self, tmp_path):
        path = tmp_path / "scene.yaml"
        path.write_text(SCENE_YAML)
        scene = load_scene(path, {"target.phase_deg": "30", "interferences.0.delta": "0.05"})
        reloaded = load_scene(save_scene(scene, tmp_path / "saved.yaml"))
        original, restored = scene_parameters(scene), scene_parameters(reloaded)
        assert original.keys() == restored.keys()
        assert restored["target_kind"] == original["target_kind"]
        assert restored["target_power_db"] == pytest.approx(original["target_power_db"])
        assert reloaded.target.amplitude == pytest.approx(scene.target.amplitude)
        assert reloaded.interferences[0].uncertainty == 0.05
        np.testing.assert_array_equal(reloaded.geometry.rx_positions, scene.geometry.rx_positions)
        assert reloaded.noise_power == scene.noise_power
