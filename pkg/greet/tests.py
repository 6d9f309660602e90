import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import optimize

from greet import (
    AdmmState,
    Diagnostics,
    GreetConfig,
    admm_dual_update,
    admm_objective,
    admm_r_update,
    admm_s_update,
    admm_solve,
    admm_t_update,
    box_kkt_violations,
    greet,
    matched_filter_qsinr,
    mvdr_filter,
    one_bit_qsinr_bound,
    random_admm_state,
    solve_rank_two_plane,
)
from greet import designer
from greet.admm import r_plane_objective, s_update_target, t_secular, t_subproblem_objective
from numerics import make_generator, real_symmetric_evd
from qsinr import Filter, gamma_matrix_for_scene, phi_matrix, qsinr, realify, rho, target_response
from radar import (
    ArrayGeometry,
    InterferenceSource,
    RadarScene,
    TargetModel,
    Waveform,
    matched_phase_onebit_waveform,
)
from utils.exceptions import DegenerateProjectionError, DegenerateTargetResponseError, EtaUndefinedError


def _scene(n_tx, n_rx, code_length, interferers=((-48, 100.0), (5, 50.0)), theta0=-21):
    return RadarScene(
        geometry=ArrayGeometry.uniform_linear(n_tx, n_rx),
        target=TargetModel.nft(math.radians(theta0), math.sqrt(10.0)),
        interferences=tuple(InterferenceSource.from_angle(math.radians(a), 0.0, p) for a, p in interferers),
        code_length=code_length,
    )


def _unit(rng, n):
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture
def scene():
    return _scene(4, 3, 3)


@pytest.fixture
def waveform(rng):
    return Waveform.random_one_bit(4, 3, rng)


@pytest.fixture
def realified(scene, waveform):
    w = mvdr_filter(waveform, scene)
    phi_tilde = realify(phi_matrix(w, scene))
    gamma_tilde = realify(gamma_matrix_for_scene(w, scene))
    return phi_tilde, gamma_tilde


class TestConfig:
    def test_defaults(self):
        config = GreetConfig()
        assert (config.rho1, config.rho2) == (2.0, 30.0)
        assert (config.max_admm_iters, config.max_altopt_iters) == (200, 50)
        assert config.keep_best and config.residual_epsilon is None
        assert config.restarts == 1

    def test_rejects_nonpositive_penalty(self):
        with pytest.raises(ValidationError):
            GreetConfig(rho1=0.0)

    def test_frame(self):
        diagnostics = Diagnostics()
        for outer in range(2):
            for _ in range(3):
                diagnostics.record_admm(outer, 1.0, 0.1, 0.2, 0.3, np.array([0.1, -0.2]), 0.5)
        frame = diagnostics.admm_frame()
        assert list(frame["iteration"]) == [0, 1, 2, 0, 1, 2]
        assert frame["modulus_max"].iloc[0] == pytest.approx(0.2)
        assert diagnostics.admm_iterations == 6


class TestMvdr:
    def test_distortionless(self, scene, waveform):
        w = mvdr_filter(waveform, scene)
        assert np.vdot(w.w, target_response(scene, waveform)) == pytest.approx(1.0, abs=1e-10)

    def test_beats_other_filters(self, scene, waveform, rng):
        best = qsinr(mvdr_filter(waveform, scene), waveform, scene)
        assert best >= qsinr(Filter.matched(scene, waveform), waveform, scene)
        for _ in range(200):
            w = rng.normal(size=scene.snapshot_dim) + 1j * rng.normal(size=scene.snapshot_dim)
            assert qsinr(w, waveform, scene) <= best * (1 + 1e-10)

    def test_degenerate_target_response(self):
        scene = _scene(2, 2, 1, interferers=(), theta0=0)
        waveform = Waveform.from_signs(np.array([1 + 1j, -1 - 1j]), n_tx=2)
        with pytest.raises(DegenerateTargetResponseError):
            mvdr_filter(waveform, scene)


class TestSUpdate:
    def test_matches_bounded_minimiser(self, rng):
        n, rho1, rho2 = 24, 2.0, 30.0
        t, u1, r, u2 = (rng.normal(scale=0.3, size=n) for _ in range(4))
        s = admm_s_update(t, u1, r, u2, rho1, rho2, n)

        b = s_update_target(t, u1, r, u2, rho1, rho2)
        bound = 1 / math.sqrt(n)
        scale = math.sqrt(rho1 + rho2)
        oracle = optimize.lsq_linear(scale * np.eye(n), b / scale, bounds=(-bound, bound), method="bvls", tol=1e-14)
        np.testing.assert_allclose(s, oracle.x, atol=1e-8)
        assert not box_kkt_violations(s, b, rho1, rho2, n).any()

    def test_kkt_flags_wrong_point(self, rng):
        n = 8
        b = rng.normal(size=n)
        assert box_kkt_violations(np.zeros(n), b, 1.0, 1.0, n).any()

    def test_saturates(self):
        s = admm_s_update(np.full(4, 10.0), np.zeros(4), np.full(4, -10.0), np.zeros(4), 1.0, 3.0, 4)
        np.testing.assert_array_equal(s, np.full(4, -0.5))


class TestTUpdate:
    def test_unit_norm_and_optimal(self, realified, rng):
        phi_tilde, gamma_tilde = realified
        n = phi_tilde.shape[0]
        s = rng.uniform(-1, 1, size=n) / math.sqrt(n)
        u1 = rng.normal(scale=0.01, size=n)
        r = rng.choice((-1.0, 1.0), size=n) / math.sqrt(n)
        t, nu = admm_t_update(real_symmetric_evd(phi_tilde), s, u1, r, gamma_tilde, 2.0)

        assert np.linalg.norm(t) == pytest.approx(1.0, abs=1e-8)
        eta = 1 / float(r @ gamma_tilde @ r)
        best = t_subproblem_objective(t, phi_tilde, s, u1, eta, 2.0)
        for _ in range(2000):
            assert best <= t_subproblem_objective(_unit(rng, n), phi_tilde, s, u1, eta, 2.0) + 1e-12

        stationarity = 2 * eta * phi_tilde @ t + (2.0 + 2 * nu) * t - 2.0 * (s - u1)
        assert np.linalg.norm(stationarity) <= 1e-6 * max(1.0, 2.0 * np.linalg.norm(s - u1))

    def test_secular_function_decreases_right_of_pole(self, realified, rng):
        phi_tilde, gamma_tilde = realified
        n = phi_tilde.shape[0]
        s = rng.uniform(-1, 1, size=n) / math.sqrt(n)
        r = rng.choice((-1.0, 1.0), size=n) / math.sqrt(n)
        phi_evd = real_symmetric_evd(phi_tilde)
        _, nu = admm_t_update(phi_evd, s, np.zeros(n), r, gamma_tilde, 2.0)

        eta = 1 / float(r @ gamma_tilde @ r)
        shift = 2 * eta * phi_evd.eigenvalues + 2.0
        weights = (2.0 * (phi_evd.eigenvectors.T @ s)) ** 2
        pole = -shift.min() / 2
        grid = pole + np.geomspace(1e-6, 1e3, 400)
        values = np.array([t_secular(x, weights, shift) for x in grid])
        assert np.all(np.diff(values) < 0)
        assert nu > pole
        assert t_secular(nu, weights, shift) == pytest.approx(0.0, abs=1e-8)

    @pytest.mark.slow
    def test_beats_random_unit_vectors(self):
        rng = make_generator(31)
        n, rho1, samples = 16, 2.0, 100_000
        for _ in range(50):
            x = rng.normal(size=(n, n))
            phi_tilde = x @ x.T / n
            y = rng.normal(size=(n, 2))
            gamma_tilde = y @ y.T + 1e-3 * np.eye(n)
            s = rng.uniform(-1, 1, size=n) / math.sqrt(n)
            u1 = rng.normal(scale=0.05, size=n)
            r = rng.normal(size=n)
            t, _ = admm_t_update(real_symmetric_evd(phi_tilde), s, u1, r, gamma_tilde, rho1)

            eta = 1 / float(r @ gamma_tilde @ r)
            best = t_subproblem_objective(t, phi_tilde, s, u1, eta, rho1)
            candidates = rng.normal(size=(samples, n))
            candidates /= np.linalg.norm(candidates, axis=1, keepdims=True)
            values = eta * np.einsum("ij,jk,ik->i", candidates, phi_tilde, candidates)
            values += 0.5 * rho1 * np.sum((candidates - (s - u1)) ** 2, axis=1)
            assert best <= values.min() + 1e-10 * max(1.0, abs(best))

    def test_isotropic_numerator_gives_direction(self, rng):
        n = 6
        s = rng.normal(size=n)
        t, _ = admm_t_update(real_symmetric_evd(3.0 * np.eye(n)), s, np.zeros(n), np.ones(n), np.eye(n), 1.5)
        np.testing.assert_allclose(t, s / np.linalg.norm(s), atol=1e-9)

    def test_hard_case(self):
        phi_evd = real_symmetric_evd(np.diag([4.0, 3.0, 2.0, 1.0]))
        s = np.array([0.1, 0.1, 0.1, 0.0])
        r = np.array([1.0, 0.0, 0.0, 0.0])
        t, nu = admm_t_update(phi_evd, s, np.zeros(4), r, np.eye(4), 1.0)
        assert nu == pytest.approx(-1.5)
        assert np.linalg.norm(t) == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(np.abs(t[:3]), [0.1 / 6, 0.1 / 4, 0.1 / 2], atol=1e-9)

    def test_zero_projection_keeps_previous(self):
        previous = np.array([0.6, 0.8])
        s = np.array([0.3, 0.1])
        t, nu = admm_t_update(real_symmetric_evd(np.eye(2)), s, s, np.ones(2), np.eye(2), 1.0, previous_t=previous)
        np.testing.assert_array_equal(t, previous)
        assert math.isnan(nu)
        with pytest.raises(DegenerateProjectionError):
            admm_t_update(real_symmetric_evd(np.eye(2)), s, s, np.ones(2), np.eye(2), 1.0)

    def test_eta_undefined(self):
        with pytest.raises(EtaUndefinedError):
            admm_t_update(real_symmetric_evd(np.eye(2)), np.ones(2), np.zeros(2), np.zeros(2), np.eye(2), 1.0)


class TestRUpdate:
    @staticmethod
    def _objective(r, t, phi_tilde, gamma_tilde, target, rho2):
        return float(t @ phi_tilde @ t) / float(r @ gamma_tilde @ r) + 0.5 * rho2 * np.sum((r - target) ** 2)

    def test_stationary_and_local_minimum(self, realified, rng):
        phi_tilde, gamma_tilde = realified
        n = phi_tilde.shape[0]
        rho2 = 30.0
        s = rng.uniform(-1, 1, size=n) / math.sqrt(n)
        u2 = rng.normal(scale=0.01, size=n)
        t = _unit(rng, n)
        gamma_evd = real_symmetric_evd(gamma_tilde)
        r = admm_r_update(gamma_evd, s, u2, t, phi_tilde, rho2)

        target = s - u2
        numerator = float(t @ phi_tilde @ t)
        denominator = float(r @ gamma_tilde @ r)
        gradient = -2 * numerator * (gamma_tilde @ r) / denominator**2 + rho2 * (r - target)
        assert np.linalg.norm(gradient) <= 1e-6 * rho2 * max(1.0, np.linalg.norm(target))

        best = self._objective(r, t, phi_tilde, gamma_tilde, target, rho2)
        for _ in range(50):
            nudged = r + 1e-4 * _unit(rng, n)
            assert best <= self._objective(nudged, t, phi_tilde, gamma_tilde, target, rho2) + 1e-12

        coords = gamma_evd.eigenvectors.T
        np.testing.assert_allclose((coords @ r)[2:], (coords @ target)[2:], atol=1e-12)

    def test_plane_against_grid(self):
        q1, q2, p = 0.7, -0.4, 0.3
        r1, r2 = solve_rank_two_plane(q1, q2, p)
        radius = np.linspace(1e-3, 3.0, 1500)[:, None]
        angle = np.linspace(-math.pi, math.pi, 1441)[None, :]
        grid = r_plane_objective(radius * np.cos(angle), radius * np.sin(angle), q1, q2, p)
        value = r_plane_objective(r1, r2, q1, q2, p)
        assert value <= grid.min() + 1e-12
        assert value == pytest.approx(grid.min(), abs=1e-4)
        assert r1 * q2 == pytest.approx(r2 * q1, abs=1e-12)

    def test_plane_origin(self):
        assert solve_rank_two_plane(0.0, 0.0, 16.0) == (2.0, 0.0)

    def test_plane_negative_axis(self):
        r1, r2 = solve_rank_two_plane(-1.0, 0.0, 0.5)
        assert r1 < -1.0 and r2 == 0.0
        assert r1**4 + r1**3 - 0.5 == pytest.approx(0.0, abs=1e-10)

    def test_plane_pivots_on_second_coordinate(self):
        r1, r2 = solve_rank_two_plane(1e-3, 2.0, 0.2)
        assert r2 > 2.0
        assert r1 / r2 == pytest.approx(1e-3 / 2.0)


class TestDualAndObjective:
    def test_dual_update(self):
        state = AdmmState(
            s_tilde=np.array([0.5, 0.5]),
            t=np.array([1.0, 0.0]),
            r=np.array([0.0, 1.0]),
            u1=np.array([0.1, 0.1]),
            u2=np.zeros(2),
        )
        updated = admm_dual_update(state)
        np.testing.assert_allclose(updated.u1, [0.6, -0.4])
        np.testing.assert_allclose(updated.u2, [-0.5, 0.5])

    def test_objective_is_inverse_rho(self, scene, waveform, realified):
        phi_tilde, gamma_tilde = realified
        w = mvdr_filter(waveform, scene)
        expected = 2 / (math.pi * scene.noise_power) / rho(w, waveform, scene)
        assert admm_objective(waveform.realified, phi_tilde, gamma_tilde) == pytest.approx(expected, rel=1e-10)

    def test_objective_infinite_without_response(self):
        assert admm_objective(np.ones(2), np.eye(2), np.zeros((2, 2))) == math.inf


class TestAdmmSolve:
    def test_projects_onto_alphabet(self, scene, waveform, rng):
        config = GreetConfig(max_admm_iters=30)
        w = mvdr_filter(waveform, scene)
        result = admm_solve(w, scene, random_admm_state(2 * scene.waveform_dim, rng, waveform.realified), config)

        assert result.waveform.one_bit
        assert result.diagnostics.admm_iterations == 30
        bound = 1 / math.sqrt(2 * scene.waveform_dim)
        assert max(result.diagnostics.modulus_max) <= bound * (1 + 1e-12)

    def test_early_stop(self, scene, waveform, rng):
        config = GreetConfig(max_admm_iters=30, residual_epsilon=1e3)
        w = mvdr_filter(waveform, scene)
        result = admm_solve(w, scene, random_admm_state(2 * scene.waveform_dim, rng, waveform.realified), config)
        assert result.diagnostics.admm_iterations == 1

    @pytest.mark.slow
    def test_residuals_vanish(self):
        scene = _scene(4, 4, 8)
        rng = make_generator(7)
        waveform = Waveform.random_one_bit(4, 8, rng)
        w = mvdr_filter(waveform, scene)
        result = admm_solve(w, scene, random_admm_state(2 * scene.waveform_dim, rng, waveform.realified), GreetConfig())

        diagnostics = result.diagnostics
        assert diagnostics.admm_iterations == 200
        assert max(diagnostics.residual_d[-1], diagnostics.residual_c1[-1], diagnostics.residual_c2[-1]) < 1e-3
        level = 1 / math.sqrt(2 * scene.waveform_dim)
        assert diagnostics.modulus_min[-1] == pytest.approx(level, abs=1e-3)
        assert diagnostics.modulus_max[-1] == pytest.approx(level, abs=1e-3)


class TestGreet:
    @pytest.fixture
    def config(self):
        return GreetConfig(max_altopt_iters=3, max_admm_iters=40, seed=3)

    def test_trace_and_best_pair(self, scene, config):
        result = greet(scene, config)
        trace = result.diagnostics.qsinr_trace
        assert len(trace) == config.max_altopt_iters + 1
        assert result.qsinr == max(trace)
        assert result.qsinr == pytest.approx(qsinr(result.filter, result.waveform, scene), rel=1e-12)
        assert result.qsinr <= one_bit_qsinr_bound(scene) * (1 + 1e-9)
        assert np.vdot(result.filter.w, target_response(scene, result.waveform)) == pytest.approx(1.0, abs=1e-10)

    def test_last_pair_without_keep_best(self, scene, config):
        result = greet(scene, config.model_copy(update={"keep_best": False}))
        assert result.qsinr == result.diagnostics.qsinr_trace[-1]

    def test_deterministic(self, scene, config):
        first, second = greet(scene, config), greet(scene, config)
        np.testing.assert_array_equal(first.waveform.symbols(), second.waveform.symbols())
        assert first.diagnostics.qsinr_trace == second.diagnostics.qsinr_trace

    @pytest.mark.parametrize("seed", range(20))
    def test_beats_random_waveform_with_matched_filter(self, scene, seed):
        initial = Waveform.random_one_bit(scene.n_tx, scene.code_length, make_generator(seed))
        result = greet(scene, GreetConfig(max_altopt_iters=2, max_admm_iters=30, seed=seed))
        assert result.qsinr > matched_filter_qsinr(scene, initial)
        assert result.qsinr >= result.diagnostics.qsinr_trace[0]

    def test_mvdr_refresh_never_lowers_rho(self, scene, rng):
        config = GreetConfig(max_admm_iters=20)
        waveform = Waveform.random_one_bit(scene.n_tx, scene.code_length, rng)
        state = random_admm_state(2 * scene.waveform_dim, rng)
        w = mvdr_filter(waveform, scene)
        for _ in range(5):
            result = admm_solve(w, scene, AdmmState.start(waveform.realified, state.t, state.r), config)
            waveform, state = result.waveform, result.state
            refreshed = mvdr_filter(waveform, scene)
            assert rho(refreshed, waveform, scene) >= rho(w, waveform, scene) * (1 - 1e-12)
            w = refreshed

    def test_restarts_keep_the_best_start(self, scene, config, mocker):
        single = greet(scene, config)
        spy = mocker.spy(designer, "_alternate")
        several = greet(scene, config.model_copy(update={"restarts": 3}))

        assert spy.call_count == 3
        starts = [result.qsinr for result in spy.spy_return_list]
        assert several.qsinr == max(starts)
        assert starts[0] == single.qsinr
        assert len(set(starts)) > 1

    @pytest.mark.slow
    def test_reaches_one_bit_optimum_without_interference(self):
        scene = _scene(4, 2, 2, interferers=(), theta0=0)
        result = greet(scene, GreetConfig(max_altopt_iters=10, seed=1))

        reference = matched_phase_onebit_waveform(scene.geometry, 0.0, 2)
        optimum = matched_filter_qsinr(scene, reference)
        assert 10 * math.log10(result.qsinr / optimum) >= -0.3


class TestDesignTrends:
    @staticmethod
    def _desk_scene(n_tx, n_rx, delta):
        return RadarScene(
            geometry=ArrayGeometry.uniform_linear(n_tx, n_rx),
            target=TargetModel.nft(math.radians(34), 10.0),
            interferences=tuple(
                InterferenceSource.from_angle(math.radians(angle), delta, 1000.0) for angle in (-50, 10)
            ),
            code_length=8,
        )

    @pytest.mark.slow
    def test_qsinr_falls_with_angle_uncertainty(self):
        config = GreetConfig(seed=1, restarts=4)
        values = [greet(self._desk_scene(4, 8, delta), config).qsinr_db for delta in (0.0, 0.1, 0.2)]
        assert values[0] >= values[1] - 0.25
        assert values[1] > values[2]
        assert values[0] > values[2]

    @pytest.mark.slow
    def test_larger_array_dominates(self):
        config = GreetConfig(max_altopt_iters=20, seed=2)
        for delta in (0.1, 0.2):
            small = greet(self._desk_scene(4, 8, delta), config)
            large = greet(self._desk_scene(8, 16, delta), config)
            assert large.qsinr_db > small.qsinr_db
