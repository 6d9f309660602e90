import math

import numpy as np
import pytest

from numerics import real_symmetric_evd
from qsinr import (
    Filter,
    beta,
    c_kernel,
    d_kernel,
    detection_report,
    gamma_matrix,
    infinite_bit_sinr,
    interference_betas,
    pd_from_qsinr,
    pd_nft,
    pd_rft,
    pf,
    phi_matrix,
    prop1_moments,
    qsinr,
    complexify_vec,
    realify,
    realify_vec,
    rho,
    rho_phi_form,
    roc_curve,
    sigma_in_sq,
    threshold_for_pf,
    xi_matrix,
    xi_quadratic,
)
from radar import (
    ArrayGeometry,
    InterferenceSource,
    RadarScene,
    TargetKind,
    TargetModel,
    Waveform,
    matched_phase_onebit_waveform,
    response,
    steering_from_normalized,
)
from utils.exceptions import (
    AsymmetryError,
    DimensionMismatchError,
    DomainError,
    NonFiniteFilterError,
    OneBitRadarError,
    ZeroFilterError,
)
from utils.units import to_db


def _random_complex(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


@pytest.fixture
def rng():
    return np.random.default_rng(99)


@pytest.fixture
def scene():
    return RadarScene(
        geometry=ArrayGeometry.uniform_linear(4, 3),
        target=TargetModel.nft(math.radians(-21), math.sqrt(10.0)),
        interferences=(
            InterferenceSource.from_angle(math.radians(-48), 0.0, 100.0),
            InterferenceSource.from_angle(math.radians(5), 0.0, 50.0),
        ),
        noise_power=1.0,
        code_length=3,
    )


@pytest.fixture
def stochastic_scene(scene):
    return scene.replace_interference(delta=0.15)


@pytest.fixture
def waveform(rng):
    return Waveform.random_one_bit(4, 3, rng)


class TestQuantizedMoments:
    def test_zero_input(self):
        moments = prop1_moments(0j, 1.0)
        assert moments.mean == 0 and moments.variance == 2 and moments.exact_mean == 0

    @pytest.mark.parametrize("snr_db,bound", [(-20, 0.01), (-10, 0.07)])
    def test_relative_error(self, snr_db, bound):
        sigma_sq = 2.0
        amplitude = math.sqrt(sigma_sq * 10 ** (snr_db / 10) / 2)
        moments = prop1_moments(complex(amplitude, amplitude), sigma_sq)
        assert abs(moments.mean - moments.exact_mean) / abs(moments.exact_mean) < bound
        assert abs(moments.variance - moments.exact_variance) / moments.exact_variance < bound

    def test_rejects_noise_power(self):
        with pytest.raises(DomainError):
            prop1_moments(1.0, 0.0)


class TestBeta:
    def test_orthogonal(self, scene, waveform):
        A = scene.target_channel()
        As = A @ waveform.s
        w = _random_complex(np.random.default_rng(0), As.size)
        w -= np.vdot(As, w) / np.vdot(As, As) * As
        assert abs(beta(w, waveform, A, 1.0)) < 1e-12

    def test_matched(self, scene, waveform):
        A = scene.target_channel()
        As = A @ waveform.s
        expected = math.sqrt(4 / (math.pi * 2.0)) * np.linalg.norm(As) ** 2
        assert beta(As, waveform, A, 2.0) == pytest.approx(expected)

    def test_elementwise(self, scene, waveform, rng):
        A = scene.interference_channel(0)
        w = _random_complex(rng, scene.snapshot_dim)
        direct = sum(np.conj(waveform.s[j]) * np.conj(A[i, j]) * w[i] for i in range(A.shape[0]) for j in range(A.shape[1]))
        assert beta(w, waveform, A, 1.0) == pytest.approx(math.sqrt(4 / math.pi) * direct)

    def test_interference_betas_match_dense(self, scene, waveform, rng):
        w = _random_complex(rng, scene.snapshot_dim)
        expected = [beta(w, waveform, scene.interference_channel(k), 1.0) for k in range(2)]
        np.testing.assert_allclose(interference_betas(w, waveform, scene), expected)


class TestSigmaIn:
    def test_noise_only(self, scene, waveform, rng):
        noise_only = RadarScene(geometry=scene.geometry, target=scene.target, code_length=3)
        w = _random_complex(rng, noise_only.snapshot_dim)
        w /= np.linalg.norm(w)
        assert sigma_in_sq(w, waveform, noise_only) == pytest.approx(2.0)

    def test_single_interferer(self, scene, waveform, rng):
        one = RadarScene(geometry=scene.geometry, target=scene.target, interferences=scene.interferences[:1], code_length=3)
        w = _random_complex(rng, one.snapshot_dim)
        b1 = beta(w, waveform, one.interference_channel(0), 1.0)
        expected = 2 * np.vdot(w, w).real + 100.0 * abs(b1) ** 2
        assert sigma_in_sq(w, waveform, one) == pytest.approx(expected)

    def test_quadratic_form_agrees(self, scene, waveform, rng):
        w = _random_complex(rng, scene.snapshot_dim)
        via_xi = 2 * (np.vdot(w, w).real + np.vdot(w, xi_matrix(waveform, scene) @ w).real)
        assert sigma_in_sq(w, waveform, scene) == pytest.approx(via_xi, rel=1e-10)


class TestDetection:
    def test_pf(self):
        assert pf(0.0, 3.0) == 1.0
        assert pf(math.sqrt(2), 2.0) == pytest.approx(math.exp(-1))

    def test_threshold(self):
        assert threshold_for_pf(1.0, 2.0) == 0.0
        assert threshold_for_pf(math.exp(-1), 2.0) == pytest.approx(math.sqrt(2))
        for p in 10.0 ** -np.arange(1, 9):
            assert pf(threshold_for_pf(p, 3.7), 3.7) == pytest.approx(p, rel=1e-12)

    @pytest.mark.parametrize("bad", [0.0, -0.1, 1.5])
    def test_threshold_domain(self, bad):
        with pytest.raises(DomainError):
            threshold_for_pf(bad, 1.0)

    def test_pd_rft(self):
        assert pd_rft(1e-3, 2.0, 0.0, 1.0) == pytest.approx(1e-3)
        assert pd_rft(1e-6, 1.0, math.sqrt(12.8155), 1.0) == pytest.approx(0.3679, abs=1e-4)
        assert pd_rft(1e-6, 1.0, 1e6, 1.0) == pytest.approx(1.0, abs=1e-9)

    def test_pd_nft(self):
        assert pd_nft(1e-4, 0.0, 1.0, 2.0) == pytest.approx(1e-4, rel=1e-12)
        assert pd_nft(1e-4, 2.0, 1.0, 2.0) > pd_nft(1e-4, math.sqrt(2), 1.0, 2.0)

    def test_invalid_pf(self):
        with pytest.raises(DomainError):
            pd_nft(0.0, 1.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            pd_rft(2.0, 1.0, 1.0, 1.0)

    def test_monotone_in_qsinr(self):
        grid = 10 ** (np.linspace(-10, 25, 36) / 10)
        for kind in TargetKind:
            values = [pd_from_qsinr(1e-6, q, kind) for q in grid]
            assert all(a <= b for a, b in zip(values, values[1:]))
            unsaturated = [v for v in values if v < 1 - 1e-12]
            assert len(unsaturated) > 15
            assert all(a < b for a, b in zip(unsaturated, unsaturated[1:]))

    def test_nft_beats_rft(self):
        q = 10 ** 1.3
        assert pd_from_qsinr(1e-6, q, TargetKind.NFT) >= pd_from_qsinr(1e-6, q, TargetKind.RFT)

    def test_roc_endpoint(self):
        curve = roc_curve(5.0, TargetKind.RFT, [1e-4, 1e-2, 1.0])
        assert curve[-1, 1] == pytest.approx(1.0)
        assert np.all(np.diff(curve[:, 1]) > 0)


class TestKernels:
    @pytest.fixture
    def geometry(self):
        return ArrayGeometry.uniform_linear(3, 2)

    def test_c_collapses(self, geometry):
        varpi = 0.3
        a = np.kron(
            steering_from_normalized(geometry.tx_positions, 1.0, varpi),
            steering_from_normalized(geometry.rx_positions, 1.0, varpi),
        )
        np.testing.assert_allclose(c_kernel(geometry, varpi, 0.0), np.outer(a, a.conj()), atol=1e-14)

    def test_d_collapses(self, geometry):
        varpi = -0.6
        a = np.kron(
            steering_from_normalized(geometry.rx_positions, 1.0, varpi).conj(),
            steering_from_normalized(geometry.tx_positions, 1.0, varpi).conj(),
        )
        np.testing.assert_allclose(d_kernel(geometry, varpi, 0.0), np.outer(a, a.conj()), atol=1e-14)

    @pytest.mark.parametrize("kernel", [c_kernel, d_kernel])
    def test_trace_and_psd(self, geometry, kernel):
        for varpi, delta in [(0.0, 0.0), (0.4, 0.2), (-0.7, 0.3)]:
            K = kernel(geometry, varpi, delta)
            assert np.trace(K).real == pytest.approx(1.0)
            np.testing.assert_allclose(K, K.conj().T)
            assert np.min(np.linalg.eigvalsh(K)) > -1e-12

    def test_monte_carlo_expectation(self, geometry):
        rng = np.random.default_rng(5)
        varpi, delta = 0.2, 0.25
        omega = rng.uniform(varpi - delta, varpi + delta, size=100_000)
        a_t = steering_from_normalized(geometry.tx_positions, 1.0, omega)
        a_r = steering_from_normalized(geometry.rx_positions, 1.0, omega)
        c_vec = (a_t[:, :, None] * a_r[:, None, :]).reshape(omega.size, -1)
        d_vec = (a_r.conj()[:, :, None] * a_t.conj()[:, None, :]).reshape(omega.size, -1)
        c_mc = c_vec.T @ c_vec.conj() / omega.size
        d_mc = d_vec.T @ d_vec.conj() / omega.size
        C = c_kernel(geometry, varpi, delta)
        D = d_kernel(geometry, varpi, delta)
        assert np.linalg.norm(C - c_mc) <= 0.01 * np.linalg.norm(C)
        assert np.linalg.norm(D - d_mc) <= 0.01 * np.linalg.norm(D)

    def test_negative_delta(self, geometry):
        with pytest.raises(DomainError):
            c_kernel(geometry, 0.0, -0.1)


class TestMatrices:
    def test_xi_noise_only(self, scene, waveform):
        noise_only = RadarScene(geometry=scene.geometry, target=scene.target, code_length=3)
        assert not np.any(xi_matrix(waveform, noise_only))

    def test_xi_paths_agree_without_uncertainty(self, scene, waveform):
        np.testing.assert_allclose(
            xi_matrix(waveform, scene, use_kernels=True), xi_matrix(waveform, scene, use_kernels=False), atol=1e-9
        )

    def test_xi_deterministic_definition(self, scene, waveform):
        expected = sum(
            2 * source.power / math.pi * np.outer(scene.interference_channel(k) @ waveform.s, (scene.interference_channel(k) @ waveform.s).conj())
            for k, source in enumerate(scene.interferences)
        )
        np.testing.assert_allclose(xi_matrix(waveform, scene), expected, atol=1e-10)

    def test_xi_stochastic_monte_carlo(self, stochastic_scene, waveform):
        rng = np.random.default_rng(17)
        expected = np.zeros((stochastic_scene.snapshot_dim,) * 2, dtype=complex)
        for source in stochastic_scene.interferences:
            omega = rng.uniform(source.mean_normalized_angle - source.uncertainty, source.mean_normalized_angle + source.uncertainty, size=100_000)
            v = response(stochastic_scene.geometry, waveform.matrix, omega)
            expected += 2 * source.power / math.pi * (v.T @ v.conj()) / omega.size
        xi = xi_matrix(waveform, stochastic_scene)
        assert np.linalg.norm(xi - expected) <= 0.01 * np.linalg.norm(xi)
        assert np.min(np.linalg.eigvalsh(xi)) > -1e-9

    def test_xi_quadratic(self, stochastic_scene, waveform, rng):
        w = _random_complex(rng, stochastic_scene.snapshot_dim)
        direct = np.vdot(w, xi_matrix(waveform, stochastic_scene) @ w).real
        assert xi_quadratic(w, waveform, stochastic_scene) == pytest.approx(direct, rel=1e-10)

    def test_phi_noise_only(self, scene, rng):
        noise_only = RadarScene(geometry=scene.geometry, target=scene.target, code_length=3)
        w = _random_complex(rng, noise_only.snapshot_dim)
        np.testing.assert_allclose(phi_matrix(w, noise_only), np.vdot(w, w).real * np.eye(12), atol=1e-12)

    def test_phi_paths_agree_without_uncertainty(self, scene, rng):
        w = _random_complex(rng, scene.snapshot_dim)
        np.testing.assert_allclose(phi_matrix(w, scene, use_kernels=True), phi_matrix(w, scene, use_kernels=False), atol=1e-9)

    def test_phi_zero_filter(self, scene):
        with pytest.raises(ZeroFilterError):
            phi_matrix(np.zeros(scene.snapshot_dim), scene)

    @pytest.mark.parametrize("fixture_name", ["scene", "stochastic_scene"])
    def test_denominator_identity(self, request, fixture_name, rng):
        current = request.getfixturevalue(fixture_name)
        for _ in range(10):
            s = _random_complex(rng, current.waveform_dim)
            waveform = Waveform(s=s / np.linalg.norm(s), n_tx=current.n_tx)
            w = _random_complex(rng, current.snapshot_dim)
            left = np.vdot(w, xi_matrix(waveform, current) @ w).real + np.vdot(w, w).real
            right = np.vdot(waveform.s, phi_matrix(w, current) @ waveform.s).real
            assert left == pytest.approx(right, rel=1e-9)

    def test_gamma(self, scene, rng):
        A0 = scene.target_channel()
        assert not np.any(gamma_matrix(np.zeros(scene.snapshot_dim), A0))
        w = _random_complex(rng, scene.snapshot_dim)
        G = gamma_matrix(w, A0)
        assert np.trace(G).real == pytest.approx(np.linalg.norm(A0.conj().T @ w) ** 2)
        assert np.linalg.matrix_rank(G) == 1

    def test_realified_gamma_has_two_equal_eigenvalues(self, scene, rng):
        w = _random_complex(rng, scene.snapshot_dim)
        evd = real_symmetric_evd(realify(gamma_matrix(w, scene.target_channel())))
        lam = evd.eigenvalues
        assert lam[0] == pytest.approx(lam[1], rel=1e-10)
        assert np.all(np.abs(lam[2:]) <= 1e-10 * lam[0])

    def test_realify(self, rng):
        np.testing.assert_array_equal(realify(np.eye(3)), np.eye(6))
        X = _random_complex(rng, 16).reshape(4, 4)
        M = X + X.conj().T
        v = _random_complex(rng, 4)
        assert np.vdot(v, M @ v).real == pytest.approx(realify_vec(v) @ realify(M) @ realify_vec(v), rel=1e-10)
        doubled = np.sort(np.repeat(np.linalg.eigvalsh(M), 2))
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(realify(M))), doubled, atol=1e-10)

    def test_complexify_inverts_realify_vec(self, rng):
        v = _random_complex(rng, 5)
        np.testing.assert_array_equal(complexify_vec(realify_vec(v)), v)
        np.testing.assert_array_equal(complexify_vec([1.0, 2.0, -3.0, 4.0]), [1 - 3j, 2 + 4j])
        with pytest.raises(DimensionMismatchError):
            complexify_vec(np.ones(3))

    def test_realify_rejects_non_hermitian(self):
        with pytest.raises(AsymmetryError):
            realify(np.array([[1, 2], [0, 1]], dtype=complex))


class TestRatio:
    def test_one_bit_adc_loss(self):
        geometry = ArrayGeometry.uniform_linear(8, 4)
        scene = RadarScene(geometry=geometry, target=TargetModel.nft(0.0, 1.0), code_length=8)
        waveform = matched_phase_onebit_waveform(geometry, 0.0, 8)
        w = scene.target_channel() @ waveform.s
        assert np.linalg.norm(w) ** 2 == pytest.approx(1.0)
        assert rho(w, waveform, scene) == pytest.approx(2 / math.pi)
        assert to_db(qsinr(w, waveform, scene) / infinite_bit_sinr(w, waveform, scene)) == pytest.approx(-1.96, abs=0.01)

    def test_orthogonal_filter(self, scene, waveform, rng):
        As = scene.target_channel() @ waveform.s
        w = _random_complex(rng, As.size)
        w -= np.vdot(As, w) / np.vdot(As, As) * As
        assert rho(w, waveform, scene) == pytest.approx(0.0, abs=1e-20)

    def test_scale_invariance(self, stochastic_scene, waveform, rng):
        w = _random_complex(rng, stochastic_scene.snapshot_dim)
        base = rho(w, waveform, stochastic_scene)
        for c in (2.0, -0.3j, 5 - 7j):
            assert rho(c * w, waveform, stochastic_scene) == pytest.approx(base, rel=1e-12)

    @pytest.mark.parametrize("fixture_name", ["scene", "stochastic_scene"])
    def test_two_forms_agree(self, request, fixture_name, waveform, rng):
        current = request.getfixturevalue(fixture_name)
        w = _random_complex(rng, current.snapshot_dim)
        assert rho(w, waveform, current) == pytest.approx(rho_phi_form(w, waveform, current), rel=1e-9)

    def test_zero_filter(self, scene, waveform):
        with pytest.raises(ZeroFilterError):
            rho(np.zeros(scene.snapshot_dim), waveform, scene)
        with pytest.raises(ZeroFilterError):
            Filter(w=np.zeros(scene.snapshot_dim), n_rx=scene.n_rx)

    def test_non_finite_filter(self, scene):
        w = np.ones(scene.snapshot_dim, dtype=complex)
        w[1] = np.nan
        with pytest.raises(NonFiniteFilterError):
            Filter(w=w, n_rx=scene.n_rx)
        with pytest.raises(OneBitRadarError):
            Filter(w=np.full(scene.snapshot_dim, np.inf), n_rx=scene.n_rx)

    def test_target_kind_scaling(self, scene, waveform, rng):
        w = _random_complex(rng, scene.snapshot_dim)
        rft = scene.with_target(TargetModel.rft(scene.target.angle, 7.0))
        assert qsinr(w, waveform, scene) == pytest.approx(10.0 * rho(w, waveform, scene))
        assert qsinr(w, waveform, rft) == pytest.approx(7.0 * rho(w, waveform, rft))


class TestReport:
    def test_fields(self, stochastic_scene, waveform, rng):
        w = Filter.matched(stochastic_scene, waveform)
        report = detection_report(w, waveform, stochastic_scene, 1e-3)
        assert report.stochastic
        assert report.sigma_in_sq >= 2 * w.energy
        assert report.qsinr == pytest.approx(qsinr(w, waveform, stochastic_scene), rel=1e-10)
        assert report.pf <= report.pd <= 1
        assert report.betas.shape == (2,)
        assert pf(report.threshold, report.sigma_in_sq) == pytest.approx(1e-3)

    def test_rft(self, scene, waveform):
        rft = scene.with_target(TargetModel.rft(scene.target.angle, 100.0))
        report = detection_report(Filter.matched(rft, waveform), waveform, rft, 1e-6)
        expected = pd_from_qsinr(1e-6, report.qsinr, TargetKind.RFT)
        assert report.pd == pytest.approx(expected, rel=1e-10)
        assert not report.stochastic
