import numpy as np
import pytest

from sfrcnet import mandel
from sfrcnet.materials import FiberParams, MatrixParams, MatrixState, \
    fiber_stress, hardening_slope, hardening_stress, return_map, yield_function
from sfrcnet.homogenization import MeanField, ramp_program, cycle_program
from sfrcnet.orientation import Microstructure
from sfrcnet._kernels import KernelError

from oracles import explicit_substep_path

PARAMS = MatrixParams()


def uniaxial_stress_strain(e11, nu=PARAMS.nu):
    """Strain (Mandel) producing a uniaxial stress state in the elastic range."""
    return mandel.from_matrix(np.diag([e11, -nu * e11, -nu * e11]))


class TestHardening:
    def test_zero_at_origin(self):
        assert hardening_stress(0.0, PARAMS) == 0.0

    def test_initial_slope(self):
        # analytic: H + H_inf * m
        h = 1e-9
        fd = (hardening_stress(h, PARAMS) - hardening_stress(0.0, PARAMS)) / h
        assert hardening_slope(0.0, PARAMS) == pytest.approx(6650.0, rel=1e-12)
        assert fd == pytest.approx(6650.0, rel=1e-5)

    def test_value_at_5_percent(self):
        expect = 150.0 * 0.05 + 20.0 * (1.0 - np.exp(-325.0 * 0.05))
        assert hardening_stress(0.05, PARAMS) == pytest.approx(expect, rel=1e-14)
        assert expect == pytest.approx(27.5, abs=2e-3)

    def test_monotone(self):
        p = np.linspace(0.0, 0.5, 200)
        k = hardening_stress(p, PARAMS)
        assert np.all(np.diff(k) > 0.0)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            hardening_stress(-0.01, PARAMS)


class TestYieldFunction:
    def test_virgin_origin(self):
        assert yield_function(np.zeros(6), 0.0, PARAMS) == pytest.approx(-25.0)

    def test_on_initial_surface(self):
        sig = mandel.from_matrix(np.diag([25.0, 0.0, 0.0]))
        assert yield_function(sig, 0.0, PARAMS) == pytest.approx(0.0, abs=1e-12)

    def test_pressure_insensitive(self):
        for p_mag in (10.0, -300.0, 4567.0):
            sig = p_mag * mandel.IDENTITY2
            assert yield_function(sig, 0.0, PARAMS) == pytest.approx(-25.0)


class TestReturnMap:
    def test_null_increment(self):
        sig, state, c_alg = return_map(MatrixState(), np.zeros(6), PARAMS)
        assert np.abs(sig).max() == 0.0
        assert state.p == 0.0
        assert np.abs(state.eps_p).max() == 0.0
        assert np.allclose(c_alg, PARAMS.elastic_stiffness())

    def test_elastic_below_yield(self):
        # uniaxial stress state just below the yield strain sigma_y / E
        e11 = 0.9 * PARAMS.sigma_y / PARAMS.e_mod
        sig, state, c_alg = return_map(MatrixState(),
                                       uniaxial_stress_strain(e11), PARAMS)
        assert state.p == 0.0
        assert np.abs(state.eps_p).max() == 0.0
        assert mandel.von_mises(sig) == pytest.approx(0.9 * PARAMS.sigma_y,
                                                      rel=1e-10)

    def test_plastic_flow_is_deviatoric(self, rng):
        state = MatrixState()
        for _ in range(30):
            deps = mandel.from_matrix(
                0.5 * (lambda m: m + m.T)(rng.normal(scale=4e-3, size=(3, 3))))
            sig, state, _ = return_map(state, deps, PARAMS)
            assert abs(mandel.trace(state.eps_p)) < 1e-10

    def test_yield_residual_after_plastic_update(self, rng):
        state = MatrixState()
        p_prev = 0.0
        hits = 0
        for _ in range(50):
            deps = mandel.from_matrix(
                0.5 * (lambda m: m + m.T)(rng.normal(scale=3e-3, size=(3, 3))))
            sig, state, _ = return_map(state, deps, PARAMS)
            assert state.p >= p_prev  # non-decreasing
            if state.p > p_prev:
                hits += 1
                assert abs(yield_function(sig, state.p, PARAMS)) \
                    <= 1e-8 * PARAMS.sigma_y
            p_prev = state.p
        assert hits > 10

    def test_elastic_unload_returns_to_zero(self):
        deps = uniaxial_stress_strain(0.8 * PARAMS.sigma_y / PARAMS.e_mod)
        sig1, state, _ = return_map(MatrixState(), deps, PARAMS)
        sig2, state, _ = return_map(state, -deps, PARAMS)
        assert np.abs(sig2).max() < 1e-10

    def test_consistent_tangent_elastic_and_plastic(self, rng):
        h = 1e-7
        for regime_scale, min_p in ((5e-4, -1.0), (6e-3, 1e-7)):
            for _ in range(15):
                deps0 = mandel.from_matrix(0.5 * (lambda m: m + m.T)(
                    rng.normal(scale=regime_scale, size=(3, 3))))
                state0 = MatrixState()
                sig0, state1, _ = return_map(state0, deps0, PARAMS)
                deps = mandel.from_matrix(0.5 * (lambda m: m + m.T)(
                    rng.normal(scale=regime_scale, size=(3, 3))))
                sig, state2, c_alg = return_map(state1, deps, PARAMS)
                if min_p > 0 and state2.p <= state1.p:
                    continue  # keep the plastic batch plastic
                fd = np.zeros((6, 6))
                for j in range(6):
                    dp = deps.copy()
                    dp[j] += h
                    sp, _, _ = return_map(state1, dp, PARAMS)
                    dm = deps.copy()
                    dm[j] -= h
                    sm, _, _ = return_map(state1, dm, PARAMS)
                    fd[:, j] = (sp - sm) / (2.0 * h)
                rel = np.abs(fd - c_alg).max() / np.abs(c_alg).max()
                assert rel < 1e-5

    def test_rejects_nan(self):
        bad = np.zeros(6)
        bad[0] = np.nan
        with pytest.raises(ValueError):
            return_map(MatrixState(), bad, PARAMS)

    def test_newton_failure_reports(self):
        with pytest.raises(KernelError):
            return_map(MatrixState(), uniaxial_stress_strain(0.05), PARAMS,
                       rm_maxit=1)


class TestAgainstSubstepOracle:
    def _matrix_driver(self):
        micro = Microstructure(a=np.eye(3) / 3.0, vf=0.0)
        return MeanField(micro, matrix=PARAMS)

    def test_monotonic_uniaxial_stress(self):
        mf = self._matrix_driver()
        t, eps, sig = mf.run_program(ramp_program({0: 0.04}, n_steps=100))
        sig_oracle = explicit_substep_path(mandel.from_plain(eps), PARAMS)
        q_prod = np.array([mandel.von_mises(s) for s in mandel.from_plain(sig)])
        q_orac = np.array([mandel.von_mises(s) for s in sig_oracle])
        err = np.abs(q_prod[1:] - q_orac[1:]).max() / q_orac.max()
        assert err < 1e-3
        # hardening law: flow stress approaches sigma_y + kappa(p)
        assert q_prod[-1] == pytest.approx(
            PARAMS.sigma_y + hardening_stress(0.04 - q_prod[-1] / PARAMS.e_mod,
                                              PARAMS), rel=2e-3)

    def test_cyclic_uniaxial_stress(self):
        mf = self._matrix_driver()
        t, eps, sig = mf.run_program(cycle_program([0], 0.03, 160))
        sig_oracle = explicit_substep_path(mandel.from_plain(eps), PARAMS)
        err = np.abs(mandel.from_plain(sig) - sig_oracle).max()
        assert err < 1e-3 * np.abs(sig).max()


class TestRateIndependence:
    def _resample(self, path, n_new):
        t_old = np.linspace(0.0, 1.0, path.shape[0])
        t_new = np.linspace(0.0, 1.0, n_new)
        return np.column_stack([np.interp(t_new, t_old, path[:, j])
                                for j in range(6)])

    def test_resampled_paths_agree(self, rng):
        from sfrcnet.pathgen import PathGenParams, generate_path
        params = PathGenParams(n_steps=500, n1=5, gamma=0.4, eps_max=0.05)
        path = generate_path(params, rng)
        micro = Microstructure(a=np.eye(3) / 3.0, vf=0.0)
        mf = MeanField(micro, matrix=PARAMS)
        sig_base = mf.run_path(path)
        for factor in (2.0, 0.5):
            n_new = int(round(factor * 500)) + 1
            sig_new = mf.run_path(self._resample(path, n_new))
            # compare at the final knot (shared by construction)
            err = np.abs(sig_new[-1] - sig_base[-1]).max()
            assert err < 0.01 * PARAMS.sigma_y


class TestFiberStress:
    def test_zero(self):
        assert np.abs(fiber_stress(np.zeros(6), FiberParams())).max() == 0.0

    def test_uniaxial_stress_state(self):
        fp = FiberParams()
        eps = mandel.from_matrix(np.diag([1e-3, -fp.nu * 1e-3, -fp.nu * 1e-3]))
        sig = fiber_stress(eps, fp)
        assert sig[0] == pytest.approx(fp.e_mod * 1e-3, rel=1e-12)
        assert np.abs(sig[1:]).max() < 1e-9

    def test_matches_full_tensor_contraction(self, rng):
        fp = FiberParams()
        c4 = mandel.mandel_to_tensor4(fp.stiffness())
        for _ in range(10):
            m = rng.normal(scale=0.01, size=(3, 3))
            m = 0.5 * (m + m.T)
            sig_full = np.einsum("ijkl,kl->ij", c4, m)
            sig = fiber_stress(mandel.from_matrix(m), fp)
            assert np.allclose(mandel.to_matrix(sig), sig_full, rtol=1e-12,
                               atol=1e-12)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            FiberParams(aspect_ratio=0.5)
        with pytest.raises(ValueError):
            MatrixParams(nu=0.5)
        with pytest.raises(ValueError):
            MatrixParams(sigma_y=-1.0)
