import numpy as np
import pytest
from scipy.stats import chi2

from sfrcnet import mandel
from sfrcnet.orientation import Microstructure, average_basis, closure_a4, \
    from_components, orientation_average, rotation_from_angles, \
    sample_eigenvalues, sample_orientation_tensor, sample_rotation, \
    to_components, validate_orientation_tensor


class _CutStub:
    """rng stub returning fixed (0,1) cuts for the eigenvalue sampler."""

    def __init__(self, u, v):
        self._vals = np.array([u, v])

    def random(self, n):
        return self._vals[:n]


class TestEigenvalueSampling:
    def test_segment_construction(self):
        lam = sample_eigenvalues(_CutStub(0.3, 0.7))
        assert np.allclose(lam, [0.3, 0.4, 0.3])
        lam = sample_eigenvalues(_CutStub(0.7, 0.3))  # unordered cuts
        assert np.allclose(lam, [0.3, 0.4, 0.3])

    def test_degenerate_cuts(self):
        lam = sample_eigenvalues(_CutStub(0.5, 0.5))
        assert np.allclose(lam, [0.5, 0.0, 0.5])

    def test_simplex_and_mean(self, rng):
        draws = np.array([sample_eigenvalues(rng) for _ in range(100_000)])
        assert np.all(draws >= 0.0)
        assert np.allclose(draws.sum(axis=1), 1.0, atol=1e-14)
        assert np.abs(draws.mean(axis=0) - 1.0 / 3.0).max() < 0.01


class TestRotationSampling:
    def test_proper_orthogonal(self, rng):
        for _ in range(200):
            r = sample_rotation(rng)
            assert np.abs(r @ r.T - np.eye(3)).max() < 1e-12
            assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)

    def test_hand_evaluated_householder(self):
        # theta = 0, v = e3: R' = 2 v v^T - I = diag(-1, -1, 1)
        r = rotation_from_angles(0.0, 0.0, 0.0)
        assert np.allclose(r, np.diag([-1.0, -1.0, 1.0]), atol=1e-15)

    def test_z_axis_image_uniform_on_sphere(self, rng):
        n_draws = 100_000
        imgs = np.empty((n_draws, 3))
        for i in range(n_draws):
            imgs[i] = sample_rotation(rng)[:, 2]
        # equal-area bins: 10 bands in z x 12 sectors in phi
        zi = np.clip(((imgs[:, 2] + 1.0) / 2.0 * 10).astype(int), 0, 9)
        phi = np.arctan2(imgs[:, 1], imgs[:, 0])
        fi = np.clip(((phi + np.pi) / (2 * np.pi) * 12).astype(int), 0, 11)
        counts = np.bincount(zi * 12 + fi, minlength=120)
        expected = n_draws / 120.0
        stat = float(((counts - expected) ** 2 / expected).sum())
        assert stat < chi2.ppf(0.99, df=119)


class TestOrientationTensorSampling:
    def test_uniaxial_branch_with_identity_rotation(self):
        # rotation_from_angles(pi, 0, 0) is the identity map
        r = rotation_from_angles(np.pi, 0.0, 0.0)
        assert np.allclose(r, np.eye(3), atol=1e-15)
        a = r @ np.diag([1.0, 0.0, 0.0]) @ r.T
        assert np.allclose(a, np.diag([1.0, 0.0, 0.0]))

    def test_uniaxial_branch_spectrum(self, rng):
        for _ in range(50):
            a = sample_orientation_tensor(rng, p_uniaxial=1.0)
            lam = np.linalg.eigvalsh(a)
            assert np.abs(lam - [0.0, 0.0, 1.0]).max() < 1e-12

    def test_invariants_and_mean(self, rng):
        n_draws = 100_000
        draws = np.empty((n_draws, 3, 3))
        for i in range(n_draws):
            draws[i] = sample_orientation_tensor(rng, p_uniaxial=0.1)
        traces = np.trace(draws, axis1=1, axis2=2)
        assert np.abs(traces - 1.0).max() < 1e-12
        eig = np.linalg.eigvalsh(draws)
        assert eig.min() > -1e-10
        assert eig.max() < 1.0 + 1e-10
        assert np.abs(draws.mean(axis=0) - np.eye(3) / 3.0).max() < 0.01

    def test_eigenvalues_invariant_under_rotation(self, rng):
        for _ in range(100):
            lam = np.sort(sample_eigenvalues(rng))
            rot = sample_rotation(rng)
            a = rot @ np.diag(lam) @ rot.T
            assert np.abs(np.sort(np.linalg.eigvalsh(a)) - lam).max() < 1e-10


class TestValidation:
    def test_rejects_wrong_trace(self):
        with pytest.raises(ValueError):
            validate_orientation_tensor(np.eye(3))

    def test_rejects_indefinite(self):
        a = np.diag([1.2, -0.1, -0.1])
        with pytest.raises(ValueError):
            validate_orientation_tensor(a)

    def test_external_clamp_of_tabulated_tensor(self):
        # three-decimal rounding leaves a slightly negative eigenvalue
        comp = (0.000, 0.919, 0.081, 0.015, 0.005, 0.273)
        a = from_components(comp)
        lam = np.linalg.eigvalsh(a)
        assert lam.min() >= -1e-12
        assert np.trace(a) == pytest.approx(1.0, abs=1e-12)
        assert np.abs(to_components(a) - comp).max() < 5e-3

    def test_external_rejects_gross_violation(self):
        with pytest.raises(ValueError):
            from_components((0.6, 0.6, 0.3, 0.0, 0.0, 0.0))

    def test_microstructure_vf_range(self):
        with pytest.raises(ValueError):
            Microstructure(a=np.eye(3) / 3.0, vf=1.0)


class TestClosure:
    def test_uniaxial_exactness(self):
        a4 = closure_a4(np.diag([1.0, 0.0, 0.0]))
        expect = np.zeros((6, 6))
        expect[0, 0] = 1.0
        assert np.abs(a4 - expect).max() < 1e-14

    def test_isotropic_exactness(self):
        a4 = closure_a4(np.eye(3) / 3.0)
        t = np.eye(3)
        iso = (np.einsum("ij,kl->ijkl", t, t) + np.einsum("ik,jl->ijkl", t, t)
               + np.einsum("il,jk->ijkl", t, t)) / 15.0
        assert np.abs(a4 - mandel.tensor4_to_mandel(iso)).max() < 1e-14

    def test_contraction_identity(self, rng):
        for _ in range(200):
            a = sample_orientation_tensor(rng)
            a4 = closure_a4(a)
            right = mandel.to_matrix(a4 @ mandel.IDENTITY2)
            left = mandel.to_matrix(a4.T @ mandel.IDENTITY2)
            assert np.abs(right - a).max() < 1e-10
            assert np.abs(left - a).max() < 1e-10


class TestOrientationAverage:
    def _mt_ud(self):
        from sfrcnet.homogenization import Spheroid, mt_tangent_ud
        from sfrcnet.materials import FiberParams, MatrixParams
        return mt_tangent_ud(MatrixParams().elastic_stiffness(),
                             FiberParams().stiffness(), 0.12, Spheroid(24.0))

    def test_aligned_average_is_identity_operation(self):
        b_ud = self._mt_ud()
        out = orientation_average(b_ud, np.diag([1.0, 0.0, 0.0]))
        assert np.abs(out - b_ud).max() < 1e-10 * np.abs(b_ud).max()

    def test_isotropic_input_unchanged(self, rng):
        c_iso = mandel.isotropic_stiffness(3100.0, 0.35)
        a = sample_orientation_tensor(rng)
        out = orientation_average(c_iso, a)
        assert np.abs(out - c_iso).max() < 1e-9 * np.abs(c_iso).max()

    def test_isotropic_distribution_gives_isotropic_result(self):
        from sfrcnet.homogenization import isotropize
        b_ud = self._mt_ud()
        out = orientation_average(b_ud, np.eye(3) / 3.0)
        residual = np.abs(out - isotropize(out)).max() / np.abs(out).max()
        assert residual < 1e-8

    def test_linear_in_operator(self, rng):
        a = sample_orientation_tensor(rng)
        b_ud = self._mt_ud()
        c_iso = mandel.isotropic_stiffness(100.0, 0.2)
        lhs = orientation_average(2.0 * b_ud + 0.5 * c_iso, a)
        rhs = 2.0 * orientation_average(b_ud, a) \
            + 0.5 * orientation_average(c_iso, a)
        assert np.abs(lhs - rhs).max() < 1e-9 * np.abs(lhs).max()

    def test_rotation_equivariance(self, rng):
        b_ud = self._mt_ud()
        for _ in range(10):
            a = sample_orientation_tensor(rng)
            rot = sample_rotation(rng)
            lhs = mandel.rotate4(orientation_average(b_ud, a), rot)
            rhs = orientation_average(b_ud, rot @ a @ rot.T)
            assert np.abs(lhs - rhs).max() < 1e-9 * np.abs(lhs).max()

    def test_rejects_non_transversely_isotropic(self):
        c_ortho = np.diag([100.0, 80.0, 60.0, 30.0, 20.0, 10.0])
        with pytest.raises(ValueError):
            orientation_average(c_ortho, np.eye(3) / 3.0)

    def test_basis_contracts_like_average(self, rng):
        # <B> must reproduce B for the axis-1 uniaxial distribution
        a_ud = np.diag([1.0, 0.0, 0.0])
        basis = average_basis(a_ud)
        b_ud = self._mt_ud()
        from sfrcnet._kernels.pure import ti_coefficients
        coeffs = ti_coefficients(b_ud)
        recon = np.einsum("k,kij->ij", coeffs, basis)
        assert np.abs(recon - b_ud).max() < 1e-9 * np.abs(b_ud).max()
