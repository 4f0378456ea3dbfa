import numpy as np
import pytest

from sfrcnet import mandel


def random_sym(rng, scale=1.0):
    m = rng.normal(scale=scale, size=(3, 3))
    return 0.5 * (m + m.T)


class TestRoundTrip:
    def test_round_trip_to_machine_precision(self, rng):
        for _ in range(100):
            m = random_sym(rng)
            err = np.abs(mandel.to_matrix(mandel.from_matrix(m)) - m).max()
            assert err <= 4.0 * np.finfo(float).eps * np.abs(m).max()

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            mandel.from_matrix(np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0.0]]))

    def test_inner_product_equals_double_contraction(self, rng):
        worst = 0.0
        for _ in range(10_000):
            m1, m2 = random_sym(rng), random_sym(rng)
            lhs = np.dot(mandel.from_matrix(m1), mandel.from_matrix(m2))
            rhs = np.tensordot(m1, m2)
            scale = np.linalg.norm(m1) * np.linalg.norm(m2)
            worst = max(worst, abs(lhs - rhs) / scale)
        assert worst < 1e-12

    def test_plain_conversion(self, rng):
        v = rng.normal(size=6)
        p = mandel.to_plain(v)
        assert np.allclose(p[:3], v[:3])
        assert np.allclose(p[3:], v[3:] / np.sqrt(2.0))
        assert np.allclose(mandel.from_plain(p), v, atol=1e-15)


class TestDeviatorVonMises:
    def test_identity_has_zero_deviator(self):
        assert np.abs(mandel.deviator(mandel.IDENTITY2)).max() < 1e-12

    def test_pure_shear_unchanged(self):
        v = mandel.from_matrix(np.array([[0, 0.7, 0], [0.7, 0, 0], [0, 0, 0.0]]))
        assert np.allclose(mandel.deviator(v), v)

    def test_hand_deviator(self):
        v = mandel.from_matrix(np.diag([3.0, 0.0, 0.0]))
        expect = mandel.from_matrix(np.diag([2.0, -1.0, -1.0]))
        assert np.allclose(mandel.deviator(v), expect, atol=1e-12)

    def test_uniaxial_von_mises(self):
        for sig in (57.0, -31.0):
            v = mandel.from_matrix(np.diag([sig, 0.0, 0.0]))
            assert mandel.von_mises(v) == pytest.approx(abs(sig), rel=1e-13)

    def test_hydrostatic_von_mises(self):
        assert mandel.von_mises(4.2 * mandel.IDENTITY2) < 1e-12

    def test_shear_von_mises(self):
        tau = 13.0
        v = mandel.from_matrix(np.array([[0, tau, 0], [tau, 0, 0], [0, 0, 0.0]]))
        assert mandel.von_mises(v) == pytest.approx(np.sqrt(3.0) * tau, rel=1e-13)


class TestRotation:
    def test_identity_rotation(self, rng):
        v = mandel.from_matrix(random_sym(rng))
        assert np.allclose(mandel.rotate(v, np.eye(3)), v, atol=1e-14)

    def test_isotropic_invariant(self, rng):
        from sfrcnet.orientation import sample_rotation
        r = sample_rotation(rng)
        assert np.allclose(mandel.rotate(mandel.IDENTITY2, r),
                           mandel.IDENTITY2, atol=1e-12)

    def test_quarter_turn_about_z(self):
        v = mandel.from_matrix(np.diag([1.0, 0.0, 0.0]))
        r = mandel.axis_rotation(2, np.pi / 2.0)
        out = mandel.to_matrix(mandel.rotate(v, r))
        assert np.allclose(out, np.diag([0.0, 1.0, 0.0]), atol=1e-14)

    def test_round_trip_and_eigenvalues(self, rng):
        from sfrcnet.orientation import sample_rotation
        for _ in range(50):
            m = random_sym(rng)
            v = mandel.from_matrix(m)
            r = sample_rotation(rng)
            rotated = mandel.rotate(v, r)
            back = mandel.rotate(rotated, r.T)
            assert np.abs(back - v).max() < 1e-10
            ev1 = np.linalg.eigvalsh(mandel.to_matrix(rotated))
            ev2 = np.linalg.eigvalsh(m)
            assert np.abs(ev1 - ev2).max() < 1e-10

    def test_rotate4_preserves_invariants(self, rng):
        from sfrcnet.orientation import sample_rotation
        c = mandel.isotropic_stiffness(3100.0, 0.35)
        r = sample_rotation(rng)
        assert np.abs(mandel.rotate4(c, r) - c).max() < 1e-8

    def test_rejects_non_orthogonal(self, rng):
        with pytest.raises(ValueError):
            mandel.rotate(np.zeros(6), np.eye(3) * 1.1)
        bad = np.eye(3)
        bad[0, 0] = -1.0  # improper (det = -1)
        with pytest.raises(ValueError):
            mandel.rotate(np.zeros(6), bad)


class TestIsotropicStiffness:
    def test_matrix_values(self):
        c = mandel.isotropic_stiffness(3100.0, 0.35)
        k = mandel.IDENTITY2 @ c @ mandel.IDENTITY2 / 9.0
        mu = (np.trace(c) - 3.0 * k) / 10.0
        assert k == pytest.approx(3444.444444, rel=1e-8)
        assert mu == pytest.approx(1148.148148, rel=1e-8)

    def test_fiber_values(self):
        c = mandel.isotropic_stiffness(76000.0, 0.22)
        k = mandel.IDENTITY2 @ c @ mandel.IDENTITY2 / 9.0
        mu = (np.trace(c) - 3.0 * k) / 10.0
        assert k == pytest.approx(76000.0 / (3 * (1 - 0.44)), rel=1e-10)
        assert mu == pytest.approx(76000.0 / (2 * 1.22), rel=1e-10)

    def test_zero_poisson(self):
        c = mandel.isotropic_stiffness(100.0, 0.0)
        k = mandel.IDENTITY2 @ c @ mandel.IDENTITY2 / 9.0
        mu = (np.trace(c) - 3.0 * k) / 10.0
        assert k == pytest.approx(100.0 / 3.0)
        assert mu == pytest.approx(50.0)

    def test_rejects_incompressible_and_nonpositive(self):
        with pytest.raises(ValueError):
            mandel.isotropic_stiffness(100.0, 0.5)
        with pytest.raises(ValueError):
            mandel.isotropic_stiffness(-1.0, 0.3)

    def test_action_splits_into_bulk_and_shear(self, rng):
        c = mandel.isotropic_stiffness(3100.0, 0.35)
        k, mu = 3100.0 / (3 * 0.3), 3100.0 / 2.7
        for _ in range(20):
            eps = mandel.from_matrix(random_sym(rng, scale=0.01))
            expect = (2.0 * mu * mandel.deviator(eps)
                      + k * mandel.trace(eps) * mandel.IDENTITY2)
            assert np.allclose(c @ eps, expect, rtol=1e-12, atol=1e-14)


class TestTensor4Conversion:
    def test_round_trip(self, rng):
        m = rng.normal(size=(6, 6))
        t = mandel.mandel_to_tensor4(m)
        # minor-symmetrized round trip is exact
        assert np.abs(mandel.tensor4_to_mandel(t) - m).max() < 1e-12

    def test_composition_matches_contraction(self, rng):
        m1, m2 = rng.normal(size=(6, 6)), rng.normal(size=(6, 6))
        t1, t2 = mandel.mandel_to_tensor4(m1), mandel.mandel_to_tensor4(m2)
        composed = np.einsum("ijab,abkl->ijkl", t1, t2)
        assert np.abs(mandel.tensor4_to_mandel(composed) - m1 @ m2).max() < 1e-10
