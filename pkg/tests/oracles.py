"""Independent verification oracles used by the test suite.

These deliberately avoid the production code paths: the plasticity oracle
integrates the continuum rate equations explicitly with sub-stepping, and
the Eshelby oracle evaluates the polarization integral by quadrature over
the unit sphere.
"""
import numpy as np

from sfrcnet import mandel

_I2 = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])


def _kappa(p, params):
    return params.h_lin * p + params.h_inf * (1.0 - np.exp(-params.m_exp * p))


def _kappa_slope(p, params):
    return params.h_lin + params.h_inf * params.m_exp * np.exp(-params.m_exp * p)


def explicit_substep_path(eps_path_mandel, params, total_substeps=10_000):
    """Explicit (midpoint RK2) integration of the J2 rate equations.

    ``eps_path_mandel``: (n_rows, 6) Mandel strain knots, interpolated
    linearly; at least ``total_substeps`` sub-increments over the path.
    Returns the (n_rows, 6) Mandel stress series at the knots.
    """
    eps_path = np.asarray(eps_path_mandel, dtype=float)
    n_rows = eps_path.shape[0]
    nsub = max(int(np.ceil(total_substeps / max(n_rows - 1, 1))), 2)
    mu = params.e_mod / (2.0 * (1.0 + params.nu))
    k_mod = params.e_mod / (3.0 * (1.0 - 2.0 * params.nu))
    c_el = 3.0 * k_mod * mandel.VOL_PROJECTOR + 2.0 * mu * mandel.DEV_PROJECTOR

    def rate(eps, eps_p, p, deps_dt):
        sig = c_el @ (eps - eps_p)
        s = sig - (sig[:3].sum() / 3.0) * _I2
        q = np.sqrt(1.5 * np.dot(s, s))
        f = q - (params.sigma_y + _kappa(p, params))
        if f < 0.0 or q == 0.0:
            return np.zeros(6), 0.0
        n_f = 1.5 * s / q
        drive = 2.0 * mu * np.dot(n_f, deps_dt)
        if drive <= 0.0:
            return np.zeros(6), 0.0
        p_dot = drive / (3.0 * mu + _kappa_slope(p, params))
        return p_dot * n_f, p_dot

    sig_out = np.zeros_like(eps_path)
    eps_p = np.zeros(6)
    p_acc = 0.0
    for k in range(1, n_rows):
        deps = (eps_path[k] - eps_path[k - 1]) / nsub
        for j in range(nsub):
            eps0 = eps_path[k - 1] + j * deps
            dp1, pd1 = rate(eps0, eps_p, p_acc, deps)
            dp2, pd2 = rate(eps0 + 0.5 * deps, eps_p + 0.5 * dp1,
                            p_acc + 0.5 * pd1, deps)
            eps_p = eps_p + dp2
            p_acc = p_acc + pd2
        sig_out[k] = c_el @ (eps_path[k] - eps_p)
    return sig_out


def eshelby_quadrature(ar, nu, n_polar=400, n_azimuth=64):
    """Eshelby tensor from the polarization integral (Mandel 6x6).

    P = det(Z)/(4 pi) * int_{S2} H(n)/|Z n|^3 dS with H built from the
    inverse acoustic tensor; S = P : C.  Spheroid axis along x1.
    """
    mu = 1.0
    lam = 2.0 * mu * nu / (1.0 - 2.0 * nu)
    fac = (lam + mu) / (lam + 2.0 * mu)
    x, wx = np.polynomial.legendre.leggauss(n_polar)
    phi = np.linspace(0.0, 2.0 * np.pi, n_azimuth, endpoint=False)
    wphi = 2.0 * np.pi / n_azimuth
    p_tensor = np.zeros((3, 3, 3, 3))
    eye = np.eye(3)
    for xi, wi in zip(x, wx):
        st = np.sqrt(1.0 - xi * xi)
        n = np.stack([np.full_like(phi, xi), st * np.cos(phi),
                      st * np.sin(phi)], axis=1)          # (nphi, 3)
        zn2 = (ar * n[:, 0]) ** 2 + n[:, 1] ** 2 + n[:, 2] ** 2
        w = wi * wphi * ar / (4.0 * np.pi) / zn2 ** 1.5   # (nphi,)
        kinv = (eye[None] - fac * np.einsum("qi,qk->qik", n, n)) / mu
        h = 0.25 * (np.einsum("qik,qj,ql->qijkl", kinv, n, n)
                    + np.einsum("qjk,qi,ql->qijkl", kinv, n, n)
                    + np.einsum("qil,qj,qk->qijkl", kinv, n, n)
                    + np.einsum("qjl,qi,qk->qijkl", kinv, n, n))
        p_tensor += np.einsum("q,qijkl->ijkl", w, h)
    p_mandel = mandel.tensor4_to_mandel(p_tensor)
    c_ref = mandel.isotropic_stiffness(2.0 * mu * (1.0 + nu), nu)
    return p_mandel @ c_ref
