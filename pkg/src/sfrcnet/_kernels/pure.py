"""Numpy implementation of the hot kernels.

This is the reference backend; ``_fast`` (Cython) mirrors it operation for
operation.  Everything works on Mandel 6-vectors / 6x6 matrices.

Kernels:

* ``matrix_update``   -- one radial-return increment of the J2 matrix.
* ``matrix_path``     -- strain-driven integration of a matrix-only path.
* ``composite_step``  -- one increment of the incremental Mori-Tanaka scheme
  (isotropized matrix tangent, orientation-averaged concentration), with the
  exact algorithmic tangent of the discrete update.
* ``composite_path``  -- strain-driven integration of a composite path.

Material parameter layout ``mat``: (E, nu, sigma_y, H, H_inf, m).
"""
import numpy as np

from ..mandel import DEV_PROJECTOR, IDENTITY2, VOL_PROJECTOR

_SQRT15 = np.sqrt(1.5)
_SQRT6 = np.sqrt(6.0)

# Relative step for the scalar finite difference d<A>/d(mu_iso); the map is
# smooth and closed-form, so the truncation error is ~1e-12 relative.
_MU_FD_REL = 3e-6


class KernelError(RuntimeError):
    """Raised when an iterative kernel fails to converge."""


def hardening(p, h_lin, h_inf, m_exp):
    """Hardening stress H*p + H_inf*(1 - exp(-m*p))."""
    return h_lin * p + h_inf * (1.0 - np.exp(-m_exp * p))


def hardening_slope(p, h_lin, h_inf, m_exp):
    return h_lin + h_inf * m_exp * np.exp(-m_exp * p)


def hardening_curvature(p, h_lin, h_inf, m_exp):
    return -h_inf * m_exp * m_exp * np.exp(-m_exp * p)


def matrix_update(eps_el_tr, p0, mat, rm_tol, rm_maxit):
    """Radial-return update from a trial elastic strain.

    Parameters
    ----------
    eps_el_tr : (6,) Mandel trial elastic strain (old elastic strain + d_eps).
    p0 : accumulated plastic strain at the start of the increment.
    mat : (E, nu, sigma_y, H, H_inf, m).
    rm_tol : absolute tolerance on the yield residual (MPa).
    rm_maxit : Newton iteration cap.

    Returns
    -------
    (sigma, eps_el_new, p_new, c_alg, plastic, iters, dp, q_tr, n_unit, hprime)
    with ``n_unit`` the unit deviatoric trial direction (zero vector in the
    elastic branch) and ``hprime`` the hardening slope at the updated state.
    """
    e_mod, nu, sy, h_lin, h_inf, m_exp = mat
    mu = e_mod / (2.0 * (1.0 + nu))
    k_mod = e_mod / (3.0 * (1.0 - 2.0 * nu))

    tr_e = eps_el_tr[0] + eps_el_tr[1] + eps_el_tr[2]
    s_tr = 2.0 * mu * (eps_el_tr - (tr_e / 3.0) * IDENTITY2)
    q_tr = np.sqrt(1.5 * np.dot(s_tr, s_tr))
    phi = q_tr - (sy + hardening(p0, h_lin, h_inf, m_exp))

    c_el = 3.0 * k_mod * VOL_PROJECTOR + 2.0 * mu * DEV_PROJECTOR
    if phi <= rm_tol:
        sigma = s_tr + k_mod * tr_e * IDENTITY2
        hprime = hardening_slope(p0, h_lin, h_inf, m_exp)
        return (sigma, eps_el_tr.copy(), p0, c_el, False, 0,
                0.0, q_tr, np.zeros(6), hprime)

    # Safeguarded Newton on f(dp) = q_tr - 3*mu*dp - sy - kappa(p0+dp),
    # monotonically decreasing with a guaranteed bracket [0, hi].
    lo = 0.0
    hi = phi / (3.0 * mu)
    dp = phi / (3.0 * mu + hardening_slope(p0, h_lin, h_inf, m_exp))
    iters = 0
    f_val = np.inf
    for iters in range(1, rm_maxit + 1):
        f_val = q_tr - 3.0 * mu * dp - sy - hardening(p0 + dp, h_lin, h_inf, m_exp)
        if abs(f_val) <= rm_tol:
            break
        if f_val > 0.0:
            lo = dp
        else:
            hi = dp
        slope = -(3.0 * mu + hardening_slope(p0 + dp, h_lin, h_inf, m_exp))
        dp_new = dp - f_val / slope
        if not lo < dp_new < hi:
            dp_new = 0.5 * (lo + hi)
        dp = dp_new
    else:
        raise KernelError(
            f"return mapping did not converge: residual {f_val:.3e} MPa after "
            f"{rm_maxit} iterations (q_trial={q_tr:.6g}, p={p0:.6g})")

    n_unit = s_tr / np.sqrt(np.dot(s_tr, s_tr))
    s_new = (1.0 - 3.0 * mu * dp / q_tr) * s_tr
    sigma = s_new + k_mod * tr_e * IDENTITY2
    deps_p = dp * _SQRT15 * n_unit
    eps_el_new = eps_el_tr - deps_p
    p_new = p0 + dp
    hprime = hardening_slope(p_new, h_lin, h_inf, m_exp)

    nn = np.outer(n_unit, n_unit)
    c_alg = c_el - 6.0 * mu * mu * (
        dp / q_tr * (DEV_PROJECTOR - nn) + nn / (3.0 * mu + hprime))
    return sigma, eps_el_new, p_new, c_alg, True, iters, dp, q_tr, n_unit, hprime


def matrix_path(eps_path, mat, rm_tol, rm_maxit):
    """Integrate a matrix-only strain path (rows of Mandel strain).

    Returns (sig_path, eps_p_final, p_final).
    """
    eps_path = np.asarray(eps_path, dtype=float)
    n_rows = eps_path.shape[0]
    sig = np.zeros((n_rows, 6))
    eps_p = np.zeros(6)
    p_acc = 0.0
    for k in range(1, n_rows):
        eps_el_tr = eps_path[k] - eps_p
        out = matrix_update(eps_el_tr, p_acc, mat, rm_tol, rm_maxit)
        sig[k] = out[0]
        eps_p = eps_path[k] - out[1]
        p_acc = out[2]
    return sig, eps_p, p_acc


# ---------------------------------------------------------------------------
# Eshelby tensor for a prolate spheroid aligned with axis 1.
#
# The Tandon-Weng closed forms are rewritten so every 1/(ar^2-1) singularity
# is collected in the single regular combination (g - 2/3)/(ar^2 - 1), which
# is evaluated by series near the sphere.  One code path covers ar >= 1.
# ---------------------------------------------------------------------------

def _eshelby_g_terms(ar):
    """Return (g, (g - 2/3)/(ar^2 - 1)) for a prolate aspect ratio ar >= 1."""
    eps = ar - 1.0
    if eps < 1e-3:
        # series in eps = ar - 1 (stable through the sphere limit)
        g = (2.0 / 3.0 + (4.0 / 15.0) * eps - (6.0 / 35.0) * eps * eps
             + (32.0 / 315.0) * eps ** 3)
        gm = ((4.0 / 15.0 - (6.0 / 35.0) * eps + (32.0 / 315.0) * eps * eps)
              / (2.0 * (1.0 + 0.5 * eps)))
    else:
        b = ar * ar - 1.0
        g = ar / b ** 1.5 * (ar * np.sqrt(b) - np.arccosh(ar))
        gm = (g - 2.0 / 3.0) / b
    return g, gm


def eshelby_ud(ar, nu):
    """Eshelby tensor (6x6 Mandel) of a prolate spheroid along axis 1.

    ``ar`` is the aspect ratio (>= 1), ``nu`` the Poisson ratio of the
    isotropic reference medium.
    """
    if ar < 1.0:
        raise ValueError("aspect ratio must be >= 1 (oblate not supported)")
    g, gm = _eshelby_g_terms(ar)
    c = 1.0 - nu
    n2 = 1.0 - 2.0 * nu

    s1111 = (n2 * (1.0 - g) + 3.0 - 3.0 * g - 3.0 * gm) / (2.0 * c)
    s2222 = 3.0 / (8.0 * c) + n2 * g / (4.0 * c) - 9.0 * gm / (16.0 * c)
    s2233 = (0.5 - n2 * g) / (4.0 * c) - 3.0 * gm / (16.0 * c)
    s2211 = (-0.5 + (3.0 * g - n2 * g) / 4.0 + 0.75 * gm) / c
    s1122 = n2 * (g - 1.0) / (2.0 * c) + 0.75 * gm / c
    s2323 = (0.5 + n2 * g) / (4.0 * c) - 3.0 * gm / (16.0 * c)
    s1212 = (n2 * (1.0 - 0.5 * g) - 1.0 + 1.5 * g) / (4.0 * c) + 0.75 * gm / c

    s = np.zeros((6, 6))
    s[0, 0] = s1111
    s[1, 1] = s[2, 2] = s2222
    s[1, 2] = s[2, 1] = s2233
    s[1, 0] = s[2, 0] = s2211
    s[0, 1] = s[0, 2] = s1122
    s[3, 3] = 2.0 * s2323
    s[4, 4] = s[5, 5] = 2.0 * s1212
    return s


# ---------------------------------------------------------------------------
# Incremental Mori-Tanaka step.
# ---------------------------------------------------------------------------

def ti_coefficients(b_mat):
    """Invariant coefficients of a transversely isotropic (axis 1) operator.

    Decomposition basis (p = e1): p4, pp(x)I, I(x)pp, the four-term mixed
    pattern, I(x)I and the symmetric identity.  Six coefficients because
    concentration tensors need not be major-symmetric.
    """
    c5 = b_mat[1, 2]
    c6 = 0.5 * (b_mat[1, 1] - b_mat[1, 2])
    c2 = b_mat[0, 1] - c5
    c3 = b_mat[1, 0] - c5
    c4 = 0.5 * b_mat[5, 5] - c6
    c1 = b_mat[0, 0] - c2 - c3 - 4.0 * c4 - c5 - 2.0 * c6
    return np.array([c1, c2, c3, c4, c5, c6])


def _averaged_concentration(mu_iso, k_el, cf, vf, ar, avg_t):
    """Orientation-averaged MT strain concentration <A> for the fiber phase."""
    nu_ref = (3.0 * k_el - 2.0 * mu_iso) / (2.0 * (3.0 * k_el + mu_iso))
    s_esh = eshelby_ud(ar, nu_ref)
    cm = 3.0 * k_el * VOL_PROJECTOR + 2.0 * mu_iso * DEV_PROJECTOR
    cm_inv = VOL_PROJECTOR / (3.0 * k_el) + DEV_PROJECTOR / (2.0 * mu_iso)
    a_dil = np.linalg.solve(np.eye(6) + s_esh @ cm_inv @ (cf - cm), np.eye(6))
    a_mt = a_dil @ np.linalg.solve((1.0 - vf) * np.eye(6) + vf * a_dil, np.eye(6))
    coeffs = ti_coefficients(a_mt)
    return np.einsum("k,kij->ij", coeffs, avg_t)


def _mu_isotropized(mu, plastic, dp, q_tr, hprime):
    """Shear modulus of the isotropized algorithmic tangent.

    The bulk part of the radial-return tangent is untouched by plastic flow,
    so only the shear modulus changes.
    """
    if not plastic:
        return mu
    return mu - 0.6 * mu * mu * (4.0 * dp / q_tr + 1.0 / (3.0 * mu + hprime))


def _mu_sensitivity(mu, dp, q_tr, hprime, hsecond):
    """d(mu_iso)/d(deps_m) = coefficient * n_unit (plastic branch)."""
    t1 = 4.0 * (q_tr / (3.0 * mu + hprime) - dp) / (q_tr * q_tr)
    t2 = hsecond / (3.0 * mu + hprime) ** 3
    return -(3.0 * _SQRT6 * mu ** 3 / 5.0) * (t1 - t2)


def composite_step(eps_p, p_acc, eps_m, eps_f, deps_bar,
                   mat, cf, vf, ar, avg_t, m_el,
                   rm_tol, rm_maxit, fp_tol, fp_maxit):
    """One strain increment of the incremental Mori-Tanaka update.

    Solves G(deps_m) = (1-vf)*deps_m + vf*<A(deps_m)>:deps_bar - deps_bar = 0
    by Newton iteration; <A> depends on deps_m only through the isotropized
    shear modulus, which makes the Jacobian a rank-one update of the identity
    and yields the exact algorithmic tangent of the converged step.

    Parameters
    ----------
    eps_p, p_acc : matrix plastic strain (Mandel) and accumulated plastic strain.
    eps_m, eps_f : accumulated matrix / fiber phase strains (Mandel).
    deps_bar : macro strain increment (Mandel).
    mat : matrix material parameters (E, nu, sigma_y, H, H_inf, m).
    cf : fiber stiffness (6x6 Mandel).
    vf : fiber volume fraction.
    ar : fiber aspect ratio.
    avg_t : (6, 6, 6) orientation-average basis stack.
    m_el : elastic matrix-strain concentration (I - vf*<A_el>)/(1-vf), used
        as warm start.

    Returns
    -------
    (sig_bar, eps_p', p', eps_m', eps_f', c_bar, fp_iters, plastic)
    """
    e_mod, nu = mat[0], mat[1]
    mu_el = e_mod / (2.0 * (1.0 + nu))
    k_el = e_mod / (3.0 * (1.0 - 2.0 * nu))

    if vf == 0.0:
        eps_el_tr = eps_m + deps_bar - eps_p
        (sigma, eps_el_new, p_new, c_alg, plastic, _it, *_rest) = matrix_update(
            eps_el_tr, p_acc, mat, rm_tol, rm_maxit)
        eps_m_new = eps_m + deps_bar
        return (sigma, eps_m_new - eps_el_new, p_new, eps_m_new, eps_f.copy(),
                c_alg, 0, plastic)

    h_inf, m_exp = mat[4], mat[5]
    deps_m = m_el @ deps_bar

    def evaluate(dm):
        eps_el_tr = eps_m + dm - eps_p
        upd = matrix_update(eps_el_tr, p_acc, mat, rm_tol, rm_maxit)
        plastic, dp, q_tr, n_unit, hprime = upd[4], upd[6], upd[7], upd[8], upd[9]
        mu_iso = _mu_isotropized(mu_el, plastic, dp, q_tr, hprime)
        a_avg = _averaged_concentration(mu_iso, k_el, cf, vf, ar, avg_t)
        g_res = (1.0 - vf) * dm + vf * (a_avg @ deps_bar) - deps_bar
        return upd, mu_iso, a_avg, g_res, float(np.linalg.norm(g_res))

    upd, mu_iso, a_avg, g_res, gn = evaluate(deps_m)
    damping = 1.0
    fp_iters = 0
    u_vec = np.zeros(6)
    v_vec = np.zeros(6)
    while gn > fp_tol:
        if fp_iters >= fp_maxit:
            raise KernelError(
                f"composite step did not converge: |G|={gn:.3e} after "
                f"{fp_maxit} evaluations (|deps_bar|={np.linalg.norm(deps_bar):.3e})")
        fp_iters += 1
        plastic, dp, q_tr, n_unit, hprime = upd[4], upd[6], upd[7], upd[8], upd[9]
        if plastic:
            h_fd = _MU_FD_REL * mu_iso
            a_plus = _averaged_concentration(mu_iso + h_fd, k_el, cf, vf, ar, avg_t)
            a_minus = _averaged_concentration(mu_iso - h_fd, k_el, cf, vf, ar, avg_t)
            u_vec = ((a_plus - a_minus) / (2.0 * h_fd)) @ deps_bar
            hsecond = hardening_curvature(p_acc + dp, 0.0, h_inf, m_exp)
            v_vec = _mu_sensitivity(mu_el, dp, q_tr, hprime, hsecond) * n_unit
            denom = (1.0 - vf) + vf * np.dot(v_vec, u_vec)
            delta = -(g_res - vf * u_vec * (np.dot(v_vec, g_res) / denom)) / (1.0 - vf)
        else:
            delta = -g_res / (1.0 - vf)
        trial = deps_m + damping * delta
        upd_t, mu_t, a_t, g_t, gn_t = evaluate(trial)
        if gn_t < gn:
            deps_m, upd, mu_iso, a_avg, g_res, gn = trial, upd_t, mu_t, a_t, g_t, gn_t
            damping = min(1.0, 2.0 * damping)
        else:
            damping *= 0.5
            if damping < 1.0 / 64.0:
                # forced acceptance keeps the iteration moving through the
                # elastic/plastic switch; the |G| exit criterion still rules
                deps_m, upd, mu_iso, a_avg, g_res, gn = trial, upd_t, mu_t, a_t, g_t, gn_t
                damping = 1.0

    sigma_m, eps_el_new, p_new, c_alg, plastic = upd[0], upd[1], upd[2], upd[3], upd[4]
    dp, q_tr, n_unit, hprime = upd[6], upd[7], upd[8], upd[9]

    eps_m_new = eps_m + deps_m
    eps_p_new = eps_m_new - eps_el_new
    eps_f_new = eps_f + a_avg @ deps_bar
    sig_f = cf @ eps_f_new
    sig_bar = vf * sig_f + (1.0 - vf) * sigma_m

    # exact tangent of the converged update (rank-one corrected)
    if plastic:
        h_fd = _MU_FD_REL * mu_iso
        a_plus = _averaged_concentration(mu_iso + h_fd, k_el, cf, vf, ar, avg_t)
        a_minus = _averaged_concentration(mu_iso - h_fd, k_el, cf, vf, ar, avg_t)
        u_vec = ((a_plus - a_minus) / (2.0 * h_fd)) @ deps_bar
        hsecond = hardening_curvature(p_new, 0.0, h_inf, m_exp)
        v_vec = _mu_sensitivity(mu_el, dp, q_tr, hprime, hsecond) * n_unit
        rhs = np.eye(6) - vf * a_avg
        denom = (1.0 - vf) + vf * np.dot(v_vec, u_vec)
        m_mat = (rhs - vf * np.outer(u_vec, v_vec @ rhs) / denom) / (1.0 - vf)
        c_bar = (vf * cf @ (a_avg + np.outer(u_vec, m_mat.T @ v_vec))
                 + (1.0 - vf) * c_alg @ m_mat)
    else:
        m_mat = (np.eye(6) - vf * a_avg) / (1.0 - vf)
        c_bar = vf * cf @ a_avg + (1.0 - vf) * c_alg @ m_mat

    return (sig_bar, eps_p_new, p_new, eps_m_new, eps_f_new, c_bar,
            fp_iters, plastic)


def composite_path(eps_bar_path, mat, cf, vf, ar, avg_t, m_el,
                   rm_tol, rm_maxit, fp_tol, fp_maxit):
    """Integrate a strain-controlled composite path (rows of Mandel strain).

    Returns (sig_path, eps_p, p, eps_m, eps_f).
    """
    eps_bar_path = np.asarray(eps_bar_path, dtype=float)
    n_rows = eps_bar_path.shape[0]
    sig = np.zeros((n_rows, 6))
    eps_p = np.zeros(6)
    eps_m = np.zeros(6)
    eps_f = np.zeros(6)
    p_acc = 0.0
    for k in range(1, n_rows):
        deps_bar = eps_bar_path[k] - eps_bar_path[k - 1]
        out = composite_step(eps_p, p_acc, eps_m, eps_f, deps_bar,
                             mat, cf, vf, ar, avg_t, m_el,
                             rm_tol, rm_maxit, fp_tol, fp_maxit)
        sig[k], eps_p, p_acc, eps_m, eps_f = out[0], out[1], out[2], out[3], out[4]
    return sig, eps_p, p_acc, eps_m, eps_f
