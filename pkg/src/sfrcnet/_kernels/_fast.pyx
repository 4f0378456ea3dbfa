# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend (mirror of ``pure.py``, operation for operation).

All math on fixed-size C arrays in the Mandel basis; the only Python-level
work is argument conversion in the wrapper functions.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport acosh, exp, fabs, sqrt
from libc.string cimport memcpy, memset

cnp.import_array()

from .pure import KernelError

cdef double SQRT15 = sqrt(1.5)
cdef double SQRT6 = sqrt(6.0)
cdef double MU_FD_REL = 3e-6


# ---------------------------------------------------------------------------
# small dense helpers (6-vectors, 6x6 matrices in row-major double[36])
# ---------------------------------------------------------------------------

cdef inline void mat66_vec(const double* a, const double* x, double* out) noexcept nogil:
    cdef int i, j
    cdef double acc
    for i in range(6):
        acc = 0.0
        for j in range(6):
            acc += a[6 * i + j] * x[j]
        out[i] = acc

cdef inline void mat66_mul(const double* a, const double* b, double* out) noexcept nogil:
    cdef int i, j, k
    cdef double acc
    for i in range(6):
        for j in range(6):
            acc = 0.0
            for k in range(6):
                acc += a[6 * i + k] * b[6 * k + j]
            out[6 * i + j] = acc

cdef inline double vec_dot(const double* a, const double* b) noexcept nogil:
    cdef int i
    cdef double acc = 0.0
    for i in range(6):
        acc += a[i] * b[i]
    return acc

cdef int inv6(const double* a, double* out) noexcept nogil:
    """Gauss-Jordan inverse with partial pivoting; returns 0 on success."""
    cdef double work[36]
    cdef int i, j, k, piv
    cdef double big, tmp, fac
    memcpy(work, a, 36 * sizeof(double))
    memset(out, 0, 36 * sizeof(double))
    for i in range(6):
        out[6 * i + i] = 1.0
    for k in range(6):
        piv = k
        big = fabs(work[6 * k + k])
        for i in range(k + 1, 6):
            if fabs(work[6 * i + k]) > big:
                big = fabs(work[6 * i + k])
                piv = i
        if big == 0.0:
            return -1
        if piv != k:
            for j in range(6):
                tmp = work[6 * k + j]; work[6 * k + j] = work[6 * piv + j]; work[6 * piv + j] = tmp
                tmp = out[6 * k + j]; out[6 * k + j] = out[6 * piv + j]; out[6 * piv + j] = tmp
        fac = 1.0 / work[6 * k + k]
        for j in range(6):
            work[6 * k + j] *= fac
            out[6 * k + j] *= fac
        for i in range(6):
            if i != k:
                fac = work[6 * i + k]
                if fac != 0.0:
                    for j in range(6):
                        work[6 * i + j] -= fac * work[6 * k + j]
                        out[6 * i + j] -= fac * out[6 * k + j]
    return 0


cdef inline double hardening(double p, double h_lin, double h_inf, double m_exp) noexcept nogil:
    return h_lin * p + h_inf * (1.0 - exp(-m_exp * p))

cdef inline double hardening_slope(double p, double h_lin, double h_inf, double m_exp) noexcept nogil:
    return h_lin + h_inf * m_exp * exp(-m_exp * p)

cdef inline double hardening_curvature(double p, double h_inf, double m_exp) noexcept nogil:
    return -h_inf * m_exp * m_exp * exp(-m_exp * p)


# ---------------------------------------------------------------------------
# radial return
# ---------------------------------------------------------------------------

ctypedef struct MatUpd:
    double sigma[6]
    double eps_el[6]
    double calg[36]
    double n_unit[6]
    double p_new
    double dp
    double q_tr
    double hprime
    int plastic
    int iters
    int fail


cdef void elastic_tangent(double k_mod, double mu, double* c_out) noexcept nogil:
    cdef int i, j
    cdef double jv
    for i in range(6):
        for j in range(6):
            jv = (1.0 / 3.0) if (i < 3 and j < 3) else 0.0
            c_out[6 * i + j] = 3.0 * k_mod * jv + 2.0 * mu * ((1.0 if i == j else 0.0) - jv)


cdef void matrix_update_c(const double* eps_el_tr, double p0, const double* mat,
                          double rm_tol, int rm_maxit, MatUpd* out) noexcept nogil:
    cdef double e_mod = mat[0], nu = mat[1], sy = mat[2]
    cdef double h_lin = mat[3], h_inf = mat[4], m_exp = mat[5]
    cdef double mu = e_mod / (2.0 * (1.0 + nu))
    cdef double k_mod = e_mod / (3.0 * (1.0 - 2.0 * nu))
    cdef double tr_e = eps_el_tr[0] + eps_el_tr[1] + eps_el_tr[2]
    cdef double s_tr[6]
    cdef int i, j, it
    cdef double q_tr, phi, s_norm2
    cdef double lo, hi, dp, f_val, slope, dp_new, beta, kdir
    cdef double nn, pd

    out.fail = 0
    for i in range(6):
        s_tr[i] = 2.0 * mu * (eps_el_tr[i] - (tr_e / 3.0 if i < 3 else 0.0))
    s_norm2 = vec_dot(s_tr, s_tr)
    q_tr = sqrt(1.5 * s_norm2)
    phi = q_tr - (sy + hardening(p0, h_lin, h_inf, m_exp))
    out.q_tr = q_tr

    if phi <= rm_tol:
        for i in range(6):
            out.sigma[i] = s_tr[i] + (k_mod * tr_e if i < 3 else 0.0)
            out.eps_el[i] = eps_el_tr[i]
            out.n_unit[i] = 0.0
        elastic_tangent(k_mod, mu, out.calg)
        out.p_new = p0
        out.dp = 0.0
        out.hprime = hardening_slope(p0, h_lin, h_inf, m_exp)
        out.plastic = 0
        out.iters = 0
        return

    lo = 0.0
    hi = phi / (3.0 * mu)
    dp = phi / (3.0 * mu + hardening_slope(p0, h_lin, h_inf, m_exp))
    f_val = 0.0
    for it in range(1, rm_maxit + 1):
        f_val = q_tr - 3.0 * mu * dp - sy - hardening(p0 + dp, h_lin, h_inf, m_exp)
        if fabs(f_val) <= rm_tol:
            break
        if f_val > 0.0:
            lo = dp
        else:
            hi = dp
        slope = -(3.0 * mu + hardening_slope(p0 + dp, h_lin, h_inf, m_exp))
        dp_new = dp - f_val / slope
        if not (lo < dp_new < hi):
            dp_new = 0.5 * (lo + hi)
        dp = dp_new
    else:
        out.fail = 1
        return

    cdef double inv_snorm = 1.0 / sqrt(s_norm2)
    beta = 1.0 - 3.0 * mu * dp / q_tr
    for i in range(6):
        out.n_unit[i] = s_tr[i] * inv_snorm
        out.sigma[i] = beta * s_tr[i] + (k_mod * tr_e if i < 3 else 0.0)
        out.eps_el[i] = eps_el_tr[i] - dp * SQRT15 * out.n_unit[i]
    out.p_new = p0 + dp
    out.dp = dp
    out.iters = it
    out.hprime = hardening_slope(out.p_new, h_lin, h_inf, m_exp)
    out.plastic = 1

    elastic_tangent(k_mod, mu, out.calg)
    cdef double c1 = 6.0 * mu * mu * dp / q_tr
    cdef double c2 = 6.0 * mu * mu / (3.0 * mu + out.hprime)
    for i in range(6):
        for j in range(6):
            pd = ((1.0 if i == j else 0.0)
                  - ((1.0 / 3.0) if (i < 3 and j < 3) else 0.0))
            nn = out.n_unit[i] * out.n_unit[j]
            out.calg[6 * i + j] -= c1 * (pd - nn) + c2 * nn


# ---------------------------------------------------------------------------
# Eshelby tensor (regularized Tandon-Weng forms, axis 1)
# ---------------------------------------------------------------------------

cdef void eshelby_c(double ar, double nu, double* s_out) noexcept nogil:
    cdef double eps = ar - 1.0
    cdef double g, gm, b
    if eps < 1e-3:
        g = (2.0 / 3.0 + (4.0 / 15.0) * eps - (6.0 / 35.0) * eps * eps
             + (32.0 / 315.0) * eps * eps * eps)
        gm = ((4.0 / 15.0 - (6.0 / 35.0) * eps + (32.0 / 315.0) * eps * eps)
              / (2.0 * (1.0 + 0.5 * eps)))
    else:
        b = ar * ar - 1.0
        g = ar / (b * sqrt(b)) * (ar * sqrt(b) - acosh(ar))
        gm = (g - 2.0 / 3.0) / b
    cdef double c = 1.0 - nu
    cdef double n2 = 1.0 - 2.0 * nu
    cdef double s1111 = (n2 * (1.0 - g) + 3.0 - 3.0 * g - 3.0 * gm) / (2.0 * c)
    cdef double s2222 = 3.0 / (8.0 * c) + n2 * g / (4.0 * c) - 9.0 * gm / (16.0 * c)
    cdef double s2233 = (0.5 - n2 * g) / (4.0 * c) - 3.0 * gm / (16.0 * c)
    cdef double s2211 = (-0.5 + (3.0 * g - n2 * g) / 4.0 + 0.75 * gm) / c
    cdef double s1122 = n2 * (g - 1.0) / (2.0 * c) + 0.75 * gm / c
    cdef double s2323 = (0.5 + n2 * g) / (4.0 * c) - 3.0 * gm / (16.0 * c)
    cdef double s1212 = (n2 * (1.0 - 0.5 * g) - 1.0 + 1.5 * g) / (4.0 * c) + 0.75 * gm / c
    memset(s_out, 0, 36 * sizeof(double))
    s_out[0] = s1111
    s_out[7] = s2222
    s_out[14] = s2222
    s_out[8] = s2233
    s_out[13] = s2233
    s_out[6] = s2211
    s_out[12] = s2211
    s_out[1] = s1122
    s_out[2] = s1122
    s_out[21] = 2.0 * s2323
    s_out[28] = 2.0 * s1212
    s_out[35] = 2.0 * s1212


# ---------------------------------------------------------------------------
# orientation-averaged Mori-Tanaka concentration
# ---------------------------------------------------------------------------

cdef int averaged_concentration_c(double mu_iso, double k_el, const double* cf,
                                  double vf, double ar, const double* avg_t,
                                  double* a_out) noexcept nogil:
    cdef double nu_ref = (3.0 * k_el - 2.0 * mu_iso) / (2.0 * (3.0 * k_el + mu_iso))
    cdef double s_esh[36]
    cdef double cm[36]
    cdef double cm_inv[36]
    cdef double dc[36]
    cdef double tmp[36]
    cdef double sys[36]
    cdef double a_dil[36]
    cdef double a_mt[36]
    cdef double coeffs[6]
    cdef int i, j, k
    cdef double jv, dev, c5, c6, c2, c3, c4, c1

    eshelby_c(ar, nu_ref, s_esh)
    for i in range(6):
        for j in range(6):
            jv = (1.0 / 3.0) if (i < 3 and j < 3) else 0.0
            dev = (1.0 if i == j else 0.0) - jv
            cm[6 * i + j] = 3.0 * k_el * jv + 2.0 * mu_iso * dev
            cm_inv[6 * i + j] = jv / (3.0 * k_el) + dev / (2.0 * mu_iso)
            dc[6 * i + j] = cf[6 * i + j] - cm[6 * i + j]
    mat66_mul(cm_inv, dc, tmp)
    mat66_mul(s_esh, tmp, sys)
    for i in range(6):
        sys[6 * i + i] += 1.0
    if inv6(sys, a_dil) != 0:
        return -1
    for i in range(6):
        for j in range(6):
            sys[6 * i + j] = vf * a_dil[6 * i + j] + ((1.0 - vf) if i == j else 0.0)
    if inv6(sys, tmp) != 0:
        return -1
    mat66_mul(a_dil, tmp, a_mt)

    # invariant coefficients of the transversely isotropic operator
    c5 = a_mt[6 * 1 + 2]
    c6 = 0.5 * (a_mt[6 * 1 + 1] - a_mt[6 * 1 + 2])
    c2 = a_mt[6 * 0 + 1] - c5
    c3 = a_mt[6 * 1 + 0] - c5
    c4 = 0.5 * a_mt[6 * 5 + 5] - c6
    c1 = a_mt[6 * 0 + 0] - c2 - c3 - 4.0 * c4 - c5 - 2.0 * c6
    coeffs[0] = c1; coeffs[1] = c2; coeffs[2] = c3
    coeffs[3] = c4; coeffs[4] = c5; coeffs[5] = c6
    for i in range(36):
        a_out[i] = 0.0
        for k in range(6):
            a_out[i] += coeffs[k] * avg_t[36 * k + i]
    return 0


cdef inline double mu_isotropized(double mu, int plastic, double dp,
                                  double q_tr, double hprime) noexcept nogil:
    if not plastic:
        return mu
    return mu - 0.6 * mu * mu * (4.0 * dp / q_tr + 1.0 / (3.0 * mu + hprime))

cdef inline double mu_sensitivity(double mu, double dp, double q_tr,
                                  double hprime, double hsecond) noexcept nogil:
    cdef double t1 = 4.0 * (q_tr / (3.0 * mu + hprime) - dp) / (q_tr * q_tr)
    cdef double t2 = hsecond / ((3.0 * mu + hprime) * (3.0 * mu + hprime)
                                * (3.0 * mu + hprime))
    return -(3.0 * SQRT6 * mu * mu * mu / 5.0) * (t1 - t2)


# ---------------------------------------------------------------------------
# composite step
# ---------------------------------------------------------------------------

ctypedef struct CsEval:
    MatUpd upd
    double mu_iso
    double a_avg[36]
    double g[6]
    double gn


cdef int cs_evaluate(const double* eps_p, double p_acc, const double* eps_m,
                     const double* deps_bar, const double* dm,
                     const double* mat, const double* cf, double vf, double ar,
                     const double* avg_t, double mu_el, double k_el,
                     double rm_tol, int rm_maxit, CsEval* ev) noexcept nogil:
    cdef double eps_el_tr[6]
    cdef double adeps[6]
    cdef int i
    for i in range(6):
        eps_el_tr[i] = eps_m[i] + dm[i] - eps_p[i]
    matrix_update_c(eps_el_tr, p_acc, mat, rm_tol, rm_maxit, &ev.upd)
    if ev.upd.fail:
        return -2
    ev.mu_iso = mu_isotropized(mu_el, ev.upd.plastic, ev.upd.dp, ev.upd.q_tr,
                               ev.upd.hprime)
    if averaged_concentration_c(ev.mu_iso, k_el, cf, vf, ar, avg_t, ev.a_avg) != 0:
        return -1
    mat66_vec(ev.a_avg, deps_bar, adeps)
    ev.gn = 0.0
    for i in range(6):
        ev.g[i] = (1.0 - vf) * dm[i] + vf * adeps[i] - deps_bar[i]
        ev.gn += ev.g[i] * ev.g[i]
    ev.gn = sqrt(ev.gn)
    return 0


cdef int build_u_vec(double mu_iso, double k_el, const double* cf, double vf,
                     double ar, const double* avg_t, const double* deps_bar,
                     double* u_vec) noexcept nogil:
    cdef double a_plus[36]
    cdef double a_minus[36]
    cdef double h_fd = MU_FD_REL * mu_iso
    cdef int i
    if averaged_concentration_c(mu_iso + h_fd, k_el, cf, vf, ar, avg_t, a_plus) != 0:
        return -1
    if averaged_concentration_c(mu_iso - h_fd, k_el, cf, vf, ar, avg_t, a_minus) != 0:
        return -1
    for i in range(36):
        a_plus[i] = (a_plus[i] - a_minus[i]) / (2.0 * h_fd)
    mat66_vec(a_plus, deps_bar, u_vec)
    return 0


cdef int composite_step_c(double* eps_p, double* p_acc, double* eps_m,
                          double* eps_f, const double* deps_bar,
                          const double* mat, const double* cf, double vf,
                          double ar, const double* avg_t, const double* m_el,
                          double rm_tol, int rm_maxit, double fp_tol,
                          int fp_maxit, double* sig_bar, double* c_bar,
                          int* fp_iters, int* plastic_out) noexcept nogil:
    """Returns 0 on success, -1 singular system, -2 return-map failure,
    -3 fixed-point failure."""
    cdef double mu_el = mat[0] / (2.0 * (1.0 + mat[1]))
    cdef double k_el = mat[0] / (3.0 * (1.0 - 2.0 * mat[1]))
    cdef double h_inf = mat[4], m_exp = mat[5]
    cdef CsEval ev, ev_t
    cdef double dm[6]
    cdef double trial[6]
    cdef double delta[6]
    cdef double u_vec[6]
    cdef double v_vec[6]
    cdef double sig_f[6]
    cdef double rhs[36]
    cdef double m_mat[36]
    cdef double vrow[6]
    cdef double mtv[6]
    cdef double damping = 1.0
    cdef double denom, s_v, hsecond, vg
    cdef int i, j, rc, evals
    cdef double eps_el_tr[6]

    if vf == 0.0:
        for i in range(6):
            eps_el_tr[i] = eps_m[i] + deps_bar[i] - eps_p[i]
        matrix_update_c(eps_el_tr, p_acc[0], mat, rm_tol, rm_maxit, &ev.upd)
        if ev.upd.fail:
            return -2
        for i in range(6):
            eps_m[i] += deps_bar[i]
            eps_p[i] = eps_m[i] - ev.upd.eps_el[i]
            sig_bar[i] = ev.upd.sigma[i]
        p_acc[0] = ev.upd.p_new
        memcpy(c_bar, ev.upd.calg, 36 * sizeof(double))
        fp_iters[0] = 0
        plastic_out[0] = ev.upd.plastic
        return 0

    mat66_vec(m_el, deps_bar, dm)
    rc = cs_evaluate(eps_p, p_acc[0], eps_m, deps_bar, dm, mat, cf, vf, ar,
                     avg_t, mu_el, k_el, rm_tol, rm_maxit, &ev)
    if rc != 0:
        return rc
    evals = 0
    while ev.gn > fp_tol:
        if evals >= fp_maxit:
            return -3
        evals += 1
        if ev.upd.plastic:
            if build_u_vec(ev.mu_iso, k_el, cf, vf, ar, avg_t, deps_bar, u_vec) != 0:
                return -1
            hsecond = hardening_curvature(ev.upd.p_new, h_inf, m_exp)
            s_v = mu_sensitivity(mu_el, ev.upd.dp, ev.upd.q_tr, ev.upd.hprime,
                                 hsecond)
            for i in range(6):
                v_vec[i] = s_v * ev.upd.n_unit[i]
            denom = (1.0 - vf) + vf * vec_dot(v_vec, u_vec)
            vg = vec_dot(v_vec, ev.g)
            for i in range(6):
                delta[i] = -(ev.g[i] - vf * u_vec[i] * (vg / denom)) / (1.0 - vf)
        else:
            for i in range(6):
                delta[i] = -ev.g[i] / (1.0 - vf)
        for i in range(6):
            trial[i] = dm[i] + damping * delta[i]
        rc = cs_evaluate(eps_p, p_acc[0], eps_m, deps_bar, trial, mat, cf, vf,
                         ar, avg_t, mu_el, k_el, rm_tol, rm_maxit, &ev_t)
        if rc != 0:
            return rc
        if ev_t.gn < ev.gn:
            memcpy(dm, trial, 6 * sizeof(double))
            ev = ev_t
            if damping < 0.5:
                damping = 2.0 * damping
            else:
                damping = 1.0
        else:
            damping *= 0.5
            if damping < 1.0 / 64.0:
                memcpy(dm, trial, 6 * sizeof(double))
                ev = ev_t
                damping = 1.0

    # commit
    for i in range(6):
        eps_m[i] += dm[i]
        eps_p[i] = eps_m[i] - ev.upd.eps_el[i]
    p_acc[0] = ev.upd.p_new
    mat66_vec(ev.a_avg, deps_bar, delta)          # reuse: deps_f
    for i in range(6):
        eps_f[i] += delta[i]
    mat66_vec(cf, eps_f, sig_f)
    for i in range(6):
        sig_bar[i] = vf * sig_f[i] + (1.0 - vf) * ev.upd.sigma[i]

    # tangent of the converged update
    if ev.upd.plastic:
        if build_u_vec(ev.mu_iso, k_el, cf, vf, ar, avg_t, deps_bar, u_vec) != 0:
            return -1
        hsecond = hardening_curvature(ev.upd.p_new, h_inf, m_exp)
        s_v = mu_sensitivity(mu_el, ev.upd.dp, ev.upd.q_tr, ev.upd.hprime,
                             hsecond)
        for i in range(6):
            v_vec[i] = s_v * ev.upd.n_unit[i]
        denom = (1.0 - vf) + vf * vec_dot(v_vec, u_vec)
        for i in range(6):
            for j in range(6):
                rhs[6 * i + j] = ((1.0 if i == j else 0.0)
                                 - vf * ev.a_avg[6 * i + j])
        # vrow = v^T rhs
        for j in range(6):
            vrow[j] = 0.0
            for i in range(6):
                vrow[j] += v_vec[i] * rhs[6 * i + j]
        for i in range(6):
            for j in range(6):
                m_mat[6 * i + j] = (rhs[6 * i + j]
                                    - vf * u_vec[i] * vrow[j] / denom) / (1.0 - vf)
        # mtv = M^T v
        for j in range(6):
            mtv[j] = 0.0
            for i in range(6):
                mtv[j] += m_mat[6 * i + j] * v_vec[i]
        for i in range(6):
            for j in range(6):
                rhs[6 * i + j] = ev.a_avg[6 * i + j] + u_vec[i] * mtv[j]
        mat66_mul(cf, rhs, c_bar)
        mat66_mul(ev.upd.calg, m_mat, rhs)
        for i in range(36):
            c_bar[i] = vf * c_bar[i] + (1.0 - vf) * rhs[i]
    else:
        for i in range(6):
            for j in range(6):
                m_mat[6 * i + j] = ((1.0 if i == j else 0.0)
                                    - vf * ev.a_avg[6 * i + j]) / (1.0 - vf)
        mat66_mul(cf, ev.a_avg, c_bar)
        mat66_mul(ev.upd.calg, m_mat, rhs)
        for i in range(36):
            c_bar[i] = vf * c_bar[i] + (1.0 - vf) * rhs[i]

    fp_iters[0] = evals
    plastic_out[0] = ev.upd.plastic
    return 0


cdef void raise_rc(int rc, str where):
    if rc == -1:
        raise KernelError(f"{where}: singular Mori-Tanaka concentration system")
    if rc == -2:
        raise KernelError(f"{where}: return mapping did not converge")
    if rc == -3:
        raise KernelError(f"{where}: composite fixed point did not converge")
    if rc != 0:
        raise KernelError(f"{where}: kernel failure code {rc}")


# ---------------------------------------------------------------------------
# python-visible wrappers (same signatures as the pure backend)
# ---------------------------------------------------------------------------

def eshelby_ud(double ar, double nu):
    if ar < 1.0:
        raise ValueError("aspect ratio must be >= 1 (oblate not supported)")
    out = np.empty((6, 6))
    cdef double[:, ::1] mv = out
    eshelby_c(ar, nu, &mv[0, 0])
    return out


def matrix_update(eps_el_tr, double p0, mat, double rm_tol, int rm_maxit):
    cdef double[::1] e = np.ascontiguousarray(eps_el_tr, dtype=np.float64)
    cdef double[::1] m = np.ascontiguousarray(mat, dtype=np.float64)
    cdef MatUpd upd
    matrix_update_c(&e[0], p0, &m[0], rm_tol, rm_maxit, &upd)
    if upd.fail:
        raise KernelError(
            f"return mapping did not converge after {rm_maxit} iterations "
            f"(q_trial={upd.q_tr:.6g}, p={p0:.6g})")
    sigma = np.empty(6); eps_el = np.empty(6); calg = np.empty((6, 6))
    n_unit = np.empty(6)
    cdef double[::1] sv = sigma
    cdef double[::1] ev = eps_el
    cdef double[:, ::1] cv = calg
    cdef double[::1] nv = n_unit
    memcpy(&sv[0], upd.sigma, 6 * sizeof(double))
    memcpy(&ev[0], upd.eps_el, 6 * sizeof(double))
    memcpy(&cv[0, 0], upd.calg, 36 * sizeof(double))
    memcpy(&nv[0], upd.n_unit, 6 * sizeof(double))
    return (sigma, eps_el, upd.p_new, calg, bool(upd.plastic), upd.iters,
            upd.dp, upd.q_tr, n_unit, upd.hprime)


def matrix_path(eps_path, mat, double rm_tol, int rm_maxit):
    cdef double[:, ::1] path = np.ascontiguousarray(eps_path, dtype=np.float64)
    cdef double[::1] m = np.ascontiguousarray(mat, dtype=np.float64)
    cdef int n_rows = path.shape[0]
    sig = np.zeros((n_rows, 6))
    cdef double[:, ::1] sv = sig
    cdef double eps_p[6]
    cdef double eps_el_tr[6]
    cdef double p_acc = 0.0
    cdef MatUpd upd
    cdef int k, i
    memset(eps_p, 0, 6 * sizeof(double))
    for k in range(1, n_rows):
        for i in range(6):
            eps_el_tr[i] = path[k, i] - eps_p[i]
        matrix_update_c(eps_el_tr, p_acc, &m[0], rm_tol, rm_maxit, &upd)
        if upd.fail:
            raise KernelError(f"return mapping did not converge at row {k}")
        for i in range(6):
            sv[k, i] = upd.sigma[i]
            eps_p[i] = path[k, i] - upd.eps_el[i]
        p_acc = upd.p_new
    eps_p_out = np.empty(6)
    cdef double[::1] epv = eps_p_out
    memcpy(&epv[0], eps_p, 6 * sizeof(double))
    return sig, eps_p_out, p_acc


def composite_step(eps_p, double p_acc, eps_m, eps_f, deps_bar, mat, cf,
                   double vf, double ar, avg_t, m_el, double rm_tol,
                   int rm_maxit, double fp_tol, int fp_maxit):
    cdef double[::1] ep = np.array(eps_p, dtype=np.float64)
    cdef double[::1] em = np.array(eps_m, dtype=np.float64)
    cdef double[::1] ef = np.array(eps_f, dtype=np.float64)
    cdef double[::1] de = np.ascontiguousarray(deps_bar, dtype=np.float64)
    cdef double[::1] mv = np.ascontiguousarray(mat, dtype=np.float64)
    cdef double[:, ::1] cfv = np.ascontiguousarray(cf, dtype=np.float64)
    cdef double[:, :, ::1] av = np.ascontiguousarray(avg_t, dtype=np.float64)
    cdef double[:, ::1] mel = np.ascontiguousarray(m_el, dtype=np.float64)
    cdef double p_io = p_acc
    sig_bar = np.empty(6); c_bar = np.empty((6, 6))
    cdef double[::1] sb = sig_bar
    cdef double[:, ::1] cb = c_bar
    cdef int fp_iters = 0, plastic = 0
    cdef int rc = composite_step_c(&ep[0], &p_io, &em[0], &ef[0], &de[0],
                                   &mv[0], &cfv[0, 0], vf, ar, &av[0, 0, 0],
                                   &mel[0, 0], rm_tol, rm_maxit, fp_tol,
                                   fp_maxit, &sb[0], &cb[0, 0], &fp_iters,
                                   &plastic)
    raise_rc(rc, "composite_step")
    return (sig_bar, np.asarray(ep), p_io, np.asarray(em), np.asarray(ef),
            c_bar, fp_iters, bool(plastic))


def composite_path(eps_bar_path, mat, cf, double vf, double ar, avg_t, m_el,
                   double rm_tol, int rm_maxit, double fp_tol, int fp_maxit):
    cdef double[:, ::1] path = np.ascontiguousarray(eps_bar_path, dtype=np.float64)
    cdef double[::1] mv = np.ascontiguousarray(mat, dtype=np.float64)
    cdef double[:, ::1] cfv = np.ascontiguousarray(cf, dtype=np.float64)
    cdef double[:, :, ::1] av = np.ascontiguousarray(avg_t, dtype=np.float64)
    cdef double[:, ::1] mel = np.ascontiguousarray(m_el, dtype=np.float64)
    cdef int n_rows = path.shape[0]
    sig = np.zeros((n_rows, 6))
    cdef double[:, ::1] sv = sig
    cdef double eps_p[6]
    cdef double eps_m[6]
    cdef double eps_f[6]
    cdef double deps[6]
    cdef double c_bar[36]
    cdef double p_acc = 0.0
    cdef int k, i, rc, fp_iters = 0, plastic = 0
    memset(eps_p, 0, 6 * sizeof(double))
    memset(eps_m, 0, 6 * sizeof(double))
    memset(eps_f, 0, 6 * sizeof(double))
    for k in range(1, n_rows):
        for i in range(6):
            deps[i] = path[k, i] - path[k - 1, i]
        rc = composite_step_c(eps_p, &p_acc, eps_m, eps_f, deps, &mv[0],
                              &cfv[0, 0], vf, ar, &av[0, 0, 0], &mel[0, 0],
                              rm_tol, rm_maxit, fp_tol, fp_maxit,
                              &sv[k, 0], c_bar, &fp_iters, &plastic)
        if rc != 0:
            raise_rc(rc, f"composite_path row {k}")
    eps_p_o = np.empty(6); eps_m_o = np.empty(6); eps_f_o = np.empty(6)
    cdef double[::1] a1 = eps_p_o
    cdef double[::1] a2 = eps_m_o
    cdef double[::1] a3 = eps_f_o
    memcpy(&a1[0], eps_p, 6 * sizeof(double))
    memcpy(&a2[0], eps_m, 6 * sizeof(double))
    memcpy(&a3[0], eps_f, 6 * sizeof(double))
    return sig, eps_p_o, p_acc, eps_m_o, eps_f_o
