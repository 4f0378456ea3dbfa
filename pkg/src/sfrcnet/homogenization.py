"""Incremental mean-field Mori-Tanaka homogenization.

The matrix phase is integrated by radial return; its algorithmic tangent is
isotropized (spectral projection) and drives the Eshelby/Mori-Tanaka strain
concentration, orientation-averaged over the fiber distribution.  A mixed
strain/stress control driver solves free strain components for zero stress.

Stress/strain series cross the module boundary in plain components
(11, 22, 33, 23, 13, 12); everything internal is Mandel.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from . import mandel
from .materials import MatrixParams, MatrixState
from .orientation import Microstructure, average_basis
from ._kernels import KernelError, get_backend
from ._kernels import pure as _pure

#: Zero-stress tolerance of the mixed-control driver, relative to sigma_y.
CONTROL_TOL_REL = 1e-6
CONTROL_MAX_ITER = 30


@dataclass(frozen=True)
class Spheroid:
    """Prolate spheroidal inclusion and the isotropic reference medium."""
    aspect_ratio: float
    k_ref: float = None
    mu_ref: float = None

    def __post_init__(self):
        if self.aspect_ratio < 1.0:
            raise ValueError("aspect ratio must be >= 1")

    @property
    def nu_ref(self):
        k, mu = self.k_ref, self.mu_ref
        return (3.0 * k - 2.0 * mu) / (2.0 * (3.0 * k + mu))


@dataclass(frozen=True)
class HomogenizerOptions:
    isotropization: str = "general"   # "general" or "eshelby_only"
    rm_tol_rel: float = 1e-10
    rm_max_iter: int = 50
    fp_tol: float = 1e-13
    fp_max_iter: int = 100
    backend: str = "auto"

    def __post_init__(self):
        if self.isotropization not in ("general", "eshelby_only"):
            raise ValueError("isotropization must be 'general' or 'eshelby_only'")


@dataclass(frozen=True)
class CompositeState:
    """Per-increment state of the two-phase material point."""
    matrix: MatrixState = field(default_factory=MatrixState)
    eps_f: np.ndarray = field(default_factory=lambda: np.zeros(6))
    eps_bar: np.ndarray = field(default_factory=lambda: np.zeros(6))
    sig_bar: np.ndarray = field(default_factory=lambda: np.zeros(6))


def eshelby(spheroid, nu_ref=None):
    """Eshelby tensor (6x6 Mandel) of a prolate spheroid aligned with axis 1.

    ``spheroid`` may be a :class:`Spheroid` or a bare aspect ratio.
    """
    if isinstance(spheroid, Spheroid):
        ar = spheroid.aspect_ratio
        if nu_ref is None:
            nu_ref = spheroid.nu_ref
    else:
        ar = float(spheroid)
        if ar < 1.0:
            raise ValueError("aspect ratio must be >= 1")
    if not -1.0 < nu_ref < 0.5:
        raise ValueError("reference Poisson ratio must lie in (-1, 0.5)")
    return _pure.eshelby_ud(ar, nu_ref)


def isotropize(c):
    """Isotropic (spectral) projection of a fourth-order tensor.

    K = (I (x) I :: C)/9 and mu = (C :: I_dev)/10; idempotent on isotropic
    input.  Returns the projected 6x6 Mandel matrix; use
    :func:`isotropic_moduli` for the scalars.
    """
    k_mod, mu = isotropic_moduli(c)
    return mandel.stiffness_from_moduli(k_mod, mu)


def isotropic_moduli(c):
    """Bulk and shear modulus of the isotropic projection of ``c``."""
    c = np.asarray(c, dtype=float)
    k_mod = mandel.IDENTITY2 @ c @ mandel.IDENTITY2 / 9.0
    mu = (np.trace(c) - 3.0 * k_mod) / 10.0
    return float(k_mod), float(mu)


def mt_concentration_ud(c_m, c_f, vf, spheroid):
    """Unidirectional Mori-Tanaka strain concentration of the fiber phase.

    A_MT = A_dil [(1-vf) I + vf A_dil]^-1 with the dilute concentration
    A_dil = [I + S C_m^-1 (C_f - C_m)]^-1; ``c_m`` must be isotropic.
    """
    c_m = np.asarray(c_m, dtype=float)
    c_iso = isotropize(c_m)
    if np.abs(c_m - c_iso).max() > 1e-8 * np.abs(c_m).max():
        raise ValueError("matrix tangent must be isotropic")
    k_mod, mu = isotropic_moduli(c_m)
    nu_ref = (3.0 * k_mod - 2.0 * mu) / (2.0 * (3.0 * k_mod + mu))
    ar = spheroid.aspect_ratio if isinstance(spheroid, Spheroid) else float(spheroid)
    s_esh = _pure.eshelby_ud(ar, nu_ref)
    cm_inv = (mandel.VOL_PROJECTOR / (3.0 * k_mod)
              + mandel.DEV_PROJECTOR / (2.0 * mu))
    try:
        a_dil = np.linalg.solve(np.eye(6) + s_esh @ cm_inv @ (c_f - c_m), np.eye(6))
        return a_dil @ np.linalg.solve((1.0 - vf) * np.eye(6) + vf * a_dil, np.eye(6))
    except np.linalg.LinAlgError as exc:
        raise KernelError(f"singular Mori-Tanaka concentration system: {exc}") from exc


def mt_tangent_ud(c_m, c_f, vf, spheroid):
    """Unidirectional MT tangent C_m + vf (C_f - C_m) A_MT (axis-1 aligned)."""
    if not 0.0 <= vf < 1.0 + 1e-12:
        raise ValueError("volume fraction must lie in [0, 1]")
    if vf == 0.0:
        return np.asarray(c_m, dtype=float).copy()
    a_mt = mt_concentration_ud(c_m, c_f, vf, spheroid)
    return c_m + vf * (c_f - c_m) @ a_mt


class MeanField:
    """Driver bundling a microstructure, matrix parameters and options.

    Precomputes the orientation-average basis and the elastic concentration
    once; steps and paths then run through the selected kernel backend.
    """

    def __init__(self, micro, matrix=None, options=None):
        if not isinstance(micro, Microstructure):
            raise TypeError("micro must be a Microstructure")
        self.micro = micro
        self.matrix = matrix if matrix is not None else MatrixParams()
        self.options = options if options is not None else HomogenizerOptions()
        self._kern = get_backend(self.options.backend)
        self._mat = self.matrix.as_array()
        self._cf = micro.fiber.stiffness()
        self._ar = micro.fiber.aspect_ratio
        self._avg_t = average_basis(micro.a)
        vf = micro.vf
        if vf > 0.0:
            a_el = _pure._averaged_concentration(
                self.matrix.mu, self.matrix.k_mod, self._cf, vf, self._ar,
                self._avg_t)
            self._m_el = (np.eye(6) - vf * a_el) / (1.0 - vf)
            self.elastic_stiffness = (vf * self._cf @ a_el
                                      + (1.0 - vf) * self.matrix.elastic_stiffness()
                                      @ self._m_el)
        else:
            self._m_el = np.eye(6)
            self.elastic_stiffness = self.matrix.elastic_stiffness()
        self._rm_tol = self.options.rm_tol_rel * self.matrix.sigma_y
        if self.options.isotropization == "eshelby_only":
            self._setup_eshelby_only()

    # -- single increment ---------------------------------------------------

    def step(self, state, deps_bar):
        """Advance by a macro strain increment (Mandel).

        Returns (sig_bar, new_state, c_bar) with the algorithmic tangent of
        the discrete update.
        """
        deps_bar = np.asarray(deps_bar, dtype=float)
        if not np.all(np.isfinite(deps_bar)):
            raise ValueError("non-finite strain increment")
        opt = self.options
        if opt.isotropization == "eshelby_only":
            return self._step_eshelby_only(state, deps_bar)
        out = self._kern.composite_step(
            state.matrix.eps_p, state.matrix.p, state.matrix.eps, state.eps_f,
            deps_bar, self._mat, self._cf, self.micro.vf, self._ar,
            self._avg_t, self._m_el, self._rm_tol, opt.rm_max_iter,
            opt.fp_tol, opt.fp_max_iter)
        sig_bar, eps_p, p_acc, eps_m, eps_f, c_bar = (
            np.asarray(out[0]), np.asarray(out[1]), out[2], np.asarray(out[3]),
            np.asarray(out[4]), np.asarray(out[5]))
        new_state = CompositeState(
            matrix=MatrixState(eps_p=eps_p, p=p_acc, eps=eps_m),
            eps_f=eps_f, eps_bar=state.eps_bar + deps_bar, sig_bar=sig_bar)
        return sig_bar, new_state, c_bar

    # -- strain-controlled path (hot path used by dataset generation) -------

    def run_path(self, eps_plain):
        """Integrate a fully strain-controlled path.

        ``eps_plain``: (n_rows, 6) plain strain components, row 0 at the
        origin.  Returns the (n_rows, 6) plain stress series.
        """
        eps_plain = np.asarray(eps_plain, dtype=float)
        if eps_plain.ndim != 2 or eps_plain.shape[1] != 6:
            raise ValueError("strain path must have shape (n, 6)")
        if not np.all(np.isfinite(eps_plain)):
            raise ValueError("non-finite strain path")
        eps_mandel = mandel.from_plain(eps_plain)
        opt = self.options
        if opt.isotropization == "eshelby_only":
            state = CompositeState()
            sig = np.zeros_like(eps_mandel)
            for k in range(1, eps_mandel.shape[0]):
                deps = eps_mandel[k] - eps_mandel[k - 1]
                sig[k], state, _ = self._step_eshelby_only(state, deps)
            return mandel.to_plain(sig)
        out = self._kern.composite_path(
            eps_mandel, self._mat, self._cf, self.micro.vf, self._ar,
            self._avg_t, self._m_el, self._rm_tol, opt.rm_max_iter,
            opt.fp_tol, opt.fp_max_iter)
        return mandel.to_plain(np.asarray(out[0]))

    # -- mixed strain/stress control -----------------------------------------

    def run_program(self, program):
        """Run a mixed-control load program.

        Imposed strain components follow the program exactly; the remaining
        components are solved by Newton iteration with the algorithmic
        tangent so their stresses vanish within CONTROL_TOL_REL*sigma_y.
        Returns (t, eps_plain, sig_plain).
        """
        program.validate()
        n_rows = program.n_rows
        imposed = program.imposed_mandel()
        free = program.free_components
        tol = CONTROL_TOL_REL * self.matrix.sigma_y

        eps = np.zeros((n_rows, 6))
        sig = np.zeros((n_rows, 6))
        state = CompositeState()
        free_guess = np.zeros(len(free))
        for k in range(1, n_rows):
            deps = np.zeros(6)
            for idx, series in imposed.items():
                deps[idx] = series[k] - eps[k - 1, idx]
            if free:
                deps[free] = free_guess
                sig_k, new_state, c_bar = self.step(state, deps)
                it = 0
                while True:
                    resid = mandel.to_plain(sig_k)[free]
                    if np.abs(resid).max() <= tol:
                        break
                    it += 1
                    if it > CONTROL_MAX_ITER:
                        raise KernelError(
                            f"mixed control did not converge at step {k}: "
                            f"|sigma_free|={np.abs(resid).max():.3e} MPa")
                    jac = c_bar[np.ix_(free, free)]
                    delta = np.linalg.solve(jac, -sig_k[free])
                    deps[free] += delta
                    sig_k, new_state, c_bar = self.step(state, deps)
                free_guess = deps[free]
            else:
                sig_k, new_state, _ = self.step(state, deps)
            state = new_state
            eps[k] = state.eps_bar
            sig[k] = sig_k
        t = np.linspace(0.0, 1.0, n_rows)
        return t, mandel.to_plain(eps), mandel.to_plain(sig)

    # -- eshelby-only isotropization (study mode) ----------------------------

    def _setup_eshelby_only(self):
        eig, vecs = np.linalg.eigh(self.micro.a)
        if eig[-1] < 1.0 - 1e-9:
            raise ValueError(
                "eshelby_only isotropization is only supported for uniaxial "
                "fiber orientations (single-orientation composites)")
        axis = vecs[:, 2]
        # rotation taking the fiber axis onto axis 1
        e1 = np.array([1.0, 0.0, 0.0])
        v = np.cross(axis, e1)
        s, c = np.linalg.norm(v), float(axis @ e1)
        if s < 1e-12:
            rot = np.eye(3) if c > 0 else np.diag([-1.0, -1.0, 1.0])
        else:
            vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
            rot = np.eye(3) + vx + vx @ vx * ((1 - c) / (s * s))
        self._q_fiber = mandel.rotation_operator(rot)

    def _step_eshelby_only(self, state, deps_bar):
        """Fixed-point increment keeping the anisotropic matrix tangent in the
        concentration equations; the isotropized moduli enter only the
        Eshelby tensor.  Tangent is the mean-field operator (approximate)."""
        opt = self.options
        vf = self.micro.vf
        q = self._q_fiber
        m_state = state.matrix
        deps_m = self._m_el @ deps_bar
        upd = None
        for _ in range(opt.fp_max_iter):
            eps_el_tr = m_state.eps + deps_m - m_state.eps_p
            upd = self._kern.matrix_update(eps_el_tr, m_state.p, self._mat,
                                           self._rm_tol, opt.rm_max_iter)
            c_alg = np.asarray(upd[3])
            _, mu_iso = isotropic_moduli(c_alg)
            nu_ref = ((3.0 * self.matrix.k_mod - 2.0 * mu_iso)
                      / (2.0 * (3.0 * self.matrix.k_mod + mu_iso)))
            s_esh = _pure.eshelby_ud(self._ar, nu_ref)
            c_m = q @ c_alg @ q.T  # matrix tangent in the fiber frame
            a_dil = np.linalg.solve(
                np.eye(6) + s_esh @ np.linalg.solve(c_m, self._cf - c_m), np.eye(6))
            a_mt = a_dil @ np.linalg.solve(
                (1.0 - vf) * np.eye(6) + vf * a_dil, np.eye(6))
            a_glob = q.T @ a_mt @ q
            deps_f = a_glob @ deps_bar
            deps_m_new = (deps_bar - vf * deps_f) / (1.0 - vf)
            if np.linalg.norm(deps_m_new - deps_m) <= max(opt.fp_tol, 1e-12):
                deps_m = deps_m_new
                break
            deps_m = 0.5 * (deps_m + deps_m_new)
        else:
            raise KernelError("eshelby_only fixed point did not converge")
        sigma_m, eps_el_new, p_new = np.asarray(upd[0]), np.asarray(upd[1]), upd[2]
        c_alg = np.asarray(upd[3])
        eps_m_new = m_state.eps + deps_m
        eps_f_new = state.eps_f + a_glob @ deps_bar
        sig_bar = vf * (self._cf @ eps_f_new) + (1.0 - vf) * sigma_m
        c_bar = q.T @ (c_m + vf * (self._cf - c_m) @ a_mt) @ q
        new_state = CompositeState(
            matrix=MatrixState(eps_p=eps_m_new - eps_el_new, p=p_new, eps=eps_m_new),
            eps_f=eps_f_new, eps_bar=state.eps_bar + deps_bar, sig_bar=sig_bar)
        return sig_bar, new_state, c_bar


@dataclass(frozen=True)
class LoadProgram:
    """Mixed-control load program over a pseudo-time grid.

    ``imposed`` maps component indices (plain order 11, 22, 33, 23, 13, 12)
    to strain value series of equal length starting at 0; every other
    component is driven to zero stress.
    """
    imposed: dict
    n_rows: int

    COMPONENTS = ("eps11", "eps22", "eps33", "eps23", "eps13", "eps12")

    def validate(self):
        if not self.imposed:
            raise ValueError("at least one strain-controlled component required")
        for idx, series in self.imposed.items():
            if not 0 <= idx < 6:
                raise ValueError(f"component index {idx} out of range")
            if len(series) != self.n_rows:
                raise ValueError("all imposed series must have equal length")
            if abs(series[0]) > 0.0:
                raise ValueError("imposed series must start at 0")
        return self

    @property
    def free_components(self):
        return [i for i in range(6) if i not in self.imposed]

    def imposed_mandel(self):
        """Imposed series converted to Mandel scaling."""
        out = {}
        for idx, series in self.imposed.items():
            arr = np.asarray(series, dtype=float)
            out[idx] = arr * (mandel.SQRT2 if idx >= 3 else 1.0)
        return out


def cycle_series(eps_c, n_steps):
    """Piecewise-linear cycle 0 -> eps_c -> -eps_c -> 0 with n_steps steps.

    Quarter/half/quarter step split; returns n_steps+1 values.
    """
    q = max(n_steps // 4, 1)
    seg1 = np.linspace(0.0, eps_c, q + 1)
    seg2 = np.linspace(eps_c, -eps_c, 2 * q + 1)[1:]
    seg3 = np.linspace(-eps_c, 0.0, q + 1)[1:]
    return np.concatenate([seg1, seg2, seg3])


def cycle_program(components, eps_c, n_steps, cycles=1):
    """Load cycles on the given components (all with amplitude ``eps_c``)."""
    one = cycle_series(eps_c, n_steps)
    series = np.concatenate([one] + [one[1:]] * (cycles - 1)) if cycles > 1 else one
    imposed = {idx: series.copy() for idx in components}
    return LoadProgram(imposed=imposed, n_rows=len(series)).validate()


def ramp_program(targets, n_steps):
    """Monotonic ramps from 0 to target value per component index."""
    imposed = {idx: np.linspace(0.0, val, n_steps + 1)
               for idx, val in targets.items()}
    return LoadProgram(imposed=imposed, n_rows=n_steps + 1).validate()
