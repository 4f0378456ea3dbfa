"""Constituent material models.

Linear-elastic glass fiber and a J2 elasto-plastic polymer matrix with
linear-exponential isotropic hardening, integrated by implicit radial return
with a consistent algorithmic tangent.  Default parameters describe a
PA6.6-like matrix with short glass fibers.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from . import mandel
from ._kernels import get_backend

#: Default Newton tolerance on the yield residual, relative to sigma_y.
RM_TOL_REL = 1e-10
RM_MAX_ITER = 50


@dataclass(frozen=True)
class MatrixParams:
    """Elasto-plastic matrix parameters (stress unit MPa)."""
    e_mod: float = 3100.0
    nu: float = 0.35
    sigma_y: float = 25.0
    h_lin: float = 150.0
    h_inf: float = 20.0
    m_exp: float = 325.0

    def __post_init__(self):
        if min(self.e_mod, self.sigma_y, self.h_lin, self.h_inf, self.m_exp) <= 0:
            raise ValueError("matrix parameters must be strictly positive")
        if not -1.0 < self.nu < 0.5:
            raise ValueError("matrix Poisson ratio must lie in (-1, 0.5)")

    @property
    def mu(self):
        return self.e_mod / (2.0 * (1.0 + self.nu))

    @property
    def k_mod(self):
        return self.e_mod / (3.0 * (1.0 - 2.0 * self.nu))

    def as_array(self):
        return np.array([self.e_mod, self.nu, self.sigma_y,
                         self.h_lin, self.h_inf, self.m_exp])

    def elastic_stiffness(self):
        return mandel.isotropic_stiffness(self.e_mod, self.nu)


@dataclass(frozen=True)
class FiberParams:
    """Linear-elastic fiber parameters; aspect_ratio = length/diameter."""
    e_mod: float = 76000.0
    nu: float = 0.22
    aspect_ratio: float = 24.0

    def __post_init__(self):
        if self.e_mod <= 0:
            raise ValueError("fiber modulus must be positive")
        if self.aspect_ratio < 1.0:
            raise ValueError("aspect ratio must be >= 1")

    def stiffness(self):
        return mandel.isotropic_stiffness(self.e_mod, self.nu)


@dataclass(frozen=True)
class MatrixState:
    """Path-dependent state of the matrix phase.

    ``eps_p`` is the (trace-free) plastic strain, ``p`` the accumulated
    plastic strain and ``eps`` the total strain, all in Mandel components.
    """
    eps_p: np.ndarray = field(default_factory=lambda: np.zeros(6))
    p: float = 0.0
    eps: np.ndarray = field(default_factory=lambda: np.zeros(6))


def hardening_stress(p, params):
    """Isotropic hardening stress kappa(p) = H*p + H_inf*(1 - exp(-m*p))."""
    if np.any(np.asarray(p) < 0.0):
        raise ValueError("accumulated plastic strain must be non-negative")
    return params.h_lin * p + params.h_inf * (1.0 - np.exp(-params.m_exp * p))


def hardening_slope(p, params):
    """d kappa / d p."""
    return params.h_lin + params.h_inf * params.m_exp * np.exp(-params.m_exp * p)


def yield_function(sig, p, params):
    """Yield function sigma_eq - (sigma_y + kappa(p)); <= 0 is elastic."""
    return mandel.von_mises(sig) - (params.sigma_y + hardening_stress(p, params))


def return_map(state, deps, params, backend="auto",
               rm_tol_rel=RM_TOL_REL, rm_maxit=RM_MAX_ITER):
    """Advance the matrix state by a strain increment.

    Elastic predictor / radial-return corrector with safeguarded Newton on
    the plastic multiplier.  Returns (sigma, new_state, c_alg) where c_alg
    is the consistent algorithmic tangent (6x6 Mandel).
    """
    deps = np.asarray(deps, dtype=float)
    if not (np.all(np.isfinite(deps)) and np.all(np.isfinite(state.eps_p))
            and np.isfinite(state.p)):
        raise ValueError("non-finite input to return_map")
    kern = get_backend(backend)
    eps_new = state.eps + deps
    eps_el_tr = eps_new - state.eps_p
    out = kern.matrix_update(eps_el_tr, state.p, params.as_array(),
                             rm_tol_rel * params.sigma_y, rm_maxit)
    sigma, eps_el_new, p_new = out[0], out[1], out[2]
    new_state = replace(state, eps_p=eps_new - eps_el_new, p=p_new, eps=eps_new)
    return np.asarray(sigma), new_state, np.asarray(out[3])


def fiber_stress(eps, params):
    """Stress of the linear-elastic fiber phase, sigma = C_F : eps."""
    return params.stiffness() @ np.asarray(eps, dtype=float)
