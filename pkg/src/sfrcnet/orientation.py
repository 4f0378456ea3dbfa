"""Second-order fiber orientation tensors.

Uniform random sampling (eigenvalues from the standard 2-simplex composed
with a uniformly random rotation), validation, the hybrid fourth-order
closure and Advani-Tucker orientation averaging of transversely isotropic
operators.
"""
from dataclasses import dataclass, field

import numpy as np

from . import mandel
from .materials import FiberParams
from ._kernels.pure import ti_coefficients

#: Serialization order of the independent components (Table-style).
COMPONENT_ORDER = ("a11", "a22", "a33", "a12", "a13", "a23")

_EYE3 = np.eye(3)


@dataclass(frozen=True)
class Microstructure:
    """Orientation tensor, fiber volume fraction and fiber parameters."""
    a: np.ndarray
    vf: float
    fiber: FiberParams = field(default_factory=FiberParams)

    def __post_init__(self):
        validate_orientation_tensor(self.a)
        if not 0.0 <= self.vf < 1.0:
            raise ValueError("fiber volume fraction must lie in [0, 1)")


def validate_orientation_tensor(a, tol=1e-10, eig_tol=1e-9):
    """Check symmetry, unit trace and eigenvalues in [0, 1]."""
    a = np.asarray(a, dtype=float)
    if a.shape != (3, 3):
        raise ValueError("orientation tensor must be 3x3")
    if np.abs(a - a.T).max() > tol:
        raise ValueError("orientation tensor must be symmetric")
    if abs(np.trace(a) - 1.0) > tol:
        raise ValueError("orientation tensor trace must be 1")
    eig = np.linalg.eigvalsh(a)
    if eig[0] < -eig_tol or eig[-1] > 1.0 + eig_tol:
        raise ValueError(f"orientation eigenvalues outside [0, 1]: {eig}")
    return a


def from_components(comp, clamp_tol=5e-3):
    """Build a validated orientation tensor from (a11, a22, a33, a12, a13, a23).

    Externally supplied tensors (e.g. tabulated to three decimals) may have
    slightly negative eigenvalues; eigenvalues in [-clamp_tol, 0) are clamped
    to zero and the spectrum is rescaled to unit trace.
    """
    a11, a22, a33, a12, a13, a23 = (float(c) for c in comp)
    a = np.array([[a11, a12, a13], [a12, a22, a23], [a13, a23, a33]])
    if abs(np.trace(a) - 1.0) > clamp_tol:
        raise ValueError("orientation tensor trace must be close to 1")
    eig, vecs = np.linalg.eigh(a)
    if eig[0] < -clamp_tol:
        raise ValueError(f"orientation tensor not PSD: eigenvalues {eig}")
    eig = np.clip(eig, 0.0, None)
    eig /= eig.sum()
    a = vecs @ np.diag(eig) @ vecs.T
    a = 0.5 * (a + a.T)
    return validate_orientation_tensor(a)


def to_components(a):
    """Independent components in serialization order (a11...a23)."""
    return np.array([a[0, 0], a[1, 1], a[2, 2], a[0, 1], a[0, 2], a[1, 2]])


def sample_eigenvalues(rng):
    """Uniform sample from the standard 2-simplex via two cuts of (0, 1)."""
    u, v = rng.random(2)
    lo, hi = (u, v) if u <= v else (v, u)
    return np.array([lo, hi - lo, 1.0 - hi])


def rotation_from_angles(theta, phi, z):
    """Rotation -H(v) R_z(theta) with v = (cos(phi)sqrt(z), sin(phi)sqrt(z), sqrt(1-z))."""
    r_z = mandel.axis_rotation(2, theta)
    sz = np.sqrt(z)
    v = np.array([np.cos(phi) * sz, np.sin(phi) * sz, np.sqrt(1.0 - z)])
    return (2.0 * np.outer(v, v) - _EYE3) @ r_z


def sample_rotation(rng):
    """Uniform random rotation (Arvo's method)."""
    theta = rng.uniform(0.0, 2.0 * np.pi)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    z = rng.random()
    return rotation_from_angles(theta, phi, z)


def sample_orientation_tensor(rng, p_uniaxial=0.0):
    """Random orientation tensor; uniaxial spectrum with probability p_uniaxial.

    Draw order: branch flag, eigenvalues (general branch only), rotation.
    """
    if not 0.0 <= p_uniaxial <= 1.0:
        raise ValueError("p_uniaxial must be a probability")
    uniaxial = rng.random() < p_uniaxial
    lam = np.array([1.0, 0.0, 0.0]) if uniaxial else sample_eigenvalues(rng)
    rot = sample_rotation(rng)
    a = rot @ np.diag(lam) @ rot.T
    return 0.5 * (a + a.T)


# ---------------------------------------------------------------------------
# Fourth-order closure and orientation averaging.
# ---------------------------------------------------------------------------

def _sym3_ii(b):
    """b_ij b_kl + b_ik b_jl + b_il b_jk for a symmetric 3x3 b."""
    return (np.einsum("ij,kl->ijkl", b, b)
            + np.einsum("ik,jl->ijkl", b, b)
            + np.einsum("il,jk->ijkl", b, b))


def _sym6_ad(a):
    """Six-term symmetrized product of a with the identity."""
    return (np.einsum("ij,kl->ijkl", a, _EYE3)
            + np.einsum("ik,jl->ijkl", a, _EYE3)
            + np.einsum("il,jk->ijkl", a, _EYE3)
            + np.einsum("kl,ij->ijkl", a, _EYE3)
            + np.einsum("jl,ik->ijkl", a, _EYE3)
            + np.einsum("jk,il->ijkl", a, _EYE3))


def closure_a4(a):
    """Hybrid fourth-order closure (6x6 Mandel).

    a4 = (1-f)*a4_linear + f*a4_quadratic with f = 1 - 27*det(a); exact for
    isotropic and uniaxial a, and contracts back to a for any admissible a.
    """
    a = validate_orientation_tensor(a)
    f = 1.0 - 27.0 * np.linalg.det(a)
    lin = -_sym3_ii(_EYE3) / 35.0 + _sym6_ad(a) / 7.0
    quad = np.einsum("ij,kl->ijkl", a, a)
    return mandel.tensor4_to_mandel((1.0 - f) * lin + f * quad)


def average_basis(a):
    """Stack of the six invariant basis operators of the orientation average.

    For a transversely isotropic operator B with coefficients c_1..c_6
    (see :func:`ti_coefficients`), <B> = sum_k c_k * basis[k].
    """
    a = np.asarray(a, dtype=float)
    a6 = mandel.from_matrix(a)
    basis = np.empty((6, 6, 6))
    basis[0] = closure_a4(a)
    basis[1] = np.outer(a6, mandel.IDENTITY2)
    basis[2] = np.outer(mandel.IDENTITY2, a6)
    basis[3] = mandel.tensor4_to_mandel(
        np.einsum("ik,jl->ijkl", a, _EYE3) + np.einsum("il,jk->ijkl", a, _EYE3)
        + np.einsum("jk,il->ijkl", a, _EYE3) + np.einsum("jl,ik->ijkl", a, _EYE3))
    basis[4] = np.outer(mandel.IDENTITY2, mandel.IDENTITY2)
    basis[5] = 2.0 * np.eye(6)
    return basis


_UD_AXIS1 = np.diag([1.0, 0.0, 0.0])
_UD_BASIS = None


def _ud_basis():
    global _UD_BASIS
    if _UD_BASIS is None:
        _UD_BASIS = average_basis(_UD_AXIS1)
    return _UD_BASIS


def orientation_average(b_ud, a, tol=1e-8):
    """Advani-Tucker orientation average of an axis-1 transversely isotropic
    fourth-order operator (6x6 Mandel).

    The six invariant coefficients are extracted from ``b_ud``; inputs whose
    reconstruction residual exceeds ``tol`` (not transversely isotropic about
    axis 1) are rejected.  Exact for a = I/3 (isotropic result) and for
    a = diag(1,0,0) (returns ``b_ud``).
    """
    b_ud = np.asarray(b_ud, dtype=float)
    coeffs = ti_coefficients(b_ud)
    recon = np.einsum("k,kij->ij", coeffs, _ud_basis())
    scale = max(np.abs(b_ud).max(), 1e-30)
    if np.abs(recon - b_ud).max() > tol * scale:
        raise ValueError("operator is not transversely isotropic about axis 1")
    return np.einsum("k,kij->ij", coeffs, average_basis(a))
