"""Algebra for symmetric second- and fourth-order tensors in an orthonormal
6-dimensional (Mandel) basis.

Component order is (11, 22, 33, 23, 13, 12) with the shear components scaled
by sqrt(2), so that the 6-vector inner product equals the double contraction
of the underlying 3x3 tensors and 6x6 matrix products equal fourth-order
compositions.  File I/O converts to plain (unscaled) components at the
boundary via :func:`to_plain` / :func:`from_plain`.
"""
import numpy as np

SQRT2 = np.sqrt(2.0)

#: Mandel representation of the second-order identity tensor.
IDENTITY2 = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])

#: Symmetric fourth-order identity (6x6).
IDENTITY4 = np.eye(6)

#: Volumetric projector J = (I (x) I)/3.
VOL_PROJECTOR = np.outer(IDENTITY2, IDENTITY2) / 3.0

#: Deviatoric projector K = I4 - J.
DEV_PROJECTOR = IDENTITY4 - VOL_PROJECTOR

# (row, col) index pairs of the 6 basis slots in the 3x3 representation
_PAIRS = ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))


def to_matrix(v):
    """Convert a Mandel 6-vector to its symmetric 3x3 matrix."""
    v = np.asarray(v, dtype=float)
    m = np.empty((3, 3))
    m[0, 0], m[1, 1], m[2, 2] = v[0], v[1], v[2]
    m[1, 2] = m[2, 1] = v[3] / SQRT2
    m[0, 2] = m[2, 0] = v[4] / SQRT2
    m[0, 1] = m[1, 0] = v[5] / SQRT2
    return m


def from_matrix(m, tol=1e-9):
    """Convert a symmetric 3x3 matrix to a Mandel 6-vector.

    Raises ValueError if the matrix is not symmetric within ``tol``
    (relative to its norm).
    """
    m = np.asarray(m, dtype=float)
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.T).max() > tol * scale:
        raise ValueError("matrix is not symmetric")
    return np.array([m[0, 0], m[1, 1], m[2, 2],
                     SQRT2 * m[1, 2], SQRT2 * m[0, 2], SQRT2 * m[0, 1]])


def to_plain(v):
    """Mandel 6-vector -> plain components (11, 22, 33, 23, 13, 12)."""
    p = np.array(v, dtype=float)
    p[..., 3:] /= SQRT2
    return p


def from_plain(p):
    """Plain components (11, 22, 33, 23, 13, 12) -> Mandel 6-vector."""
    v = np.array(p, dtype=float)
    v[..., 3:] *= SQRT2
    return v


def trace(v):
    return v[0] + v[1] + v[2]


def deviator(v):
    """Deviatoric part s - tr(s)/3 * I."""
    return v - (trace(v) / 3.0) * IDENTITY2


def dot(a, b):
    """Inner product; equals the double contraction a : b."""
    return float(np.dot(a, b))


def norm(v):
    return float(np.linalg.norm(v))


def von_mises(sig):
    """Von Mises equivalent stress sqrt(3/2 * dev(s) : dev(s))."""
    s = deviator(np.asarray(sig, dtype=float))
    return float(np.sqrt(1.5 * np.dot(s, s)))


def check_rotation(rotmat, tol=1e-12):
    """Validate a proper orthogonal 3x3 matrix; returns it as an ndarray."""
    rotmat = np.asarray(rotmat, dtype=float)
    if rotmat.shape != (3, 3):
        raise ValueError("rotation must be a 3x3 matrix")
    if np.abs(rotmat @ rotmat.T - np.eye(3)).max() > tol:
        raise ValueError("matrix is not orthogonal")
    if abs(np.linalg.det(rotmat) - 1.0) > tol:
        raise ValueError("matrix is not a proper rotation (det != +1)")
    return rotmat


def rotation_operator(rotmat, tol=1e-9):
    """6x6 Mandel representation of the congruence s -> R s R^T.

    The result is orthogonal, so fourth-order tensors rotate as Q C Q^T.
    """
    rotmat = check_rotation(rotmat, tol=tol)
    q = np.empty((6, 6))
    for j in range(6):
        basis = np.zeros(6)
        basis[j] = 1.0
        q[:, j] = from_matrix(rotmat @ to_matrix(basis) @ rotmat.T)
    return q


def rotate(v, rotmat, tol=1e-9):
    """Rotate a symmetric second-order tensor: R s R^T in 6-space."""
    return rotation_operator(rotmat, tol=tol) @ np.asarray(v, dtype=float)


def rotate4(c, rotmat, tol=1e-9):
    """Rotate a fourth-order tensor (6x6 Mandel matrix)."""
    q = rotation_operator(rotmat, tol=tol)
    return q @ np.asarray(c, dtype=float) @ q.T


def axis_rotation(axis, angle):
    """Rotation matrix about coordinate axis 0, 1 or 2 (x, y, z)."""
    c, s = np.cos(angle), np.sin(angle)
    i, j = {0: (1, 2), 1: (2, 0), 2: (0, 1)}[axis]
    r = np.eye(3)
    r[i, i] = c
    r[j, j] = c
    r[i, j] = -s
    r[j, i] = s
    return r


def isotropic_stiffness(e_mod, nu):
    """Isotropic stiffness (6x6 Mandel) from Young's modulus and Poisson ratio.

    Bulk modulus K = E/(3(1-2nu)), shear modulus mu = E/(2(1+nu)).
    """
    if e_mod <= 0.0:
        raise ValueError("Young's modulus must be positive")
    if not -1.0 < nu < 0.5:
        raise ValueError("Poisson ratio must lie in (-1, 0.5)")
    k_mod = e_mod / (3.0 * (1.0 - 2.0 * nu))
    mu = e_mod / (2.0 * (1.0 + nu))
    return stiffness_from_moduli(k_mod, mu)


def stiffness_from_moduli(k_mod, mu):
    """Isotropic stiffness 3K J + 2mu K_dev from bulk and shear moduli."""
    return 3.0 * k_mod * VOL_PROJECTOR + 2.0 * mu * DEV_PROJECTOR


def tensor4_to_mandel(t):
    """Full 3x3x3x3 tensor (minor-symmetric) -> 6x6 Mandel matrix."""
    t = np.asarray(t, dtype=float)
    m = np.empty((6, 6))
    for a, (i, j) in enumerate(_PAIRS):
        fa = 1.0 if a < 3 else SQRT2
        for b, (k, l) in enumerate(_PAIRS):
            fb = 1.0 if b < 3 else SQRT2
            m[a, b] = fa * fb * t[i, j, k, l]
    return m


def mandel_to_tensor4(m):
    """6x6 Mandel matrix -> full 3x3x3x3 tensor with minor symmetries."""
    m = np.asarray(m, dtype=float)
    t = np.empty((3, 3, 3, 3))
    for a, (i, j) in enumerate(_PAIRS):
        fa = 1.0 if a < 3 else SQRT2
        for b, (k, l) in enumerate(_PAIRS):
            fb = 1.0 if b < 3 else SQRT2
            val = m[a, b] / (fa * fb)
            t[i, j, k, l] = val
            t[j, i, k, l] = val
            t[i, j, l, k] = val
            t[j, i, l, k] = val
    return t
