"""Small SO(3) toolkit: quaternions, exp and log maps in the skew basis."""

from __future__ import annotations

import numpy as np
from scipy.spatial.transform import Rotation

# the basis R s^(a) of T_R SO(3); note s^(2) is minus the usual hat(e_2)
SKEW_BASIS = np.array(
    [
        [[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]],
        [[0.0, 0.0, -1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
        [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
    ]
)
SKEW_BASIS.setflags(write=False)
# coordinates in SKEW_BASIS versus the standard axis-vector convention
_SIGN = np.array([1.0, -1.0, 1.0])


def skew(c) -> np.ndarray:
    """``sum_a c_a s^(a)`` for coefficient vectors of shape ``(..., 3)``."""
    c = np.asarray(c, dtype=float)
    return np.einsum("...a,aij->...ij", c, SKEW_BASIS)


def skew_coords(W) -> np.ndarray:
    """Coefficients of the skew part of ``W`` in :data:`SKEW_BASIS`."""
    W = np.asarray(W, dtype=float)
    return np.einsum("...ij,aij->...a", W, SKEW_BASIS) / 2.0


def rotvec_to_skew_coords(rv) -> np.ndarray:
    return np.asarray(rv, dtype=float) * _SIGN


def skew_coords_to_rotvec(c) -> np.ndarray:
    return np.asarray(c, dtype=float) * _SIGN


def exp_skew(c) -> np.ndarray:
    """``expm(skew(c))``, vectorized over leading axes."""
    rv = skew_coords_to_rotvec(c)
    shape = rv.shape[:-1]
    return Rotation.from_rotvec(rv.reshape(-1, 3)).as_matrix().reshape(shape + (3, 3))


def log_skew(R) -> np.ndarray:
    """Skew-basis coordinates of the principal logarithm of ``R``."""
    R = np.asarray(R, dtype=float)
    shape = R.shape[:-2]
    rv = Rotation.from_matrix(R.reshape(-1, 3, 3)).as_rotvec().reshape(shape + (3,))
    return rotvec_to_skew_coords(rv)


def rotation_angle(R) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    tr = np.trace(R, axis1=-2, axis2=-1)
    return np.arccos(np.clip((tr - 1.0) / 2.0, -1.0, 1.0))


def quat_to_matrix(q) -> np.ndarray:
    """Unit quaternions ``(w, x, y, z)`` to rotation matrices."""
    q = np.asarray(q, dtype=float)
    shape = q.shape[:-1]
    R = Rotation.from_quat(q.reshape(-1, 4), scalar_first=True).as_matrix()
    return R.reshape(shape + (3, 3))


def matrix_to_quat(R) -> np.ndarray:
    """Rotation matrices to unit quaternions ``(w, x, y, z)`` with ``w >= 0``."""
    R = np.asarray(R, dtype=float)
    shape = R.shape[:-2]
    q = Rotation.from_matrix(R.reshape(-1, 3, 3)).as_quat(canonical=True, scalar_first=True)
    return q.reshape(shape + (4,))


def random_rotations(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed rotations from QR of Gaussian matrices with sign fixing."""
    return random_orthogonal(n, 3, rng, special=True)


def random_orthogonal(n: int, dim: int, rng: np.random.Generator, special: bool = True):
    Z = rng.standard_normal((n, dim, dim))
    Q, Rr = np.linalg.qr(Z)
    signs = np.sign(np.diagonal(Rr, axis1=1, axis2=2))
    signs[signs == 0] = 1.0
    Q = Q * signs[:, None, :]
    if special:
        flip = np.linalg.det(Q) < 0
        Q[flip, :, 0] *= -1.0
    return Q
