"""Real spherical harmonics on S^2 and an exact product quadrature rule.

Conventions
-----------
Harmonics are real and orthonormal on the unit sphere, with no
Condon-Shortley phase::

    Y_{l,0}  = Pbar_l^0(cos theta)
    Y_{l,k}  = sqrt(2) Pbar_l^k(cos theta) cos(k phi)      k > 0
    Y_{l,-k} = sqrt(2) Pbar_l^k(cos theta) sin(k phi)      k > 0

where ``Pbar`` are the fully normalized associated Legendre functions.  The
pair ``(l, k)`` is stored at flat index ``l**2 + l + k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def harmonic_index(l: int, k: int) -> int:
    """Flat position of ``Y_{l,k}``."""
    if abs(k) > l:
        raise ValueError("|k| must not exceed l")
    return l * l + l + k


def num_harmonics(L: int) -> int:
    return (L + 1) ** 2


def normalized_legendre(L: int, x) -> np.ndarray:
    """``Pbar_l^m(x)`` for ``0 <= m <= l <= L``; shape ``(L+1, L+1) + x.shape``.

    Uses the standard stable recurrences: diagonal terms via
    ``sqrt((2m+1)/(2m)) sin(theta)``, one step off the diagonal via
    ``sqrt(2m+3) x``, and the three-term recurrence in ``l`` for the rest.
    Entries with ``m > l`` are zero.
    """
    x = np.asarray(x, dtype=float)
    sin = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    P = np.zeros((L + 1, L + 1) + x.shape)
    P[0, 0] = 1.0 / np.sqrt(4.0 * np.pi)
    for m in range(1, L + 1):
        P[m, m] = np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * sin * P[m - 1, m - 1]
    for m in range(0, L):
        P[m + 1, m] = np.sqrt(2.0 * m + 3.0) * x * P[m, m]
    for m in range(0, L + 1):
        for l in range(m + 2, L + 1):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            P[l, m] = a * (x * P[l - 1, m] - b * P[l - 2, m])
    return P


def real_harmonics(L: int, points) -> np.ndarray:
    """All ``Y_{l,k}`` with ``l <= L`` at unit vectors; shape ``(n, (L+1)^2)``.

    ``points`` may be a single vector of length 3 or an ``(n, 3)`` array.  Rows
    are normalized first, so any nonzero direction is accepted.
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    z = np.clip(X[:, 2], -1.0, 1.0)
    phi = np.arctan2(X[:, 1], X[:, 0])
    P = normalized_legendre(L, z)
    Y = np.empty((len(X), num_harmonics(L)))
    root2 = np.sqrt(2.0)
    for l in range(L + 1):
        Y[:, harmonic_index(l, 0)] = P[l, 0]
        for k in range(1, l + 1):
            Y[:, harmonic_index(l, k)] = root2 * P[l, k] * np.cos(k * phi)
            Y[:, harmonic_index(l, -k)] = root2 * P[l, k] * np.sin(k * phi)
    return Y


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes (unit vectors, shape ``(n, 3)``) and positive weights."""

    nodes: np.ndarray
    weights: np.ndarray
    degree: int

    def __len__(self):
        return len(self.weights)

    def integrate(self, values) -> np.ndarray:
        return np.tensordot(self.weights, np.asarray(values, dtype=float), axes=(0, 0))


def sphere_quadrature(L: int) -> QuadratureRule:
    """Gauss-Legendre in ``cos(theta)`` times equispaced longitudes.

    ``L + 1`` latitude nodes and ``2L + 2`` longitudes integrate every
    spherical harmonic of degree at most ``2L`` exactly, which is what the
    coefficient formula needs for products of two degree-``L`` harmonics.
    """
    if L < 0:
        raise ValueError("L must be nonnegative")
    z, wz = np.polynomial.legendre.leggauss(L + 1)
    nphi = 2 * L + 2
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    Z, PHI = np.meshgrid(z, phi, indexing="ij")
    s = np.sqrt(1.0 - Z**2)
    nodes = np.stack([s * np.cos(PHI), s * np.sin(PHI), Z], axis=-1).reshape(-1, 3)
    weights = np.repeat(wz * (2.0 * np.pi / nphi), nphi)
    return QuadratureRule(nodes=nodes, weights=weights, degree=2 * L)
