"""Concrete embedded manifolds with closed-form projections.

========================  ======  ===  ==========================
model                     ``d``   D    reach
========================  ======  ===  ==========================
SphereModel(d)            d       d-1  1
CircleModel(r)            2       1    r
ProjectiveModel           9       2    1/sqrt(2)
RotationModel             9       3    unknown (estimated)
QuotientRotationModel     9       3    unknown (estimated)
========================  ======  ===  ==========================

Matrices live in R^9 through row-major flattening.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .core import ManifoldModel, as_point
from .exceptions import DegenerateSpectrum, NotTangent, NotUnit, OutsideTubularNeighborhood, RankDeficient
from .rotations import SKEW_BASIS, random_rotations
from .symmetry import symmetry_group, validate_group


def sphere_project(x) -> np.ndarray:
    """Radial projection ``x / |x|`` onto the unit sphere."""
    x = as_point(x)
    norm = np.linalg.norm(x)
    if norm <= 1e-14:
        raise OutsideTubularNeighborhood("the origin has no unique closest point on the sphere")
    return x / norm


def sphere_parallel_transport(m, t, s: float, y) -> np.ndarray:
    """Parallel transport of ``y`` along ``gamma(s) = m cos s + t sin s``.

    On a great circle the ambient parallel transport (tangential and normal
    parts together) is the rotation by ``s`` in the ``(m, t)`` plane.
    """
    m, t, y = as_point(m), as_point(t), as_point(y)
    if abs(np.linalg.norm(m) - 1) > 1e-10 or abs(np.linalg.norm(t) - 1) > 1e-10:
        raise NotUnit("m and t must be unit vectors")
    if abs(m @ t) > 1e-10:
        raise NotTangent("t must be orthogonal to m")
    ym, yt = y @ m, y @ t
    rest = y - ym * m - yt * t
    gamma = np.cos(s) * m + np.sin(s) * t
    dgamma = -np.sin(s) * m + np.cos(s) * t
    return rest + ym * gamma + yt * dgamma


class SphereModel(ManifoldModel):
    """The sphere of radius ``radius`` centered at the origin of ``R^d``."""

    def __init__(self, d: int = 3, radius: float = 1.0):
        if d < 2:
            raise ValueError("ambient dimension must be at least 2")
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.ambient_dim = int(d)
        self.intrinsic_dim = int(d) - 1
        self.radius = float(radius)
        self.reach = self.radius
        self.name = f"S^{d - 1}"

    def project(self, x):
        return self.radius * sphere_project(as_point(x, self.ambient_dim))

    def distance(self, x):
        return float(abs(np.linalg.norm(as_point(x, self.ambient_dim)) - self.radius))

    def tangent_basis(self, m):
        m = as_point(m, self.ambient_dim)
        return scipy.linalg.null_space(m[None, :]).T

    def tangent_projector(self, m):
        u = as_point(m, self.ambient_dim)
        u = u / np.linalg.norm(u)
        return np.eye(self.ambient_dim) - np.outer(u, u)

    def shape_operator(self, m, v):
        # B_v = -(<v, m> / r^2) I on T_m
        c = np.dot(as_point(v), as_point(m)) / self.radius**2
        return -c * np.eye(self.intrinsic_dim)

    def sample(self, n, rng):
        x = rng.standard_normal((n, self.ambient_dim))
        return self.radius * x / np.linalg.norm(x, axis=1, keepdims=True)

    def dprojection_closed_form(self, x) -> np.ndarray:
        """``(r/|x|) (I - u u^T)`` with ``u = x/|x|``."""
        x = as_point(x, self.ambient_dim)
        nx = np.linalg.norm(x)
        u = x / nx
        return self.radius / nx * (np.eye(self.ambient_dim) - np.outer(u, u))


class CircleModel(SphereModel):
    """Circle of radius ``r`` in the plane; its reach is ``r``."""

    def __init__(self, r: float = 1.0):
        super().__init__(2, r)
        self.name = f"circle(r={r:g})"

    def tangent_basis(self, m):
        m = as_point(m, 2)
        m = m / np.linalg.norm(m)
        return np.array([[-m[1], m[0]]])

    def point(self, angle) -> np.ndarray:
        return self.radius * np.array([np.cos(angle), np.sin(angle)])


def rp2_embed(x) -> np.ndarray:
    """``x x^T`` flattened; identifies ``x`` with ``-x``."""
    x = as_point(x, 3)
    if abs(np.linalg.norm(x) - 1.0) > 1e-10:
        raise NotUnit(f"|x| = {np.linalg.norm(x):.12g}")
    return np.outer(x, x).reshape(9)


def _rp2_top(A, gap_tol: float = 1e-10):
    M = np.asarray(A, dtype=float).reshape(3, 3)
    S = 0.5 * (M + M.T)
    w, V = np.linalg.eigh(S)
    if w[2] - w[1] < gap_tol:
        raise DegenerateSpectrum(
            f"top eigenvalue is not simple (gap {w[2] - w[1]:.3e}); projection is not unique"
        )
    return w, V[:, 2]


def rp2_project(A) -> np.ndarray:
    """Closest rank-one projector ``u u^T`` in Frobenius norm.

    ``|A - u u^T|^2 = |A|^2 - 2 u^T A u + 1`` is minimized by the top
    eigenvector of the symmetric part of ``A``.
    """
    A = as_point(A, 9)
    _, u = _rp2_top(A)
    return np.outer(u, u).reshape(9)


class ProjectiveModel(ManifoldModel):
    """``RP^2`` as ``{x x^T : |x| = 1}`` inside ``R^{3x3} = R^9``."""

    name = "RP^2"
    ambient_dim = 9
    intrinsic_dim = 2
    reach = 1.0 / np.sqrt(2.0)

    def project(self, x):
        return rp2_project(x)

    def distance(self, x):
        # closed form; stays valid on the medial axis where the projection is not unique
        x = as_point(x, 9)
        M = x.reshape(3, 3)
        lam = np.linalg.eigvalsh(0.5 * (M + M.T))[-1]
        return float(np.sqrt(max(x @ x - 2.0 * lam + 1.0, 0.0)))

    def direction(self, m) -> np.ndarray:
        """Unit ``u`` with ``m = u u^T`` (sign fixed by the largest entry)."""
        w, V = np.linalg.eigh(np.asarray(m, dtype=float).reshape(3, 3))
        u = V[:, 2]
        return u if u[np.argmax(np.abs(u))] > 0 else -u

    def tangent_basis(self, m):
        u = self.direction(as_point(m, 9))
        W = scipy.linalg.null_space(u[None, :]).T
        return np.array([(np.outer(u, w) + np.outer(w, u)).reshape(9) / np.sqrt(2.0) for w in W])

    def sample(self, n, rng):
        x = rng.standard_normal((n, 3))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        return np.einsum("ni,nj->nij", x, x).reshape(n, 9)


def so3_project(A) -> np.ndarray:
    """Closest rotation in Frobenius norm: ``U diag(1, 1, det(U V^T)) V^T``."""
    A = as_point(A, 9).reshape(3, 3)
    U, s, Vt = np.linalg.svd(A)
    if s[-1] < 1e-10:
        raise RankDeficient(f"smallest singular value {s[-1]:.3e}")
    sign = np.sign(np.linalg.det(U @ Vt))
    if sign < 0 and s[1] - s[2] < 1e-10:
        raise RankDeficient("reflected input with a repeated singular value; projection is not unique")
    return (U @ np.diag([1.0, 1.0, sign]) @ Vt).reshape(9)


def quotient_representative(R, symmetry, anchor=None) -> np.ndarray:
    """The element ``R s`` of the coset ``[R]_S`` closest to ``anchor``.

    Maximizes ``trace(anchor^T R s)``, i.e. minimizes the rotation angle of
    ``anchor^T R s``.  Ties within 1e-12 go to the lexicographically smallest
    flattened matrix.  ``R`` may be a single matrix or a stack.
    """
    G = symmetry_group(symmetry) if isinstance(symmetry, str) else np.asarray(symmetry, dtype=float)
    R = np.asarray(R, dtype=float)
    single = R.ndim == 1 or R.shape == (3, 3)
    Rs = R.reshape(-1, 3, 3)
    anchor = np.eye(3) if anchor is None else np.asarray(anchor, dtype=float).reshape(3, 3)
    cand = np.einsum("nij,gjk->ngik", Rs, G)
    score = np.einsum("ij,ngij->ng", anchor, cand)
    out = np.empty_like(Rs)
    for n in range(len(Rs)):
        best = np.flatnonzero(score[n] >= score[n].max() - 1e-12)
        if len(best) == 1:
            out[n] = cand[n, best[0]]
        else:
            flat = np.round(cand[n, best].reshape(len(best), 9), 12)
            order = np.lexsort(flat.T[::-1])
            out[n] = cand[n, best[order[0]]]
    if single:
        return out[0].reshape(R.shape)
    return out.reshape(R.shape)


class RotationModel(ManifoldModel):
    """``SO(3)`` inside ``R^9``.  Reach is left to the estimator."""

    name = "SO(3)"
    ambient_dim = 9
    intrinsic_dim = 3
    reach = None

    def project(self, x):
        return so3_project(x)

    def tangent_basis(self, m):
        R = as_point(m, 9).reshape(3, 3)
        return np.array([(R @ s).reshape(9) / np.sqrt(2.0) for s in SKEW_BASIS])

    def shape_operator(self, m, v):
        # geodesics R exp(tA) have acceleration R A^2, so the second
        # fundamental form is R (A_i A_j + A_j A_i) / 2 with A_i = s_i / sqrt(2)
        R = as_point(m, 9).reshape(3, 3)
        N = as_point(v, 9).reshape(3, 3)
        A = SKEW_BASIS / np.sqrt(2.0)
        AA = np.einsum("iab,jbc->ijac", A, A)
        sym = 0.5 * (AA + AA.transpose(1, 0, 2, 3))
        return np.einsum("ab,ijbc,ac->ij", R, sym, N)

    def sample(self, n, rng):
        return random_rotations(n, rng).reshape(n, 9)


class QuotientRotationModel(RotationModel):
    """``SO(3)/S`` handled by coset representatives relative to an anchor.

    Locally the quotient is isometric to ``SO(3)``, so projection and tangent
    structure are inherited; :meth:`representative` picks the member of a
    coset nearest to a reference orientation.
    """

    def __init__(self, symmetry="C1"):
        if isinstance(symmetry, str):
            self.symmetry_name = symmetry.upper()
            self.symmetry = symmetry_group(symmetry)
        else:
            self.symmetry_name = "custom"
            self.symmetry = validate_group(symmetry)
        self.name = f"SO(3)/{self.symmetry_name}"

    def representative(self, R, anchor=None):
        return quotient_representative(R, self.symmetry, anchor)


def reach_of(model: ManifoldModel) -> float | None:
    """Known reach of a model, ``None`` when it has to be estimated."""
    return model.reach


MODELS = {
    "sphere": lambda: SphereModel(3),
    "circle": lambda: CircleModel(1.0),
    "rp2": ProjectiveModel,
    "so3": RotationModel,
}


def get_model(name: str) -> ManifoldModel:
    try:
        return MODELS[name]()
    except KeyError:
        raise ValueError(f"unknown manifold {name!r}; choose from {sorted(MODELS)}") from None
