"""Embedded submanifolds of R^d and the closest-point projection onto them.

Points are plain ``numpy`` vectors of the model's ambient dimension; matrices
(as for the rotation models) are flattened row-major so that the Frobenius
norm coincides with the Euclidean norm.

Besides the abstract :class:`ManifoldModel`, this module exposes free functions
that work for any model:

* :func:`project` and :func:`distance_to_manifold`
* :func:`tangent_projector` and :func:`shape_operator`
* :func:`dprojection`, the closed-form differential ``P_T (I - B_v)^{-1}``,
  and :func:`dprojection_fd`, its central-difference oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import (
    NotANormalVector,
    OutsideTubularNeighborhood,
    PointNotOnManifold,
    SingularOperator,
)

ON_MANIFOLD_TOL = 1e-10
NORMAL_TOL = 1e-8
SHAPE_FD_STEP = 1e-5
SINGULAR_TOL = 1e-6


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Validate and return ``x`` as a finite 1-d float array."""
    arr = np.asarray(x, dtype=float).reshape(-1)
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"expected a point of length {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point has non-finite entries")
    return arr


@dataclass(frozen=True)
class TangentBasis:
    """Orthonormal basis of ``T_m M`` stored as the rows of ``vectors``."""

    base: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def projector(self) -> np.ndarray:
        return self.vectors.T @ self.vectors


@dataclass(frozen=True)
class ShapeOperator:
    """Symmetric operator ``B_n`` on ``T_m M`` written in a tangent basis.

    ``matrix[i, j] = <B_n t_i, t_j> = <n, nabla_{t_i} t_j>``.
    """

    base: np.ndarray
    normal: np.ndarray
    matrix: np.ndarray
    basis: TangentBasis = field(repr=False)

    def ambient(self) -> np.ndarray:
        """``B_n`` as a ``d x d`` matrix, extended by zero on the normal space."""
        T = self.basis.vectors
        return T.T @ self.matrix @ T

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2)) if self.matrix.size else 0.0


class ManifoldModel:
    """A compact submanifold ``M`` of ``R^d`` with a closest-point projection.

    Subclasses implement :meth:`project` and usually override
    :meth:`tangent_basis`, :meth:`sample` and :meth:`shape_operator` with closed
    forms.  ``reach`` is ``None`` when it is not known analytically.
    """

    name = "manifold"
    intrinsic_dim: int
    ambient_dim: int
    reach: float | None = None

    def project(self, x) -> np.ndarray:
        raise NotImplementedError

    def distance(self, x) -> float:
        x = as_point(x, self.ambient_dim)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, m, tol: float = ON_MANIFOLD_TOL) -> bool:
        m = as_point(m, self.ambient_dim)
        try:
            p = self.project(m)
        except OutsideTubularNeighborhood:
            return False
        return bool(np.linalg.norm(p - m) <= tol * max(1.0, np.linalg.norm(m)))

    def tangent_basis(self, m) -> np.ndarray:
        """Rows span ``T_m M``.

        Fallback: rank-revealing QR of the finite-difference differential of
        the projection, which equals the tangent projector on ``M``.
        """
        m = as_point(m, self.ambient_dim)
        J = dprojection_fd(self, m, 1e-6)
        Q, _, _ = scipy.linalg.qr(J, pivoting=True)
        return Q[:, : self.intrinsic_dim].T.copy()

    def shape_operator(self, m, v) -> np.ndarray:
        """Matrix of ``B_v`` in :meth:`tangent_basis` (finite differences)."""
        return numeric_shape_matrix(self, m, v, self.tangent_basis(m))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def random_normal(self, m, rng: np.random.Generator) -> np.ndarray:
        """A unit vector of ``N_m M`` drawn from the normalized Gaussian."""
        m = as_point(m, self.ambient_dim)
        P = np.eye(self.ambient_dim) - self.tangent_projector(m)
        while True:
            n = P @ rng.standard_normal(self.ambient_dim)
            norm = np.linalg.norm(n)
            if norm > 1e-8:
                return n / norm

    def tangent_projector(self, m) -> np.ndarray:
        T = self.tangent_basis(m)
        return T.T @ T

    def __repr__(self):
        return f"{type(self).__name__}(d={self.ambient_dim}, D={self.intrinsic_dim})"


def numeric_shape_matrix(model: ManifoldModel, m, v, basis, h: float = SHAPE_FD_STEP):
    """Shape operator ``B_v x = -P_T nabla_x v`` by central differences.

    ``v`` is extended off ``m`` by projecting it onto the normal spaces along
    the retraction ``t -> P_M(m + t)``.  Any normal extension gives the same
    tangential derivative, so the choice only affects round-off.
    """
    m = np.asarray(m, dtype=float)
    v = np.asarray(v, dtype=float)
    basis = np.asarray(basis, dtype=float)
    D = basis.shape[0]
    dN = np.empty((D, m.shape[0]))
    for i, t in enumerate(basis):
        fwd = model.project(m + h * t)
        bwd = model.project(m - h * t)
        n_fwd = v - model.tangent_projector(fwd) @ v
        n_bwd = v - model.tangent_projector(bwd) @ v
        dN[i] = (n_fwd - n_bwd) / (2.0 * h)
    B = -dN @ basis.T
    return 0.5 * (B + B.T)


def _check_on_manifold(model: ManifoldModel, m) -> np.ndarray:
    m = as_point(m, model.ambient_dim)
    if not model.contains(m):
        raise PointNotOnManifold(f"point is not on {model.name}")
    return m


def project(model: ManifoldModel, x) -> np.ndarray:
    """Closest point of ``M`` to ``x``; raises when ``x`` is certifiably out of reach."""
    return model.project(as_point(x, model.ambient_dim))


def distance_to_manifold(model: ManifoldModel, x) -> float:
    return model.distance(as_point(x, model.ambient_dim))


def tangent_basis(model: ManifoldModel, m) -> TangentBasis:
    m = _check_on_manifold(model, m)
    return TangentBasis(base=m, vectors=model.tangent_basis(m))


def tangent_projector(model: ManifoldModel, m) -> np.ndarray:
    """Orthogonal projector onto ``T_m M``; this is also ``dP_M(m)``."""
    return tangent_basis(model, m).projector


def shape_operator(model: ManifoldModel, m, v) -> ShapeOperator:
    """The symmetric shape operator ``B_v`` at ``m`` for a normal vector ``v``."""
    basis = tangent_basis(model, m)
    v = as_point(v, model.ambient_dim)
    tang = basis.vectors @ v
    if np.linalg.norm(tang) > NORMAL_TOL * max(1.0, np.linalg.norm(v)):
        raise NotANormalVector(f"|P_T v| = {np.linalg.norm(tang):.3e}")
    D = basis.dim
    if not np.any(v):
        matrix = np.zeros((D, D))
    else:
        matrix = np.asarray(model.shape_operator(basis.base, v), dtype=float)
    return ShapeOperator(base=basis.base, normal=v, matrix=matrix, basis=basis)


def dprojection(model: ManifoldModel, x) -> np.ndarray:
    """Differential of the projection at ``x``: ``P_T (I - B_v)^{-1}``.

    Here ``m = P_M(x)`` and ``v = x - m``.  On the manifold this reduces to
    the tangent projector; its kernel always contains ``N_m M``.

    Validity is decided by invertibility of ``I - B_v`` rather than by
    ``|v| < reach``: outward from a sphere the formula holds at any distance.
    Points without a unique closest point fail inside ``model.project``.
    """
    x = as_point(x, model.ambient_dim)
    m = model.project(x)
    v = x - m
    dist = np.linalg.norm(v)
    T = model.tangent_basis(m)
    if dist == 0.0:
        return T.T @ T
    # v is normal up to round-off of the projection; remove the residue
    v = v - T.T @ (T @ v)
    B = np.asarray(model.shape_operator(m, v), dtype=float)
    A = np.eye(T.shape[0]) - B
    lam_min = np.linalg.eigvalsh(A).min()
    if lam_min < SINGULAR_TOL:
        raise SingularOperator(f"smallest eigenvalue of I - B_v is {lam_min:.3e}")
    return T.T @ np.linalg.solve(A, T)


def dprojection_fd(model: ManifoldModel, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of :func:`project`, column by column."""
    x = as_point(x, model.ambient_dim)
    d = model.ambient_dim
    J = np.empty((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        J[:, i] = (model.project(x + e) - model.project(x - e)) / (2.0 * h)
    return J
