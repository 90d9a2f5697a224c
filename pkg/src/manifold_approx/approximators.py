"""Linear approximation operators and their manifold-valued counterparts.

Three linear schemes act componentwise on ``R^d``-valued data:

* Fourier partial sums on the periodic interval ``[0, 1)``
  (:class:`TorusSeries`)
* truncated real spherical harmonic expansions on ``S^2``
  (:class:`SphereSeries`)
* penalized cosine-series smoothing of gridded images with missing cells
  (:class:`CosineGridSeries`)

Composing any of them with a closest-point projection gives the
manifold-valued approximant (:func:`manifold_approximant`).  The
scikit-learn style estimators at the bottom wrap these functions for use in
pipelines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.fft
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin, clone
from sklearn.utils.validation import check_array, check_is_fitted

from .core import ManifoldModel, dprojection
from .exceptions import AllMasked, DimensionMismatch, InsufficientSamples, NonConvergence
from .harmonics import QuadratureRule, num_harmonics, real_harmonics

# ---------------------------------------------------------------------------
# torus


@dataclass(frozen=True)
class TorusSeries:
    """``sum_{|k| <= n} c_k exp(2 pi i k t)`` with ``coeffs[k + n] = c_k``."""

    bandwidth: int
    coeffs: np.ndarray

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.bandwidth, self.bandwidth + 1)

    def to_json(self) -> str:
        c = self.coeffs
        return json.dumps(
            {"type": "torus", "bandwidth": self.bandwidth, "coeffs": {"real": c.real.tolist(), "imag": c.imag.tolist()}}
        )

    @classmethod
    def from_json(cls, text: str) -> "TorusSeries":
        data = json.loads(text)
        c = np.asarray(data["coeffs"]["real"]) + 1j * np.asarray(data["coeffs"]["imag"])
        return cls(int(data["bandwidth"]), c)


def torus_coefficients(samples, n: int) -> TorusSeries:
    """Fourier coefficients ``|k| <= n`` from ``N`` equispaced samples ``f(j/N)``.

    ``c_k = (1/N) sum_j f(t_j) exp(-2 pi i k t_j)``.  Exact for trigonometric
    polynomials of degree at most ``n`` as long as ``N >= 2n + 1``.
    """
    F = np.asarray(samples, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    N = F.shape[0]
    if n < 0:
        raise ValueError("bandwidth must be nonnegative")
    if N < 2 * n + 1:
        raise InsufficientSamples(f"need at least {2 * n + 1} samples for bandwidth {n}, got {N}")
    C = np.fft.fft(F, axis=0) / N
    k = np.arange(-n, n + 1)
    return TorusSeries(int(n), C[k % N])


def _torus_sum(series: TorusSeries, t, coeffs) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    E = np.exp(2j * np.pi * np.outer(np.atleast_1d(t), series.frequencies))
    out = (E @ coeffs).real
    return out[0] if scalar else out


def torus_eval(series: TorusSeries, t) -> np.ndarray:
    """Value of the series at ``t`` (scalar or 1-d array of parameters)."""
    return _torus_sum(series, t, series.coeffs)


def torus_eval_deriv(series: TorusSeries, t) -> np.ndarray:
    """Exact derivative in ``t``: each ``c_k`` is multiplied by ``2 pi i k``."""
    return _torus_sum(series, t, (2j * np.pi * series.frequencies)[:, None] * series.coeffs)


# ---------------------------------------------------------------------------
# sphere


@dataclass(frozen=True)
class SphereSeries:
    """Real harmonic coefficients, shape ``((L+1)^2, d)``."""

    bandwidth: int
    coeffs: np.ndarray

    def to_json(self) -> str:
        return json.dumps({"type": "sphere", "bandwidth": self.bandwidth, "coeffs": self.coeffs.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "SphereSeries":
        data = json.loads(text)
        return cls(int(data["bandwidth"]), np.asarray(data["coeffs"], dtype=float))


def sphere_coefficients(fsamples, rule: QuadratureRule, L: int) -> SphereSeries:
    """``c_{l,k} = sum_n w_n f(x_n) Y_{l,k}(x_n)`` using a rule exact to degree ``2L``."""
    F = np.asarray(fsamples, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if F.shape[0] != len(rule):
        raise DimensionMismatch(f"{F.shape[0]} samples for a rule with {len(rule)} nodes")
    if rule.degree < 2 * L:
        raise ValueError(f"rule is exact to degree {rule.degree}, need {2 * L}")
    Y = real_harmonics(L, rule.nodes)
    return SphereSeries(int(L), (Y * rule.weights[:, None]).T @ F)


def sphere_eval(series: SphereSeries, x) -> np.ndarray:
    """Evaluate at one unit vector (returns a ``d``-vector) or at ``(n, 3)`` points."""
    x = np.asarray(x, dtype=float)
    out = real_harmonics(series.bandwidth, x) @ series.coeffs
    return out[0] if x.ndim == 1 else out


def sphere_tangent_frame(x) -> np.ndarray:
    """Orthonormal rows spanning the tangent plane of ``S^2`` at ``x``."""
    x = np.asarray(x, dtype=float)
    x = x / np.linalg.norm(x)
    helper = np.eye(3)[np.argmin(np.abs(x))]
    t1 = np.cross(x, helper)
    t1 /= np.linalg.norm(t1)
    return np.array([t1, np.cross(x, t1)])


def sphere_eval_dtangent(series: SphereSeries, x, basis=None, h: float = 1e-6) -> np.ndarray:
    """Tangential differential as a ``d x 2`` matrix by normalized forward quotients.

    Column ``i`` is ``(f((x + h t_i)/|x + h t_i|) - f(x)) / h``.
    """
    x = np.asarray(x, dtype=float)
    basis = sphere_tangent_frame(x) if basis is None else np.asarray(basis, dtype=float)
    pts = x + h * basis
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    vals = sphere_eval(series, np.vstack([x[None, :], pts]))
    return ((vals[1:] - vals[0]) / h).T


# ---------------------------------------------------------------------------
# cosine grid smoothing

DCT_TOL = 1e-8
DCT_MAXITER = 500


def _dct(u):
    return scipy.fft.dctn(u, type=2, norm="ortho", axes=(0, 1))


def _idct(a):
    return scipy.fft.idctn(a, type=2, norm="ortho", axes=(0, 1))


def laplacian_eigenvalues(shape) -> np.ndarray:
    """Eigenvalues of the Neumann grid Laplacian in the DCT-II basis (nonnegative)."""
    N1, N2 = shape
    l1 = 2.0 - 2.0 * np.cos(np.pi * np.arange(N1) / N1)
    l2 = 2.0 - 2.0 * np.cos(np.pi * np.arange(N2) / N2)
    return l1[:, None] + l2[None, :]


@dataclass(frozen=True)
class CosineGridSeries:
    """Orthonormal DCT-II coefficients of a smoothed image, shape ``(N1, N2, d)``.

    The continuous extension ``u(x1, x2)`` has grid cell ``(i, j)`` at index
    coordinates ``x = (i, j)``; :meth:`gradient` differentiates it
    analytically.  ``trend`` holds optional affine coefficients, shape
    ``(3, d)`` for the functions ``1, i, j``, added to the cosine part.
    With ``pad > 0`` the series lives on a grid enlarged by ``pad`` cells on
    every side and :meth:`values` and :meth:`gradient` return the original
    cells only.
    """

    shape: tuple
    smoothing: float
    coeffs: np.ndarray
    trend: np.ndarray | None = None
    pad: int = 0

    def _crop(self, a):
        p = self.pad
        return a[p : a.shape[0] - p, p : a.shape[1] - p] if p else a

    def _trend_values(self):
        if self.trend is None:
            return 0.0
        i, j = np.meshgrid(np.arange(self.shape[0]), np.arange(self.shape[1]), indexing="ij")
        return self.trend[0] + i[..., None] * self.trend[1] + j[..., None] * self.trend[2]

    def values(self) -> np.ndarray:
        return self._crop(_idct(self.coeffs) + self._trend_values())

    def _basis(self, axis):
        N = self.shape[axis]
        k = np.arange(N)
        x = np.arange(N)
        scale = np.where(k == 0, np.sqrt(1.0 / N), np.sqrt(2.0 / N))
        arg = np.pi * np.outer(x + 0.5, k) / N
        return scale * np.cos(arg), -scale * (np.pi * k / N) * np.sin(arg)

    def gradient(self, spacing=(1.0, 1.0)) -> np.ndarray:
        """Partial derivatives at every cell, shape ``(N1, N2, d, 2)``, per unit length."""
        C1, D1 = self._basis(0)
        C2, D2 = self._basis(1)
        a = self.coeffs
        g1 = np.einsum("ik,jl,kld->ijd", D1, C2, a)
        g2 = np.einsum("ik,jl,kld->ijd", C1, D2, a)
        if self.trend is not None:
            g1 = g1 + self.trend[1]
            g2 = g2 + self.trend[2]
        return self._crop(np.stack([g1 / spacing[0], g2 / spacing[1]], axis=-1))


def _pcg(apply_A, apply_M, b, x0, tol, maxiter):
    """Preconditioned conjugate gradients, run on all channels at once."""
    axes = (0, 1)
    x = x0.copy()
    r = b - apply_A(x)
    bnorm = np.sqrt(np.sum(b * b, axis=axes))
    bnorm[bnorm == 0] = 1.0
    z = apply_M(r)
    p = z.copy()
    rz = np.sum(r * z, axis=axes)
    for it in range(maxiter):
        res = np.sqrt(np.sum(r * r, axis=axes)) / bnorm
        if np.all(res < tol):
            return x, it
        Ap = apply_A(p)
        pAp = np.sum(p * Ap, axis=axes)
        alpha = np.where(pAp > 0, rz / np.where(pAp > 0, pAp, 1.0), 0.0)
        x = x + alpha * p
        r = r - alpha * Ap
        z = apply_M(r)
        rz_new = np.sum(r * z, axis=axes)
        beta = np.where(rz > 0, rz_new / np.where(rz > 0, rz, 1.0), 0.0)
        p = z + beta * p
        rz = rz_new
    res = np.sqrt(np.sum(r * r, axis=axes)) / bnorm
    if np.all(res < tol):
        return x, maxiter
    raise NonConvergence(f"cosine smoothing did not converge in {maxiter} iterations (residual {res.max():.2e})")


def _prepare(grid, mask):
    U = np.asarray(grid, dtype=float)
    squeeze = U.ndim == 2
    if squeeze:
        U = U[:, :, None]
    if U.ndim != 3:
        raise DimensionMismatch("grid must have shape (N1, N2) or (N1, N2, d)")
    if mask is None:
        mask = np.zeros(U.shape[:2], dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != U.shape[:2]:
        raise DimensionMismatch(f"mask shape {mask.shape} does not match grid {U.shape[:2]}")
    if mask.all():
        raise AllMasked("every cell is masked")
    return U, mask, squeeze


def affine_trend(grid, mask=None) -> np.ndarray:
    """Least-squares coefficients of ``1, i, j`` over unmasked cells, shape ``(3, d)``."""
    U, mask, _ = _prepare(grid, mask)
    i, j = np.nonzero(~mask)
    A = np.stack([np.ones(len(i)), i, j], axis=1).astype(float)
    coef, *_ = np.linalg.lstsq(A, U[i, j], rcond=None)
    return coef


def _odd_reflect_pad(U, mask, pad):
    """Extend ``U`` by ``pad`` cells per side with odd reflection, propagating the mask."""
    for axis in (0, 1):
        width = [(0, 0)] * U.ndim
        width[axis] = (pad, pad)
        U = np.where(mask[..., None], 0.0, U)
        U = np.pad(U, width, mode="reflect", reflect_type="odd")
        mask = np.pad(mask, width[:2], mode="reflect") | np.pad(mask, width[:2], mode="edge")
    return U, mask


def cosine_smooth(
    grid,
    mask=None,
    s: float = 0.0,
    tol: float = DCT_TOL,
    maxiter: int = DCT_MAXITER,
    detrend: bool = False,
    pad: int = 0,
) -> CosineGridSeries:
    """Penalized least-squares smoothing in the cosine basis.

    Minimizes ``sum_{unmasked} |u - y|^2 + s |Laplacian u|^2``; ``mask`` is
    ``True`` on cells without data.  Without masked cells the solution is the
    per-mode shrinkage ``1 / (1 + s lambda^2)``.  With masked cells the
    normal equations ``(W + s L^2) u = W y`` are solved by conjugate gradients
    preconditioned with that shrinkage, which accelerates the classical
    reweighting fixed point.  For ``s = 0`` masked cells receive the
    ``s -> 0`` limit, the minimal-bending fill-in that keeps data cells fixed.

    With ``detrend=True`` an affine least-squares trend is removed first and
    kept in the result.  The cosine basis has zero normal derivative at the
    grid boundary, so without it the gradient of a sloped field is biased
    within a few cells of the edge.

    ``pad`` extends the grid by that many cells on each side with the odd
    reflection ``u(-k) = 2 u(0) - u(k)`` before smoothing.  The extension
    continues values and slopes across the edge, so the zero-derivative
    boundary moves away from the data and the remaining curvature-driven
    edge bias shrinks.  A reflected cell is masked when either of its two
    source cells is.
    """
    if s < 0:
        raise ValueError("smoothing parameter must be nonnegative")
    if pad < 0:
        raise ValueError("pad must be nonnegative")
    U, mask, _ = _prepare(grid, mask)
    if pad:
        if pad >= min(mask.shape):
            raise ValueError("pad must be smaller than both grid dimensions")
        U, mask = _odd_reflect_pad(U, mask, pad)
        inner = cosine_smooth(U, mask, s, tol, maxiter, detrend)
        return CosineGridSeries(inner.shape, inner.smoothing, inner.coeffs, inner.trend, int(pad))
    if detrend:
        trend = affine_trend(U, mask)
        base = CosineGridSeries(U.shape[:2], float(s), np.zeros_like(U), trend)
        inner = cosine_smooth(U - base.values(), mask, s, tol, maxiter)
        return CosineGridSeries(U.shape[:2], float(s), inner.coeffs, trend)
    lam2 = laplacian_eigenvalues(U.shape[:2])[:, :, None] ** 2
    W = (~mask).astype(float)[:, :, None]
    Y = U * W
    if not mask.any():
        return CosineGridSeries(U.shape[:2], float(s), _dct(U) / (1.0 + s * lam2))
    # initial guess: data cells as given, masked cells at the data mean
    mean = Y.sum(axis=(0, 1)) / W.sum()
    x0 = np.where(W > 0, U, mean)
    if s > 0:
        gamma = 1.0 / (1.0 + s * lam2)
        apply_A = lambda u: W * u + s * _idct(lam2 * _dct(u))
        apply_M = lambda r: _idct(gamma * _dct(r))
        u, _ = _pcg(apply_A, apply_M, Y, x0, tol, maxiter)
    else:
        # minimize |L (y0 + z)|^2 over z supported on masked cells
        free = 1.0 - W
        y0 = Y
        apply_A = lambda z: free * _idct(lam2 * _dct(free * z))
        rhs = -free * _idct(lam2 * _dct(y0))
        z, _ = _pcg(apply_A, lambda r: r, rhs, free * x0, tol, maxiter * 4)
        u = y0 + free * z
    return CosineGridSeries(U.shape[:2], float(s), _dct(u))


def gcv_bounds(ndim: int = 2, h_min: float = 1e-6, h_max: float = 0.99):
    """Range of ``s`` matching leverages between ``h_min`` and ``h_max``."""

    def s_of(h):
        a = h ** (2.0 / ndim)
        return (((1.0 + np.sqrt(1.0 + 8.0 * a)) / (4.0 * a)) ** 2 - 1.0) / 16.0

    return s_of(h_max), s_of(h_min)


def gcv_score(grid, mask, s: float, detrend: bool = False) -> float:
    """Generalized cross-validation score of :func:`cosine_smooth` at ``s``.

    The trace of the hat matrix is taken from the unmasked shrinkage factors,
    which is exact without masked cells and the usual approximation with them;
    a removed trend adds its two slope degrees of freedom.
    """
    U, mask, _ = _prepare(grid, mask)
    series = cosine_smooth(U, mask, s, detrend=detrend)
    fit = series.values()
    obs = ~mask
    rss = np.sum((fit[obs] - U[obs]) ** 2) / (obs.sum() * U.shape[2])
    tr = np.sum(1.0 / (1.0 + s * laplacian_eigenvalues(U.shape[:2]) ** 2)) + (2.0 if detrend else 0.0)
    return float(rss / (1.0 - tr / mask.size) ** 2)


def select_smoothing(grid, mask=None, n_grid: int = 20, detrend: bool = False) -> float:
    """Minimizer of :func:`gcv_score` over a log grid of ``n_grid`` values."""
    lo, hi = gcv_bounds()
    candidates = np.logspace(np.log10(lo), np.log10(hi), n_grid)
    scores = [gcv_score(grid, mask, s, detrend) for s in candidates]
    return float(candidates[int(np.argmin(scores))])


# ---------------------------------------------------------------------------
# manifold wrapper


def evaluate_series(series, point) -> np.ndarray:
    """Evaluate any of the series types at a domain point."""
    if isinstance(series, TorusSeries):
        return torus_eval(series, point)
    if isinstance(series, SphereSeries):
        return sphere_eval(series, point)
    if isinstance(series, CosineGridSeries):
        i, j = point
        return series.values()[int(i), int(j)]
    raise TypeError(f"unsupported series type {type(series).__name__}")


def manifold_approximant(model: ManifoldModel, linear, point) -> np.ndarray:
    """``P_M`` applied to the linear approximant evaluated at ``point``.

    Raises :class:`~manifold_approx.exceptions.OutsideTubularNeighborhood`
    when the linear value has no unique closest point on ``M``.
    """
    return model.project(evaluate_series(linear, point))


def manifold_differential(model: ManifoldModel, value, linear_differential) -> np.ndarray:
    """Chain rule ``dP_M(S(x)) dS(x)`` for the differential of the approximant."""
    return dprojection(model, value) @ np.asarray(linear_differential, dtype=float)


# ---------------------------------------------------------------------------
# estimators


def _as_targets(y):
    y = np.asarray(y, dtype=float)
    return y[:, None] if y.ndim == 1 else y


class TorusFourierApproximator(RegressorMixin, BaseEstimator):
    """Fourier partial sum of bandwidth ``bandwidth`` fitted to equispaced samples.

    Parameters
    ----------
    bandwidth : int
        Largest frequency kept.
    equispaced_tol : float
        Allowed deviation of the training parameters from ``j / N``.

    Attributes
    ----------
    series_ : TorusSeries
    n_features_in_ : int
        Always 1 (the parameter ``t``).
    """

    def __init__(self, bandwidth: int = 8, equispaced_tol: float = 1e-9):
        self.bandwidth = bandwidth
        self.equispaced_tol = equispaced_tol

    def fit(self, X, y):
        X = check_array(X, ensure_2d=False).reshape(-1)
        Y = _as_targets(y)
        if len(X) != len(Y):
            raise DimensionMismatch("X and y have different lengths")
        order = np.argsort(X % 1.0)
        grid = np.arange(len(X)) / len(X)
        if np.abs((X[order] % 1.0) - grid).max() > self.equispaced_tol:
            raise ValueError("training parameters must be the equispaced grid j/N")
        self.series_ = torus_coefficients(Y[order], int(self.bandwidth))
        self.n_features_in_ = 1
        self.n_outputs_ = Y.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "series_")
        t = check_array(X, ensure_2d=False).reshape(-1)
        return torus_eval(self.series_, t)

    def predict_derivative(self, X):
        check_is_fitted(self, "series_")
        t = check_array(X, ensure_2d=False).reshape(-1)
        return torus_eval_deriv(self.series_, t)


class SphericalHarmonicApproximator(RegressorMixin, BaseEstimator):
    """Truncated real spherical harmonic expansion of degree ``degree``.

    With ``sample_weight`` the coefficients are the quadrature sums (pass the
    weights of a rule exact to degree ``2 * degree``); without it they are the
    least-squares fit, which needs at least ``(degree + 1)^2`` points.
    """

    def __init__(self, degree: int = 8, h: float = 1e-6):
        self.degree = degree
        self.h = h

    def fit(self, X, y, sample_weight=None):
        X = check_array(X)
        if X.shape[1] != 3:
            raise DimensionMismatch("points on S^2 need 3 coordinates")
        Y = _as_targets(y)
        L = int(self.degree)
        if sample_weight is not None:
            w = np.asarray(sample_weight, dtype=float)
            rule = QuadratureRule(X / np.linalg.norm(X, axis=1, keepdims=True), w, 2 * L)
            self.series_ = sphere_coefficients(Y, rule, L)
        else:
            if len(X) < num_harmonics(L):
                raise InsufficientSamples(f"need at least {num_harmonics(L)} points")
            c, *_ = np.linalg.lstsq(real_harmonics(L, X), Y, rcond=None)
            self.series_ = SphereSeries(L, c)
        self.n_features_in_ = 3
        self.n_outputs_ = Y.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "series_")
        return sphere_eval(self.series_, check_array(X))

    def predict_differential(self, X):
        """Stack of ``d x 2`` tangential differentials, one per row of ``X``."""
        check_is_fitted(self, "series_")
        X = check_array(X)
        return np.array([sphere_eval_dtangent(self.series_, x, h=self.h) for x in X])


class CosineSmoother(TransformerMixin, BaseEstimator):
    """Penalized cosine-series smoother for ``(N1, N2, d)`` images.

    Parameters
    ----------
    smoothing : float or "gcv"
        Penalty weight ``s``; ``"gcv"`` selects it by generalized
        cross-validation during :meth:`fit`.
    n_grid : int
        Size of the log grid searched by GCV.
    detrend : bool
        Remove an affine trend before smoothing.

    Attributes
    ----------
    smoothing_ : float
    series_ : CosineGridSeries
        Smoothed series of the image seen by :meth:`fit`.
    """

    def __init__(self, smoothing="gcv", n_grid: int = 20, detrend: bool = False):
        self.smoothing = smoothing
        self.n_grid = n_grid
        self.detrend = detrend

    def _resolve(self, X, mask):
        if isinstance(self.smoothing, str):
            if self.smoothing != "gcv":
                raise ValueError("smoothing must be a nonnegative number or 'gcv'")
            return select_smoothing(X, mask, self.n_grid, self.detrend)
        if self.smoothing < 0:
            raise ValueError("smoothing must be nonnegative")
        return float(self.smoothing)

    def fit(self, X, y=None, mask=None):
        X = check_array(X, ensure_2d=False, allow_nd=True)
        self.smoothing_ = self._resolve(X, mask)
        self.series_ = cosine_smooth(X, mask, self.smoothing_, detrend=self.detrend)
        self.n_features_in_ = 1 if X.ndim == 2 else X.shape[2]
        return self

    def transform(self, X, mask=None):
        check_is_fitted(self, "smoothing_")
        X = check_array(X, ensure_2d=False, allow_nd=True)
        out = cosine_smooth(X, mask, self.smoothing_, detrend=self.detrend).values()
        return out[:, :, 0] if X.ndim == 2 else out

    def fit_transform(self, X, y=None, mask=None):
        self.fit(X, mask=mask)
        out = self.series_.values()
        return out[:, :, 0] if np.ndim(X) == 2 else out


class ManifoldApproximator(RegressorMixin, BaseEstimator):
    """Projects the predictions of a linear approximator onto a manifold.

    Parameters
    ----------
    estimator : estimator
        Any regressor with ``fit``/``predict`` on ``R^d``-valued targets,
        typically :class:`TorusFourierApproximator` or
        :class:`SphericalHarmonicApproximator`.
    manifold : ManifoldModel
        Target manifold; its ``project`` is applied row by row.
    """

    def __init__(self, estimator=None, manifold=None):
        self.estimator = estimator
        self.manifold = manifold

    def fit(self, X, y, **fit_params):
        if self.estimator is None or self.manifold is None:
            raise ValueError("both estimator and manifold are required")
        self.estimator_ = clone(self.estimator).fit(X, y, **fit_params)
        self.n_features_in_ = getattr(self.estimator_, "n_features_in_", None)
        return self

    def predict_linear(self, X):
        check_is_fitted(self, "estimator_")
        return np.atleast_2d(self.estimator_.predict(X))

    def predict(self, X):
        return np.array([self.manifold.project(v) for v in self.predict_linear(X)])

    def residual(self, X):
        """Distance of the linear predictions to the manifold (compare with the reach)."""
        return np.array([self.manifold.distance(v) for v in self.predict_linear(X)])
