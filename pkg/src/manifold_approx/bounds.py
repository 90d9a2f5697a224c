"""Explicit error bounds for projected approximations and per-point error reports.

Notation: ``f`` is the manifold-valued target, ``S`` a linear approximant of
the embedded ``f`` and ``P(S)`` its projection.  With ``tau`` the reach and
``eps`` a bound on ``|S - f|``:

* value:        ``|P(S) - f| <= 2 |S - f|``
* differential: ``|dP(S) - df| <= |dS - df| + C |S - f|`` with
  ``C = (2/tau + 1/(tau - eps)) (|dS - df| + |df|)``
* Fourier partial sums of a function with ``f^(r)`` in ``L^2`` on the circle:
  ``|S_n f - f| <= C1 n^(1/2 - r) |f^(r)|``, ``C1 = sqrt(2d) / (2 pi)^r``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .approximators import TorusSeries
from .exceptions import EpsilonExceedsReach, ManifoldApproxError


@dataclass(frozen=True)
class SmoothnessData:
    r: int
    sobolev_norm: float
    sup_value_error: float
    sup_deriv_error: float

    def __post_init__(self):
        if self.r < 2:
            raise ValueError("r must be at least 2")
        if min(self.sobolev_norm, self.sup_value_error, self.sup_deriv_error) < 0:
            raise ValueError("norms must be nonnegative")


def sobolev_norm_torus(series: TorusSeries, r: int) -> float:
    """``|f^(r)|_{L^2}`` by Parseval: ``sqrt(sum_k (2 pi |k|)^(2r) |c_k|^2)``."""
    k = series.frequencies.astype(float)
    power = np.sum(np.abs(series.coeffs) ** 2, axis=1)
    return float(np.sqrt(np.sum((2.0 * np.pi * np.abs(k)) ** (2 * r) * power)))


def value_bound(eps: float) -> float:
    """Bound ``2 eps`` on the projected error when the linear error is at most ``eps``."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return 2.0 * float(eps)


def diff_constant(tau: float, eps: float, sup_lin_deriv_err: float, sup_df_norm: float) -> float:
    """``C = (2/tau + 1/(tau - eps)) (sup |dS - df| + sup |df|)``."""
    if not eps < tau:
        raise EpsilonExceedsReach(f"eps = {eps:.6g} is not below the reach {tau:.6g}")
    return (2.0 / tau + 1.0 / (tau - eps)) * (sup_lin_deriv_err + sup_df_norm)


def diff_bound(tau, eps, sup_lin_deriv_err, sup_df_norm, value_err_at_x):
    """Differential bound ``sup |dS - df| + C |S(x) - f(x)|`` (vectorized in the last argument).

    >>> round(float(diff_bound(1.0, 0.5, 0.1, 1.0, 0.05)), 12)
    0.32
    """
    C = diff_constant(tau, eps, sup_lin_deriv_err, sup_df_norm)
    return sup_lin_deriv_err + C * np.asarray(value_err_at_x, dtype=float)


def fourier_c1(d: int, r: int) -> float:
    return math.sqrt(2.0 * d) / (2.0 * math.pi) ** r


def fourier_constants(d: int, r: int, n: int, tau: float, eps: float, sobolev_norm: float | None = None):
    """``(C1, C2, n_min)`` for Fourier partial sums on the circle.

    ``C2 = C1 (2/tau + 1/(tau - eps)) (1 + 2 pi C1^2 n^(3/2 - r))``.
    ``n_min`` is the least bandwidth with ``n^(r - 1/2) >= C1 |f^(r)| / eps``;
    it is ``None`` when ``sobolev_norm`` is not given.
    """
    if r < 2:
        raise ValueError("r must be at least 2")
    if not 0 <= eps < tau:
        raise EpsilonExceedsReach(f"eps = {eps:.6g} is not in [0, tau = {tau:.6g})")
    C1 = fourier_c1(d, r)
    C2 = C1 * (2.0 / tau + 1.0 / (tau - eps)) * (1.0 + 2.0 * math.pi * C1**2 * n ** (1.5 - r))
    n_min = None
    if sobolev_norm is not None:
        n_min = minimal_bandwidth(C1, r, sobolev_norm, eps)
    return C1, C2, n_min


def minimal_bandwidth(C1: float, r: int, sobolev_norm: float, eps: float) -> int:
    """Least integer ``n >= 1`` with ``n^(r - 1/2) >= C1 |f^(r)| / eps``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    target = C1 * sobolev_norm / eps
    n = max(1, math.ceil(target ** (1.0 / (r - 0.5))))
    # guard against rounding in the fractional power
    while n > 1 and (n - 1) ** (r - 0.5) >= target:
        n -= 1
    while n ** (r - 0.5) < target:
        n += 1
    return n


def fourier_value_rhs(C1, r, n, sobolev_norm) -> float:
    """Projected value error bound ``2 C1 n^(1/2 - r) |f^(r)|``."""
    return 2.0 * C1 * n ** (0.5 - r) * sobolev_norm


def fourier_diff_rhs(C1, C2, r, n, sobolev_norm) -> float:
    """Projected differential bound ``2 pi C1 n^(3/2 - r) |f^(r)| + C2 n^(1/2 - r) |f^(r)|^2``."""
    return 2.0 * math.pi * C1 * n ** (1.5 - r) * sobolev_norm + C2 * n ** (0.5 - r) * sobolev_norm**2


@dataclass
class ErrorReport:
    """Per-point comparison of observed errors with the value and differential bounds.

    Bound columns are ``nan`` wherever ``within_reach`` is false, i.e. where
    the linear error reaches the reach and the projection may not be unique.
    """

    points: np.ndarray
    linear_value_error: np.ndarray
    value_error: np.ndarray
    linear_diff_error: np.ndarray
    diff_error: np.ndarray
    within_reach: np.ndarray
    bound_value: np.ndarray
    bound_value_pointwise: np.ndarray
    bound_diff: np.ndarray
    tau: float
    eps: float
    C: float
    C1: float | None = None
    C2: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def margin_value(self) -> np.ndarray:
        return self.bound_value_pointwise - self.value_error

    @property
    def margin_diff(self) -> np.ndarray:
        return self.bound_diff - self.diff_error

    def summary(self) -> dict:
        w = self.within_reach

        def sup(a):
            return float(np.max(a[w])) if w.any() else float("nan")

        return {
            "points": int(len(w)),
            "within_reach": int(w.sum()),
            "tau": self.tau,
            "eps": self.eps,
            "C": self.C,
            "C1": self.C1,
            "C2": self.C2,
            "sup_linear_value_error": sup(self.linear_value_error),
            "sup_value_error": sup(self.value_error),
            "sup_linear_diff_error": sup(self.linear_diff_error),
            "sup_diff_error": sup(self.diff_error),
            "value_bound": value_bound(self.eps) if np.isfinite(self.eps) else float("nan"),
            "min_margin_value": float(np.min(self.margin_value[w])) if w.any() else float("nan"),
            "min_margin_diff": float(np.min(self.margin_diff[w])) if w.any() else float("nan"),
            **self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        """One row per evaluation point, floats in shortest round-trip form."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        coords = [f"x{i}" for i in range(self.points.shape[1])]
        writer.writerow(
            ["index", *coords, "linear_value_error", "value_error", "linear_diff_error", "diff_error",
             "within_reach", "bound_value", "bound_diff", "margin_value", "margin_diff"]
        )
        for i in range(len(self.points)):
            writer.writerow(
                [i, *map(repr, self.points[i].tolist()),
                 repr(float(self.linear_value_error[i])), repr(float(self.value_error[i])),
                 repr(float(self.linear_diff_error[i])), repr(float(self.diff_error[i])),
                 int(self.within_reach[i]), repr(float(self.bound_value_pointwise[i])),
                 repr(float(self.bound_diff[i])), repr(float(self.margin_value[i])),
                 repr(float(self.margin_diff[i]))]
            )
        return buf.getvalue()


def build_report(model, f_sampler, linear, grid, tau: float | None = None) -> ErrorReport:
    """Evaluate observed errors and both bounds on ``grid``.

    Parameters
    ----------
    model : ManifoldModel
    f_sampler : callable
        ``f_sampler(grid) -> (values, differentials)`` with shapes ``(n, d)``
        and ``(n, d, k)`` for a ``k``-dimensional domain.
    linear : callable
        ``linear(grid) -> (values, differentials)`` of the linear approximant,
        in the same tangent frames as ``f_sampler``.
    grid : array_like
        Evaluation points, shape ``(n, k_coords)`` or ``(n,)``.
    tau : float, optional
        Reach; defaults to the model's known reach.

    Notes
    -----
    ``eps`` is the observed supremum of the linear value error over the
    within-reach points, and ``C`` uses suprema over the same set.
    """
    from .core import dprojection

    tau = float(model.reach if tau is None else tau)
    pts = np.asarray(grid, dtype=float)
    pts2 = pts[:, None] if pts.ndim == 1 else pts
    f_val, f_diff = (np.asarray(a, dtype=float) for a in f_sampler(pts))
    s_val, s_diff = (np.asarray(a, dtype=float) for a in linear(pts))
    if f_diff.ndim == 2:
        f_diff, s_diff = f_diff[:, :, None], s_diff[:, :, None]
    n = len(pts2)
    lin_err = np.linalg.norm(s_val - f_val, axis=1)
    lin_derr = np.linalg.norm(s_diff - f_diff, ord=2, axis=(1, 2))
    df_norm = np.linalg.norm(f_diff, ord=2, axis=(1, 2))
    within = lin_err < tau
    val_err = np.full(n, np.nan)
    diff_err = np.full(n, np.nan)
    for i in range(n):
        # outside the reach the projection or its differential may not exist
        try:
            val_err[i] = np.linalg.norm(model.project(s_val[i]) - f_val[i])
            J = dprojection(model, s_val[i]) @ s_diff[i]
            diff_err[i] = np.linalg.norm(J - f_diff[i], 2)
        except ManifoldApproxError:
            if within[i]:
                raise
    nan = np.full(n, np.nan)
    if within.any():
        eps = float(lin_err[within].max())
        sup_lin_d = float(lin_derr[within].max())
        sup_df = float(df_norm[within].max())
        C = diff_constant(tau, eps, sup_lin_d, sup_df)
        bval = np.where(within, value_bound(eps), np.nan)
        bval_pt = np.where(within, 2.0 * lin_err, np.nan)
        bdiff = np.where(within, sup_lin_d + C * lin_err, np.nan)
    else:
        eps = C = float("nan")
        bval = bval_pt = bdiff = nan
    return ErrorReport(
        points=pts2, linear_value_error=lin_err, value_error=val_err, linear_diff_error=lin_derr,
        diff_error=diff_err, within_reach=within, bound_value=bval, bound_value_pointwise=bval_pt,
        bound_diff=bdiff, tau=tau, eps=eps, C=C,
    )
