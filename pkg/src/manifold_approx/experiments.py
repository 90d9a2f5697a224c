"""Synthetic manifold-valued test functions and the shipped approximation experiments.

Torus family.  For ``m >= 3`` let ``h_m`` be the periodic function with
Fourier series ``sum_{k>=1} cos(2 pi k t) / k^m`` (``m`` even) or
``sum_{k>=1} sin(2 pi k t) / k^m`` (``m`` odd); it is a rescaled periodic
Bernoulli polynomial, so it is ``C^(m-2)`` and no smoother.  With ``m = r + 2``:

* ``sphere``: ``f = g / |g|`` with ``g = (cos 2 pi t, sin 2 pi t, a h_m(t))``
* ``so3``:    ``f = Rz(2 pi t) Rx(a h_m(t))``

Sphere family.  ``f(x) = u u^T`` with ``u = (b + G x) / |b + G x|``, a smooth
``RP^2``-valued field on ``S^2`` when ``|b| > |G|``.  ``f(x) = x x^T`` is the
band-limited member (degree 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli, comb

from .approximators import (
    sphere_coefficients,
    sphere_eval,
    sphere_eval_dtangent,
    sphere_tangent_frame,
    torus_coefficients,
    torus_eval,
    torus_eval_deriv,
)
from .bounds import (
    build_report,
    fourier_c1,
    fourier_constants,
    fourier_diff_rhs,
    fourier_value_rhs,
    sobolev_norm_torus,
)
from .exceptions import EpsilonExceedsReach
from .harmonics import sphere_quadrature
from .reach import resolve_reach
from .zoo import ProjectiveModel, RotationModel, SphereModel

DENSE_SAMPLES = 2**14
EVAL_POINTS = 4096


def bernoulli_poly(m: int, x) -> np.ndarray:
    """Bernoulli polynomial ``B_m(x)``."""
    b = bernoulli(m)
    x = np.asarray(x, dtype=float)
    return sum(comb(m, j, exact=True) * b[j] * x ** (m - j) for j in range(m + 1))


def periodic_profile(m: int, t, deriv: int = 0) -> np.ndarray:
    """``h_m`` (or its ``deriv``-th derivative) at ``t``; requires ``deriv <= m - 2``."""
    if m < 2:
        raise ValueError("m must be at least 2")
    if deriv > m - 2:
        raise ValueError("h_m is only C^(m-2)")
    x = np.mod(np.asarray(t, dtype=float), 1.0)
    # sum_k e^{2 pi i k t} / k^m over k != 0 equals -(2 pi i)^m / m! B_m({t})
    scale = (2.0 * np.pi) ** m / (2.0 * math.factorial(m))
    sign = (-1) ** (m // 2 + 1)
    q = m - deriv
    poly_factor = math.factorial(m) / math.factorial(q)
    return sign * scale * poly_factor * bernoulli_poly(q, x)


# ---------------------------------------------------------------------------
# torus test functions


@dataclass(frozen=True)
class TorusTestFunction:
    """Manifold-valued function on ``[0, 1)`` with an analytic derivative."""

    manifold: str
    r: int
    amplitude: float = 0.5
    bandlimited: bool = False

    @property
    def m(self) -> int:
        return self.r + 2

    def _h(self, t, deriv=0):
        if self.bandlimited:
            return np.zeros_like(np.asarray(t, dtype=float))
        return self.amplitude * periodic_profile(self.m, t, deriv)

    def values(self, t) -> np.ndarray:
        return self.evaluate(t)[0]

    def evaluate(self, t):
        """``(f(t), f'(t))`` with shapes ``(n, d)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        c, s = np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)
        h, dh = self._h(t), self._h(t, 1)
        if self.manifold == "sphere":
            g = np.stack([c, s, h], axis=1)
            dg = np.stack([-2 * np.pi * s, 2 * np.pi * c, dh], axis=1)
            ng = np.linalg.norm(g, axis=1, keepdims=True)
            f = g / ng
            df = (dg - f * np.sum(f * dg, axis=1, keepdims=True)) / ng
            return f, df
        if self.manifold == "so3":
            Rz = _rot_z(2 * np.pi * t)
            Rx = _rot_x(h)
            dRz = 2 * np.pi * _drot_z(2 * np.pi * t)
            dRx = dh[:, None, None] * _drot_x(h)
            f = Rz @ Rx
            df = dRz @ Rx + Rz @ dRx
            return f.reshape(-1, 9), df.reshape(-1, 9)
        raise ValueError(f"unknown manifold {self.manifold!r}")

    def model(self):
        return SphereModel(3) if self.manifold == "sphere" else RotationModel()


def _rot_z(a):
    c, s, z, o = np.cos(a), np.sin(a), np.zeros_like(a), np.ones_like(a)
    return np.stack([np.stack([c, -s, z], -1), np.stack([s, c, z], -1), np.stack([z, z, o], -1)], -2)


def _drot_z(a):
    c, s, z = np.cos(a), np.sin(a), np.zeros_like(a)
    return np.stack([np.stack([-s, -c, z], -1), np.stack([c, -s, z], -1), np.stack([z, z, z], -1)], -2)


def _rot_x(a):
    c, s, z, o = np.cos(a), np.sin(a), np.zeros_like(a), np.ones_like(a)
    return np.stack([np.stack([o, z, z], -1), np.stack([z, c, -s], -1), np.stack([z, s, c], -1)], -2)


def _drot_x(a):
    c, s, z = np.cos(a), np.sin(a), np.zeros_like(a)
    return np.stack([np.stack([z, z, z], -1), np.stack([z, -s, -c], -1), np.stack([z, c, -s], -1)], -2)


@dataclass
class TorusRow:
    """Observed errors and bounds for one bandwidth."""

    n: int
    sup_linear_value_error: float
    sup_value_error: float
    sup_linear_diff_error: float
    sup_diff_error: float
    value_rhs: float
    diff_rhs: float
    linear_value_rhs: float
    within_reach: int
    points: int
    C1: float
    C2: float
    eps_n: float
    report: object = None

    @property
    def applicable(self) -> bool:
        return math.isfinite(self.diff_rhs)

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k != "report"}


@dataclass
class TorusExperiment:
    func: TorusTestFunction
    tau: float
    sobolev_norm: float
    d: int
    rows: list
    n_min: int | None
    eps_target: float


def run_torus_experiment(
    manifold: str = "sphere",
    r: int = 2,
    n_list=(4, 8, 16, 32, 64),
    amplitude: float = 0.5,
    dense: int = DENSE_SAMPLES,
    points: int = EVAL_POINTS,
    tau: float | None = None,
    seed: int = 0,
    bandlimited: bool = False,
    eps_target: float | None = None,
) -> TorusExperiment:
    """Fourier partial sums of a torus test function, projected onto the manifold.

    Coefficients for every ``n`` come from ``dense`` equispaced samples; errors
    are measured on ``points`` equispaced evaluation points offset by half a
    step.  ``eps_n = C1 n^(1/2 - r) |f^(r)|`` is the a-priori linear error used
    in ``C2``; the theoretical right-hand sides are ``nan`` when ``eps_n``
    is not below the reach.
    """
    func = TorusTestFunction(manifold, r, amplitude, bandlimited)
    model = func.model()
    tau = resolve_reach(model, tau, seed)
    d = model.ambient_dim
    t_dense = np.arange(dense) / dense
    f_dense, _ = func.evaluate(t_dense)
    sob = sobolev_norm_torus(torus_coefficients(f_dense, dense // 2 - 1), r)
    t_eval = (np.arange(points) + 0.5) / points
    C1 = fourier_c1(d, r)
    eps_target = tau / 2.0 if eps_target is None else eps_target
    n_min = fourier_constants(d, r, 1, tau, eps_target, sob)[2] if sob > 0 else 1
    rows = []
    for n in n_list:
        series = torus_coefficients(f_dense, int(n))
        report = build_report(
            model,
            func.evaluate,
            lambda t, s=series: (torus_eval(s, t), torus_eval_deriv(s, t)),
            t_eval,
            tau=tau,
        )
        # the a-priori bound is vacuous for the constant partial sum
        eps_n = C1 * n ** (0.5 - r) * sob if n > 0 else float("inf")
        try:
            _, C2, _ = fourier_constants(d, r, n, tau, eps_n)
            vrhs = fourier_value_rhs(C1, r, n, sob)
            drhs = fourier_diff_rhs(C1, C2, r, n, sob)
        except EpsilonExceedsReach:
            C2 = vrhs = drhs = float("nan")
        summ = report.summary()
        rows.append(
            TorusRow(
                n=int(n),
                sup_linear_value_error=summ["sup_linear_value_error"],
                sup_value_error=summ["sup_value_error"],
                sup_linear_diff_error=summ["sup_linear_diff_error"],
                sup_diff_error=summ["sup_diff_error"],
                value_rhs=vrhs,
                diff_rhs=drhs,
                linear_value_rhs=eps_n,
                within_reach=summ["within_reach"],
                points=summ["points"],
                C1=C1,
                C2=C2,
                eps_n=eps_n,
                report=report,
            )
        )
    return TorusExperiment(func, tau, sob, d, rows, n_min, eps_target)


# ---------------------------------------------------------------------------
# sphere test functions


@dataclass(frozen=True)
class ProjectiveField:
    """``x -> u u^T`` with ``u = normalize(b + G x)``; ``G = I, b = 0`` is band-limited."""

    b: np.ndarray
    G: np.ndarray

    @classmethod
    def random(cls, rng: np.random.Generator, strength: float = 0.6) -> "ProjectiveField":
        b = rng.standard_normal(3)
        b /= np.linalg.norm(b)
        G = rng.standard_normal((3, 3))
        G *= strength / np.linalg.norm(G, 2)
        return cls(b, G)

    @classmethod
    def bandlimited(cls) -> "ProjectiveField":
        return cls(np.zeros(3), np.eye(3))

    def evaluate(self, X, frames=None):
        """Values ``(n, 9)`` and tangential differentials ``(n, 9, 2)``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if frames is None:
            frames = np.array([sphere_tangent_frame(x) for x in X])
        w = self.b + X @ self.G.T
        nw = np.linalg.norm(w, axis=1, keepdims=True)
        u = w / nw
        vals = np.einsum("ni,nj->nij", u, u).reshape(-1, 9)
        diffs = np.empty((len(X), 9, 2))
        for a in range(2):
            dw = frames[:, a] @ self.G.T
            du = (dw - u * np.sum(u * dw, axis=1, keepdims=True)) / nw
            dU = np.einsum("ni,nj->nij", du, u) + np.einsum("ni,nj->nij", u, du)
            diffs[:, :, a] = dU.reshape(-1, 9)
        return vals, diffs


def sphere_test_points(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 3))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


@dataclass
class SphereExperiment:
    L: int
    field: ProjectiveField
    report: object
    series: object
    nodes: int


def run_sphere_experiment(L: int = 8, seed: int = 0, points: int = 2000, bandlimited: bool = False, h: float = 1e-6):
    """Harmonic expansion of an ``RP^2``-valued field, projected back onto ``RP^2``.

    Differentials of the linear approximant use normalized forward quotients
    with step ``h``; the target's differentials are analytic.
    """
    rng = np.random.default_rng(seed)
    field_ = ProjectiveField.bandlimited() if bandlimited else ProjectiveField.random(rng)
    model = ProjectiveModel()
    rule = sphere_quadrature(L)
    vals, _ = field_.evaluate(rule.nodes)
    series = sphere_coefficients(vals, rule, L)
    X = sphere_test_points(points, seed + 1)
    frames = np.array([sphere_tangent_frame(x) for x in X])

    def linear(P):
        S = sphere_eval(series, P)
        dS = np.array([sphere_eval_dtangent(series, x, fr, h) for x, fr in zip(P, frames)])
        return S, dS

    report = build_report(model, lambda P: field_.evaluate(P, frames), linear, X)
    return SphereExperiment(L, field_, report, series, len(rule))
