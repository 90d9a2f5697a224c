"""Sample-based reach estimation and Monte-Carlo checks of the geometric bounds.

Every ``check_*`` function returns a list of :class:`BoundCheckRecord`; use
:func:`summarize` to collapse a list into the JSON-friendly summary the CLI
prints.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ManifoldModel, dprojection, shape_operator
from .exceptions import InsufficientSamples
from .rotations import random_orthogonal

SLACK = 1e-8


@dataclass(frozen=True)
class ReachEstimate:
    value: float
    argmin_pair: tuple
    sample_count: int


@dataclass
class BoundCheckRecord:
    lhs: float
    rhs: float
    inputs: dict = field(default_factory=dict)
    satisfied: bool = True
    bound: str = ""

    @classmethod
    def make(cls, lhs, rhs, inputs=None, bound="", slack=SLACK):
        lhs, rhs = float(lhs), float(rhs)
        return cls(lhs, rhs, inputs or {}, bool(lhs <= rhs + slack), bound)


def estimate_reach(
    model: ManifoldModel, samples, block: int = 64, min_normal: float = 1e-12, rel_normal: float = 1e-7
) -> ReachEstimate:
    """Infimum over sample pairs of ``|x - y|^2 / (2 dist(x - y, T_y M))``.

    Pairs whose normal component is below ``min_normal`` or below
    ``rel_normal`` times the coordinate scale are skipped: the ratio is
    unbounded for tangential pairs, and for near-duplicates the normal
    component is dominated by round-off in ``x - y``.  On nested sample sets
    the estimate is non-increasing.
    """
    X = np.asarray(samples, dtype=float)
    if X.ndim != 2 or len(X) < 2:
        raise InsufficientSamples("need at least two samples")
    n = len(X)
    bases = np.array([model.tangent_basis(x) for x in X])
    floor = max(min_normal, rel_normal * float(np.abs(X).max()))
    best, pair = np.inf, None
    for start in range(0, n, block):
        Y = X[start : start + block]
        T = bases[start : start + block]
        diff = X[None, :, :] - Y[:, None, :]
        coef = np.einsum("bnd,bkd->bnk", diff, T)
        normal = diff - np.einsum("bnk,bkd->bnd", coef, T)
        nn = np.linalg.norm(normal, axis=2)
        dd = np.einsum("bnd,bnd->bn", diff, diff)
        valid = nn >= floor
        ratio = np.full(nn.shape, np.inf)
        ratio[valid] = dd[valid] / (2.0 * nn[valid])
        k = np.unravel_index(np.argmin(ratio), ratio.shape)
        if ratio[k] < best:
            best = float(ratio[k])
            pair = (X[k[1]].copy(), Y[k[0]].copy())
    if pair is None:
        raise InsufficientSamples("all sample pairs were tangential or coincident")
    return ReachEstimate(value=best, argmin_pair=pair, sample_count=n)


def resolve_reach(model: ManifoldModel, tau=None, seed: int = 0, n_samples: int = 2000) -> float:
    """``tau`` if given, else the model's known reach, else a sampled estimate."""
    if tau is not None:
        return float(tau)
    if model.reach is not None:
        return float(model.reach)
    rng = np.random.default_rng(seed)
    return estimate_reach(model, model.sample(n_samples, rng)).value


def _pair(model, rng, tau, near: bool):
    m = model.sample(1, rng)[0]
    if not near:
        return m, model.sample(1, rng)[0]
    step = tau * 10 ** rng.uniform(-4, 0)
    t = model.tangent_basis(m).T @ rng.standard_normal(model.intrinsic_dim)
    return m, model.project(m + step * t / np.linalg.norm(t))


def tangent_projector_gap(model, m, z) -> float:
    """Spectral norm of ``P_{T_m} - P_{T_z}``."""
    return float(np.linalg.norm(model.tangent_projector(m) - model.tangent_projector(z), 2))


def check_tangent_lipschitz(model, trials: int, rng_seed=0, tau=None, slack=SLACK):
    """``|P_{T_m} - P_{T_z}| <= |m - z| / tau`` on random pairs (half of them close)."""
    rng = np.random.default_rng(rng_seed)
    tau = resolve_reach(model, tau, rng_seed)
    out = []
    for k in range(trials):
        m, z = _pair(model, rng, tau, near=k % 2 == 1)
        lhs = tangent_projector_gap(model, m, z)
        rhs = np.linalg.norm(m - z) / tau
        out.append(BoundCheckRecord.make(lhs, rhs, {"m": m.tolist(), "z": z.tolist()}, "tangent-lipschitz", slack))
    return out


def check_dP_deviation(model, trials: int, rng_seed=0, tau=None, max_ratio=0.6, slack=SLACK):
    """Both forms of the bound on ``|dP(m + v) - dP(z)|`` with ``|v| <= max_ratio tau``.

    Two records per trial: ``dP-split`` with right-hand side
    ``|m - z|/tau + |v|/(tau - |v|)`` and ``dP-combined`` with
    ``(2/tau + 1/(tau - |v|)) |m + v - z|``.
    """
    if not 0 <= max_ratio < 1:
        raise ValueError("max_ratio must lie in [0, 1)")
    rng = np.random.default_rng(rng_seed)
    tau = resolve_reach(model, tau, rng_seed)
    out = []
    for k in range(trials):
        m, z = _pair(model, rng, tau, near=k % 3 == 1)
        if k % 3 == 2:
            z = m
        nv = rng.uniform(0.0, max_ratio) * tau
        v = nv * model.random_normal(m, rng)
        lhs = np.linalg.norm(dprojection(model, m + v) - model.tangent_projector(z), 2)
        inputs = {"m": m.tolist(), "v": v.tolist(), "z": z.tolist()}
        rhs1 = np.linalg.norm(m - z) / tau + nv / (tau - nv)
        rhs2 = (2.0 / tau + 1.0 / (tau - nv)) * np.linalg.norm(m + v - z)
        out.append(BoundCheckRecord.make(lhs, rhs1, inputs, "dP-split", slack))
        out.append(BoundCheckRecord.make(lhs, rhs2, inputs, "dP-combined", slack))
    return out


def commutator_pair_norms(T, R):
    """Return ``(|T R - R T|_2, |I - R|_2)`` for stacks of matrices."""
    T = np.asarray(T, dtype=float)
    R = np.asarray(R, dtype=float)
    lhs = np.linalg.norm(T @ R - R @ T, ord=2, axis=(-2, -1))
    rhs = np.linalg.norm(np.eye(R.shape[-1]) - R, ord=2, axis=(-2, -1))
    return lhs, rhs


def _random_projectors(n, dim, rng):
    ranks = rng.integers(1, dim, size=n) if dim > 1 else np.ones(n, int)
    Q = random_orthogonal(n, dim, rng, special=False)
    mask = np.arange(dim)[None, :] < ranks[:, None]
    Qk = Q * mask[:, None, :]
    return Qk @ np.swapaxes(Qk, 1, 2)


def _near_identity_rotations(n, dim, rng):
    A = rng.standard_normal((n, dim, dim)) * 10 ** rng.uniform(-6, -1, size=(n, 1, 1))
    A = A - np.swapaxes(A, 1, 2)
    eye = np.broadcast_to(np.eye(dim), A.shape)
    return np.linalg.solve(eye - A, eye + A)  # Cayley transform


def check_commutator(dim, trials: int, rng_seed=0, slack=1e-12, keep_inputs: bool = False):
    """``|T R - R T| <= |I - R|`` for random orthogonal projectors and rotations.

    ``dim`` may be an int or an iterable of dimensions; trials are split
    evenly between them.  A third of the rotations are near the identity.
    """
    dims = [int(dim)] if np.isscalar(dim) else [int(d) for d in dim]
    if min(dims) < 2:
        raise ValueError("dimension must be at least 2")
    rng = np.random.default_rng(rng_seed)
    out = []
    per = np.full(len(dims), trials // len(dims))
    per[: trials % len(dims)] += 1
    for d, n in zip(dims, per):
        T = _random_projectors(n, d, rng)
        R = random_orthogonal(n, d, rng, special=True)
        near = np.arange(n) % 3 == 2
        if near.any():
            R[near] = _near_identity_rotations(int(near.sum()), d, rng)
        lhs, rhs = commutator_pair_norms(T, R)
        for i in range(n):
            inputs = {"dim": d, "T": T[i].tolist(), "R": R[i].tolist()} if keep_inputs else {"dim": d, "index": i}
            out.append(BoundCheckRecord.make(lhs[i], rhs[i], inputs, "commutator", slack))
    return out


def check_curvature_bound(model, trials: int, rng_seed=0, tau=None, slack=SLACK):
    """Spectral norm of ``B_n`` against ``|n| / tau`` at random ``(m, n)``."""
    rng = np.random.default_rng(rng_seed)
    tau = resolve_reach(model, tau, rng_seed)
    out = []
    for _ in range(trials):
        m = model.sample(1, rng)[0]
        n = rng.uniform(0.0, 2.0) * model.random_normal(m, rng)
        B = shape_operator(model, m, n)
        out.append(
            BoundCheckRecord.make(B.norm(), np.linalg.norm(n) / tau, {"m": m.tolist(), "n": n.tolist()}, "curvature", slack)
        )
    return out


def summarize(records, bound: str | None = None) -> dict:
    """``{bound, trials, violations, max_ratio, argmax_inputs}`` for a record list."""
    if bound is None:
        bound = records[0].bound if records else ""
    ratios = np.array([r.lhs / r.rhs if r.rhs > 0 else (0.0 if r.lhs <= 0 else np.inf) for r in records])
    k = int(np.argmax(ratios)) if len(ratios) else None
    return {
        "bound": bound,
        "trials": len(records),
        "violations": int(sum(not r.satisfied for r in records)),
        "max_ratio": float(ratios[k]) if k is not None else 0.0,
        "argmax_inputs": records[k].inputs if k is not None else {},
    }
