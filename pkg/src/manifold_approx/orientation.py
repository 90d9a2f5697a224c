"""Denoising of gridded crystal orientation maps and lattice curvature.

Pipeline
--------
1. :func:`embed_grid` maps every cell ``R`` to the flattened coset member
   ``R g`` (``g`` in the point group) closest to a common anchor orientation.
2. :func:`~manifold_approx.approximators.cosine_smooth` smooths the resulting
   ``R^9``-valued image and fills cells without data.
3. :func:`smooth_and_project` projects the smoothed matrices back onto
   ``SO(3)``.
4. :func:`curvature_from_smooth` pulls the analytic image gradient back
   through the embedding; :func:`curvature_fd` is the finite-difference
   alternative working directly on the raw orientations.

Curvature ``kappa`` is a ``3 x 2`` matrix per cell: column ``j`` holds the
coordinates of ``R^T dR/dx_j`` in the skew basis, in radians per length unit
of the grid spacing.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .approximators import CosineGridSeries, cosine_smooth, select_smoothing
from .exceptions import (
    AllMasked,
    AmbiguousLog,
    IllConditionedPullback,
    MalformedRow,
    MaskedNeighbor,
    NonRectangular,
    ProjectionFailed,
)
from .rotations import SKEW_BASIS, exp_skew, log_skew, matrix_to_quat, quat_to_matrix, rotation_angle, skew
from .symmetry import min_symmetry_angle, symmetry_group
from .zoo import quotient_representative

GRID_HEADER = ["i", "j", "qw", "qx", "qy", "qz", "mask"]
CURVATURE_HEADER = ["i", "j", "k11", "k12", "k21", "k22", "k31", "k32"]
LOG_AMBIGUITY = 1e-6
PULLBACK_COND = 1e8
EDGE_PAD = 4


class SkewBasis:
    """The three fixed skew-symmetric matrices ``s^(1), s^(2), s^(3)``."""

    matrices = SKEW_BASIS

    @staticmethod
    def coords(W) -> np.ndarray:
        """Coordinates of a skew matrix (``<W, s_a> / 2``)."""
        return np.einsum("...ij,aij->...a", np.asarray(W, dtype=float), SKEW_BASIS) / 2.0

    @staticmethod
    def matrix(c) -> np.ndarray:
        return skew(c)


@dataclass(frozen=True)
class OrientationGrid:
    """Unit quaternions ``(w, x, y, z)`` on an ``N1 x N2`` grid.

    ``mask`` is ``True`` on cells without data; their quaternion is ignored.
    """

    quats: np.ndarray
    mask: np.ndarray
    spacing: tuple = (1.0, 1.0)
    symmetry: str = "C1"

    def __post_init__(self):
        q = np.asarray(self.quats, dtype=float)
        mask = np.asarray(self.mask, dtype=bool)
        if q.ndim != 3 or q.shape[2] != 4 or mask.shape != q.shape[:2]:
            raise ValueError("quats must be (N1, N2, 4) with a matching (N1, N2) mask")
        if mask.all():
            raise AllMasked("every cell is masked")
        norms = np.linalg.norm(q[~mask], axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise ValueError("quaternions must have unit norm")
        object.__setattr__(self, "quats", q)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "spacing", tuple(float(h) for h in self.spacing))
        object.__setattr__(self, "symmetry", str(self.symmetry).upper())

    @property
    def dims(self) -> tuple:
        return self.quats.shape[:2]

    def rotations(self) -> np.ndarray:
        """Rotation matrices, shape ``(N1, N2, 3, 3)``; masked cells give the identity."""
        q = np.where(self.mask[:, :, None], np.array([1.0, 0.0, 0.0, 0.0]), self.quats)
        return quat_to_matrix(q)

    @classmethod
    def from_rotations(cls, R, mask=None, spacing=(1.0, 1.0), symmetry="C1") -> "OrientationGrid":
        R = np.asarray(R, dtype=float)
        mask = np.zeros(R.shape[:2], dtype=bool) if mask is None else mask
        return cls(matrix_to_quat(R), mask, spacing, symmetry)


@dataclass(frozen=True)
class CurvatureField:
    """Per-cell ``3 x 2`` lattice curvature; ``valid`` is ``False`` where it is undefined."""

    kappa: np.ndarray
    valid: np.ndarray

    def rms(self, reference=None) -> float:
        """Root mean square of ``kappa`` (or of ``kappa - reference``) over valid cells."""
        k = self.kappa if reference is None else self.kappa - np.asarray(reference)
        k = k[self.valid]
        return float(np.sqrt(np.mean(np.sum(k * k, axis=(1, 2))))) if len(k) else float("nan")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CURVATURE_HEADER)
        N1, N2 = self.valid.shape
        for i in range(N1):
            for j in range(N2):
                if self.valid[i, j]:
                    writer.writerow([i, j, *map(repr, self.kappa[i, j].reshape(6).tolist())])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# input / output


def _parse_row(row, lineno):
    if len(row) != 7:
        raise MalformedRow(f"line {lineno}: expected 7 fields, got {len(row)}")
    try:
        i, j = int(row[0]), int(row[1])
        q = np.array([float(v) for v in row[2:6]])
        mask = int(row[6])
    except ValueError as exc:
        raise MalformedRow(f"line {lineno}: {exc}") from None
    if mask not in (0, 1):
        raise MalformedRow(f"line {lineno}: mask must be 0 or 1")
    if i < 0 or j < 0:
        raise MalformedRow(f"line {lineno}: negative cell index")
    if not mask and (not np.all(np.isfinite(q)) or np.linalg.norm(q) < 1e-12):
        raise MalformedRow(f"line {lineno}: quaternion is zero or not finite")
    return i, j, q, bool(mask)


def read_grid_text(text: str, spacing=(1.0, 1.0), symmetry: str = "C1") -> OrientationGrid:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != GRID_HEADER:
        raise MalformedRow(f"header must be {','.join(GRID_HEADER)}")
    cells = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not v.strip() for v in row):
            continue
        i, j, q, m = _parse_row(row, lineno)
        if (i, j) in cells:
            raise NonRectangular(f"line {lineno}: duplicate cell ({i}, {j})")
        cells[(i, j)] = (q, m)
    if not cells:
        raise NonRectangular("no cells")
    N1 = max(i for i, _ in cells) + 1
    N2 = max(j for _, j in cells) + 1
    if len(cells) != N1 * N2:
        raise NonRectangular(f"{len(cells)} cells do not fill a {N1} x {N2} rectangle")
    quats = np.zeros((N1, N2, 4))
    quats[:, :, 0] = 1.0
    mask = np.zeros((N1, N2), dtype=bool)
    for (i, j), (q, m) in cells.items():
        mask[i, j] = m
        if not m:
            n = np.linalg.norm(q)
            # leave already-normalized input untouched so files round-trip exactly
            quats[i, j] = q if abs(n - 1.0) <= 1e-14 else q / n
    if mask.all():
        raise AllMasked("every cell is masked")
    return OrientationGrid(quats, mask, spacing, symmetry)


def ingest_grid(path, spacing=(1.0, 1.0), symmetry: str = "C1") -> OrientationGrid:
    """Read a grid CSV with header ``i,j,qw,qx,qy,qz,mask``."""
    with open(path, newline="", encoding="utf-8") as fh:
        return read_grid_text(fh.read(), spacing, symmetry)


def grid_to_text(grid: OrientationGrid) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(GRID_HEADER)
    N1, N2 = grid.dims
    for i in range(N1):
        for j in range(N2):
            q = grid.quats[i, j]
            writer.writerow([i, j, *map(repr, q.tolist()), int(grid.mask[i, j])])
    return buf.getvalue()


def write_grid(grid: OrientationGrid, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(grid_to_text(grid))


# ---------------------------------------------------------------------------
# synthetic data


@dataclass(frozen=True)
class SmoothFieldSpec:
    """Band-limited skew field ``c(x) = sum_m a_m cos(2 pi <k_m, x / L> + phi_m)``.

    ``x`` is the physical position, ``L`` the physical extent of the grid and
    ``k_m`` integer frequency pairs up to ``max_freq``.  The rotation field
    is ``R0 exp(skew(c(x)))``.  ``amplitude_deg = 0`` gives a constant field.
    """

    amplitude_deg: float = 15.0
    n_modes: int = 4
    max_freq: int = 2
    base: tuple | None = None


@dataclass
class SyntheticTruth:
    """Clean rotations, their curvature and the mask used by :func:`synthesize_grid`."""

    rotations: np.ndarray
    kappa: np.ndarray
    mask: np.ndarray

    def in_gauge(self, reference, symmetry: str):
        """Rotations and curvature re-expressed for the coset members in ``reference``.

        Curvature is defined up to the choice of coset member: replacing ``R``
        by ``R g`` turns ``R^T dR`` into ``g^T (R^T dR) g``.  The single group
        element ``g`` that best maps the clean field onto ``reference`` (for
        instance :func:`representatives` of the noisy grid) is applied to both.
        """
        G = symmetry_group(symmetry)
        ref = np.asarray(reference, dtype=float).reshape(-1, 3, 3)
        score = np.einsum("nij,nik,gkj->g", ref, self.rotations.reshape(-1, 3, 3), G)
        g = G[int(np.argmax(score))]
        return self.rotations @ g, skew_frame_rotate(self.kappa, g)


def skew_frame_rotate(kappa, g) -> np.ndarray:
    """Skew coordinates of ``g^T W g`` for every column ``W`` of ``kappa`` (..., 3, 2)."""
    sign = np.array([1.0, -1.0, 1.0])
    M = sign[:, None] * np.asarray(g).T * sign[None, :]
    return np.einsum("ab,...bj->...aj", M, kappa)


def _right_jacobian(w):
    """``J_r(w)`` for rotation vectors ``w`` of shape ``(..., 3)``."""
    theta = np.linalg.norm(w, axis=-1)[..., None, None]
    K = np.zeros(w.shape[:-1] + (3, 3))
    K[..., 0, 1], K[..., 0, 2], K[..., 1, 2] = -w[..., 2], w[..., 1], -w[..., 0]
    K = K - np.swapaxes(K, -1, -2)
    small = theta < 1e-6
    t = np.where(small, 1.0, theta)
    a = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(t)) / t**2)
    b = np.where(small, 1.0 / 6.0 - theta**2 / 120.0, (t - np.sin(t)) / t**3)
    return np.eye(3) - a * K + b * (K @ K)


def _field_from_coords(c, dc, R0):
    """Rotations ``R0 exp(skew(c))`` and curvature from ``c`` and its partials ``dc`` (..., 3, 2)."""
    sign = np.array([1.0, -1.0, 1.0])
    w = c * sign
    J = _right_jacobian(w)
    kappa = sign[:, None] * np.einsum("...ab,...bj->...aj", J, sign[:, None] * dc)
    return R0 @ exp_skew(c), kappa


def smooth_field(dims, spacing, spec: SmoothFieldSpec, rng: np.random.Generator):
    """Rotations ``(N1, N2, 3, 3)`` and analytic curvature ``(N1, N2, 3, 2)``."""
    N1, N2 = dims
    h1, h2 = spacing
    x1 = np.arange(N1)[:, None] * h1
    x2 = np.arange(N2)[None, :] * h2
    L1, L2 = N1 * h1, N2 * h2
    R0 = quat_to_matrix(np.asarray(spec.base, dtype=float)) if spec.base is not None else exp_skew(rng.normal(size=3))
    c = np.zeros((N1, N2, 3))
    dc = np.zeros((N1, N2, 3, 2))
    amp = np.deg2rad(spec.amplitude_deg)
    if amp > 0:
        for _ in range(spec.n_modes):
            k = rng.integers(0, spec.max_freq + 1, size=2)
            a = rng.normal(size=3)
            a *= amp / (np.linalg.norm(a) * spec.n_modes)
            phi = rng.uniform(0, 2 * np.pi)
            arg = 2 * np.pi * (k[0] * x1 / L1 + k[1] * x2 / L2) + phi
            c += np.cos(arg)[..., None] * a
            dc[..., 0] += (-np.sin(arg) * 2 * np.pi * k[0] / L1)[..., None] * a
            dc[..., 1] += (-np.sin(arg) * 2 * np.pi * k[1] / L2)[..., None] * a
    return _field_from_coords(c, dc, R0)


def synthesize_grid(
    dims=(64, 64),
    spec: SmoothFieldSpec | None = None,
    noise_deg: float = 2.0,
    mask_fraction: float = 0.05,
    seed: int = 0,
    symmetry: str = "O",
    spacing=(1.0, 1.0),
):
    """Noisy, partially masked, symmetry-scrambled grid and its ground truth.

    Each cell is ``R_true exp(skew(e)) g`` with ``e`` Gaussian of standard
    deviation ``noise_deg / sqrt(3)`` per axis (so the RMS misorientation is
    ``noise_deg``) and ``g`` a uniformly drawn element of the point group.
    Exactly ``round(mask_fraction * N1 * N2)`` cells are masked.
    """
    if noise_deg < 0:
        raise ValueError("noise_deg must be nonnegative")
    if not 0 <= mask_fraction < 1:
        raise ValueError("mask_fraction must lie in [0, 1)")
    spec = SmoothFieldSpec() if spec is None else spec
    rng = np.random.default_rng(seed)
    R_true, kappa = smooth_field(dims, spacing, spec, rng)
    N1, N2 = dims
    sigma = np.deg2rad(noise_deg) / np.sqrt(3.0)
    noise = exp_skew(rng.normal(scale=sigma, size=(N1, N2, 3))) if sigma > 0 else np.eye(3)
    G = symmetry_group(symmetry)
    g = G[rng.integers(0, len(G), size=(N1, N2))]
    R_obs = R_true @ noise @ g
    mask = np.zeros(N1 * N2, dtype=bool)
    mask[rng.choice(N1 * N2, size=int(round(mask_fraction * N1 * N2)), replace=False)] = True
    mask = mask.reshape(N1, N2)
    grid = OrientationGrid.from_rotations(R_obs, mask, spacing, symmetry)
    return grid, SyntheticTruth(R_true, kappa, mask)


def twist_field(dims=(32, 32), spacing=(1.0, 1.0), alpha: float = 0.02, wobble: float = 0.0, symmetry: str = "C1"):
    """``R(x) = exp(phi(x_1) s^(3))`` with ``phi = alpha x_1 + wobble sin(2 pi x_1 / L_1)``.

    Returns the grid and the exact curvature; only ``kappa[..., 2, 0]`` is
    nonzero and equals ``phi'(x_1)``.
    """
    N1, N2 = dims
    h1 = spacing[0]
    L1 = N1 * h1
    x1 = np.arange(N1) * h1
    phi = alpha * x1 + wobble * np.sin(2 * np.pi * x1 / L1)
    dphi = alpha + wobble * 2 * np.pi / L1 * np.cos(2 * np.pi * x1 / L1)
    c = np.zeros((N1, N2, 3))
    c[:, :, 2] = phi[:, None]
    kappa = np.zeros((N1, N2, 3, 2))
    kappa[:, :, 2, 0] = dphi[:, None]
    R = exp_skew(c)
    return OrientationGrid.from_rotations(R, None, spacing, symmetry), kappa


def misorientation_angles(R_a, R_b, symmetry: str = "C1") -> np.ndarray:
    """Smallest rotation angle of ``R_a^T R_b g`` over the point group, per cell."""
    G = symmetry_group(symmetry)
    rel = np.einsum("...ji,...jk->...ik", R_a, R_b)
    tr = np.einsum("...ij,gji->...g", rel, G)
    return np.arccos(np.clip((tr.max(axis=-1) - 1.0) / 2.0, -1.0, 1.0))


# ---------------------------------------------------------------------------
# embedding and smoothing


def _quat_mean(R) -> np.ndarray:
    q = matrix_to_quat(R)
    M = q.T @ q
    _, V = np.linalg.eigh(M)
    return quat_to_matrix(V[:, -1])


def grid_anchor(grid: OrientationGrid, max_iter: int = 10) -> np.ndarray:
    """Average orientation used to select coset representatives.

    Alternates representative selection and the quaternion mean (top
    eigenvector of ``sum q q^T``) until the representatives stop changing,
    then replaces the mean by its own coset member closest to the identity
    so the result does not depend on which members the cells were given in.
    """
    G = symmetry_group(grid.symmetry)
    R = grid.rotations()[~grid.mask]
    anchor = R[0]
    reps = quotient_representative(R, G, anchor)
    for _ in range(max_iter):
        anchor = _quat_mean(reps)
        new = quotient_representative(R, G, anchor)
        if np.allclose(new, reps, atol=1e-12):
            break
        reps = new
    return quotient_representative(anchor, G, np.eye(3))


def representatives(grid: OrientationGrid, anchor=None) -> np.ndarray:
    """Coset members closest to the anchor, shape ``(N1, N2, 3, 3)`` (identity on masked cells)."""
    anchor = grid_anchor(grid) if anchor is None else np.asarray(anchor, dtype=float)
    G = symmetry_group(grid.symmetry)
    out = np.broadcast_to(np.eye(3), grid.dims + (3, 3)).copy()
    out[~grid.mask] = quotient_representative(grid.rotations()[~grid.mask], G, anchor)
    return out


def embed_grid(grid: OrientationGrid, anchor=None, return_anchor: bool = False):
    """``R^9``-valued image of anchor-relative coset representatives.

    Masked cells hold zeros.  A warning is issued when some cell lies farther
    from the anchor than a quarter of the smallest symmetry rotation angle,
    where the embedding stops being locally isometric on the quotient.
    """
    anchor = grid_anchor(grid) if anchor is None else np.asarray(anchor, dtype=float)
    reps = representatives(grid, anchor)
    limit = min_symmetry_angle(symmetry_group(grid.symmetry)) / 4.0
    dist = rotation_angle(np.einsum("ji,...jk->...ik", anchor, reps[~grid.mask]))
    if np.isfinite(limit) and np.any(dist >= limit):
        warnings.warn(
            f"orientations reach {np.degrees(dist.max()):.1f} deg from the anchor; "
            f"the embedding is only reliable below {np.degrees(limit):.1f} deg",
            RuntimeWarning,
            stacklevel=2,
        )
    image = reps.reshape(grid.dims + (9,)).copy()
    image[grid.mask] = 0.0
    return (image, anchor) if return_anchor else image


def project_image(values) -> np.ndarray:
    """Closest rotation per cell of an ``(N1, N2, 9)`` image."""
    A = np.asarray(values, dtype=float).reshape(-1, 3, 3)
    U, s, Vt = np.linalg.svd(A)
    if np.any(s[:, -1] < 1e-10):
        raise ProjectionFailed("a smoothed cell matrix is rank deficient")
    d = np.sign(np.linalg.det(U @ Vt))
    bad = (d < 0) & (s[:, 1] - s[:, 2] < 1e-10)
    if np.any(bad):
        raise ProjectionFailed("a smoothed cell has no unique closest rotation")
    D = np.ones((len(A), 3))
    D[:, 2] = d
    R = np.einsum("nij,nj,njk->nik", U, D, Vt)
    return R.reshape(np.shape(values)[:-1] + (3, 3))


def smooth_image(image, mask=None, s="gcv", detrend: bool = True, pad: int = EDGE_PAD) -> CosineGridSeries:
    """Cosine-series smoothing of the embedded image (``s="gcv"`` selects it).

    An affine trend is removed first and the grid is extended by ``pad``
    cells of odd reflection, both by default, so that curvature stays nearly
    unbiased up to the grid boundary.  GCV runs on the unextended image.
    ``pad`` is reduced on grids too small to reflect it.
    """
    if isinstance(s, str):
        if s != "gcv":
            raise ValueError("smoothing must be a nonnegative number or 'gcv'")
        s = select_smoothing(image, mask, detrend=detrend)
    return cosine_smooth(image, mask, float(s), detrend=detrend, pad=_fit_pad(pad, np.shape(image)[:2]))


def _fit_pad(pad, dims) -> int:
    if pad < 0:
        raise ValueError("pad must be nonnegative")
    return int(min(pad, min(dims) - 1))


def smooth_and_project(
    image,
    s,
    symmetry: str = "C1",
    mask=None,
    spacing=(1.0, 1.0),
    anchor=None,
    return_series=False,
    detrend=True,
    pad: int = EDGE_PAD,
):
    """Smooth the embedded image, project every cell onto ``SO(3)`` and return the grid.

    The output has no masked cells: cells without data are inpainted by the
    smoother.  With ``anchor`` given, each output cell is replaced by its
    coset member closest to it.
    """
    series = smooth_image(image, mask, s, detrend, pad)
    R = project_image(series.values())
    if anchor is not None:
        G = symmetry_group(symmetry)
        R = quotient_representative(R.reshape(-1, 3, 3), G, anchor).reshape(R.shape)
    out = OrientationGrid.from_rotations(R, None, spacing, symmetry)
    return (out, series) if return_series else out


# ---------------------------------------------------------------------------
# curvature


def _pullback(R, grad, cond_limit=PULLBACK_COND):
    """``(DE DE^T)^{-1} DE Du`` with rows of ``DE`` the flattened ``R s_a``."""
    DE = np.einsum("...ij,ajk->...aik", R, SKEW_BASIS).reshape(R.shape[:-2] + (3, 9))
    gram = DE @ np.swapaxes(DE, -1, -2)
    cond = np.linalg.cond(gram)
    if np.any(cond > cond_limit):
        raise IllConditionedPullback(f"condition number {np.max(cond):.3e}")
    return np.linalg.solve(gram, DE @ grad)


def curvature_from_smooth(series: CosineGridSeries, grid: OrientationGrid, cell=None):
    """Curvature from the analytic gradient of the smoothed image.

    Returns a ``3 x 2`` matrix for ``cell = (i, j)``, or a
    :class:`CurvatureField` over the whole grid when ``cell`` is ``None``.
    The rotation in the pullback is the projection of the smoothed value.
    """
    grad = series.gradient(grid.spacing)
    values = series.values()
    if cell is not None:
        i, j = cell
        R = project_image(values[i, j][None, None])[0, 0]
        return _pullback(R, grad[i, j])
    R = project_image(values)
    kappa = _pullback(R, grad)
    return CurvatureField(kappa, np.ones(grid.dims, dtype=bool))


def _relative_logs(R, mask, G, axis, step):
    """Skew coordinates of the reduced ``log(R_x^T R_{x + step e_axis})``; ``nan`` where undefined."""
    N = R.shape[axis]
    out = np.full(R.shape[:2] + (3,), np.nan)
    if abs(step) >= N:
        return out
    src = [slice(None), slice(None)]
    dst = [slice(None), slice(None)]
    if step > 0:
        src[axis], dst[axis] = slice(0, N - step), slice(step, N)
    else:
        src[axis], dst[axis] = slice(-step, N), slice(0, N + step)
    A, B = R[tuple(src)], R[tuple(dst)]
    ok = ~mask[tuple(src)] & ~mask[tuple(dst)]
    rel = np.einsum("...ji,...jk->...ik", A, B)
    # reduce by the point group: pick the member with the largest trace
    tr = np.einsum("...ij,gji->...g", rel, G)
    best = G[np.argmax(tr, axis=-1)]
    rel = rel @ best
    angle = rotation_angle(rel)
    if np.any(ok & (angle >= np.pi - LOG_AMBIGUITY)):
        raise AmbiguousLog("neighbouring cells are misoriented by nearly pi")
    logs = log_skew(rel)
    logs[~ok] = np.nan
    out[tuple(src)] = logs
    return out


def _fd_component(L, h):
    """Second-order stencils from logs ``L[k]`` to the neighbour at offset ``k``."""
    central = (L[1] - L[-1]) / (2 * h)
    fwd3 = (4 * L[1] - L[2]) / (2 * h)
    bwd3 = -(4 * L[-1] - L[-2]) / (2 * h)
    fwd2 = L[1] / h
    bwd2 = -L[-1] / h
    out = central
    for alt in (fwd3, bwd3, fwd2, bwd2):
        out = np.where(np.isnan(out), alt, out)
    return out


def curvature_fd(grid: OrientationGrid, cell=None, anchor=None):
    """Finite-difference curvature from log maps of neighbouring orientations.

    Cells are first replaced by their anchor-relative coset representatives.
    Central differences are used where both neighbours have data, three-point
    one-sided stencils on edges, and two-point quotients as a last resort.
    Returns a ``3 x 2`` matrix for ``cell = (i, j)`` or a :class:`CurvatureField`.
    """
    G = symmetry_group(grid.symmetry)
    R = representatives(grid, anchor)
    kappa = np.empty(grid.dims + (3, 2))
    for axis in (0, 1):
        logs = {k: _relative_logs(R, grid.mask, G, axis, k) for k in (-2, -1, 1, 2)}
        kappa[..., axis] = _fd_component(logs, grid.spacing[axis])
    valid = ~grid.mask & ~np.isnan(kappa).any(axis=(2, 3))
    if cell is not None:
        i, j = cell
        if grid.mask[i, j]:
            raise MaskedNeighbor(f"cell {cell} has no data")
        if not valid[i, j]:
            raise MaskedNeighbor(f"no finite-difference stencil with data around cell {cell}")
        return kappa[i, j]
    kappa[~valid] = 0.0
    return CurvatureField(kappa, valid)


# ---------------------------------------------------------------------------
# estimator


class OrientationDenoiser(TransformerMixin, BaseEstimator):
    """Smooth-then-project denoiser for :class:`OrientationGrid` inputs.

    Parameters
    ----------
    smoothing : float or "gcv"
        Penalty of the cosine smoother; ``"gcv"`` picks it during :meth:`fit`.
    n_grid : int
        Number of log-spaced candidates searched by GCV.
    detrend : bool
        Remove an affine trend from the embedded image before smoothing.
    pad : int
        Width of the odd-reflection extension applied before smoothing.

    Attributes
    ----------
    anchor_ : ndarray of shape (3, 3)
    smoothing_ : float
    series_ : CosineGridSeries
        Smoothed embedding of the grid passed to :meth:`fit`.
    n_inpainted_ : int
        Number of cells without data that received a value.
    """

    def __init__(self, smoothing="gcv", n_grid: int = 20, detrend: bool = True, pad: int = EDGE_PAD):
        self.smoothing = smoothing
        self.n_grid = n_grid
        self.detrend = detrend
        self.pad = pad

    def fit(self, X, y=None):
        grid = _check_grid(X)
        image, self.anchor_ = embed_grid(grid, return_anchor=True)
        if isinstance(self.smoothing, str):
            if self.smoothing != "gcv":
                raise ValueError("smoothing must be a nonnegative number or 'gcv'")
            self.smoothing_ = select_smoothing(image, grid.mask, self.n_grid, self.detrend)
        else:
            if self.smoothing < 0:
                raise ValueError("smoothing must be nonnegative")
            self.smoothing_ = float(self.smoothing)
        self.series_ = cosine_smooth(
            image, grid.mask, self.smoothing_, detrend=self.detrend, pad=_fit_pad(self.pad, grid.dims)
        )
        self.grid_ = grid
        self.n_inpainted_ = int(grid.mask.sum())
        return self

    def transform(self, X):
        check_is_fitted(self, "smoothing_")
        grid = _check_grid(X)
        image = embed_grid(grid, anchor=self.anchor_)
        return smooth_and_project(
            image,
            self.smoothing_,
            grid.symmetry,
            grid.mask,
            grid.spacing,
            self.anchor_,
            detrend=self.detrend,
            pad=self.pad,
        )

    def fit_transform(self, X, y=None):
        self.fit(X)
        R = project_image(self.series_.values())
        G = symmetry_group(self.grid_.symmetry)
        R = quotient_representative(R.reshape(-1, 3, 3), G, self.anchor_).reshape(R.shape)
        return OrientationGrid.from_rotations(R, None, self.grid_.spacing, self.grid_.symmetry)

    def curvature(self) -> CurvatureField:
        """Curvature of the fitted smoothed field."""
        check_is_fitted(self, "series_")
        return curvature_from_smooth(self.series_, self.grid_)


def _check_grid(X) -> OrientationGrid:
    if not isinstance(X, OrientationGrid):
        raise TypeError(f"expected an OrientationGrid, got {type(X).__name__}")
    return X
