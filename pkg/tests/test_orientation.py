import math
import warnings

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from manifold_approx.exceptions import (
    AllMasked,
    AmbiguousLog,
    IllConditionedPullback,
    MalformedRow,
    MaskedNeighbor,
    NonRectangular,
    ProjectionFailed,
)
from manifold_approx.orientation import (
    OrientationDenoiser,
    OrientationGrid,
    SkewBasis,
    SmoothFieldSpec,
    _pullback,
    curvature_fd,
    curvature_from_smooth,
    embed_grid,
    grid_anchor,
    grid_to_text,
    ingest_grid,
    misorientation_angles,
    project_image,
    read_grid_text,
    representatives,
    smooth_and_project,
    synthesize_grid,
    twist_field,
    write_grid,
)
from manifold_approx.rotations import exp_skew
from manifold_approx.symmetry import symmetry_group

HEADER = "i,j,qw,qx,qy,qz,mask\n"


def rel_rms(a, b):
    num = np.sqrt(np.mean(np.sum((a - b) ** 2, axis=(-2, -1))))
    return num / np.sqrt(np.mean(np.sum(b**2, axis=(-2, -1))))


def smooth_grid(seed=0, dims=(64, 64), symmetry="C1"):
    spec = SmoothFieldSpec(amplitude_deg=10.0, max_freq=1)
    return synthesize_grid(dims, spec, noise_deg=0.0, mask_fraction=0.0, seed=seed, symmetry=symmetry)


# ------------------------------------------------------------------ basis


def test_skew_basis_round_trip_and_orthogonality():
    c = np.array([0.3, -1.2, 2.0])
    W = SkewBasis.matrix(c)
    assert np.allclose(W, -W.T)
    assert np.allclose(SkewBasis.coords(W), c)
    gram = np.einsum("aij,bij->ab", SkewBasis.matrices, SkewBasis.matrices)
    assert np.allclose(gram, 2 * np.eye(3))


# ----------------------------------------------------------------- ingest


def test_ingest_identity_grid():
    text = HEADER + "".join(f"{i},{j},1,0,0,0,0\n" for i in range(2) for j in range(2))
    grid = read_grid_text(text)
    assert grid.dims == (2, 2)
    assert np.allclose(grid.rotations(), np.eye(3))
    assert not grid.mask.any()


def test_ingest_masked_row():
    rows = [f"{i},{j},1,0,0,0,{int(i == 1)}\n" for i in range(3) for j in range(2)]
    grid = read_grid_text(HEADER + "".join(rows))
    assert grid.mask.tolist() == [[False, False], [True, True], [False, False]]


def test_write_ingest_round_trip_is_bit_identical(tmp_path):
    grid, _ = synthesize_grid((7, 5), noise_deg=3.0, mask_fraction=0.2, seed=4, symmetry="O")
    path = tmp_path / "grid.csv"
    write_grid(grid, path)
    back = ingest_grid(path, symmetry="O")
    assert np.array_equal(back.mask, grid.mask)
    assert np.array_equal(back.quats[~grid.mask], grid.quats[~grid.mask])
    # masked cells come back as identities, after which the text is stable
    write_grid(back, path)
    assert grid_to_text(ingest_grid(path, symmetry="O")) == grid_to_text(back)


def test_unnormalized_quaternions_are_normalized():
    grid = read_grid_text(HEADER + "0,0,2,0,0,0,0\n")
    assert np.allclose(grid.quats[0, 0], [1, 0, 0, 0])


@pytest.mark.parametrize(
    "text",
    [
        "i,j,w,x,y,z,mask\n0,0,1,0,0,0,0\n",
        HEADER + "0,0,1,0,0,0\n",
        HEADER + "0,0,1,0,0,0,2\n",
        HEADER + "0,0,1,0,0,zz,0\n",
        HEADER + "0,0,0,0,0,0,0\n",
        HEADER + "-1,0,1,0,0,0,0\n",
        "",
    ],
)
def test_malformed_rows(text):
    with pytest.raises(MalformedRow):
        read_grid_text(text)


def test_non_rectangular_grids():
    with pytest.raises(NonRectangular):
        read_grid_text(HEADER + "0,0,1,0,0,0,0\n1,1,1,0,0,0,0\n")
    with pytest.raises(NonRectangular):
        read_grid_text(HEADER + "0,0,1,0,0,0,0\n0,0,1,0,0,0,0\n")
    with pytest.raises(NonRectangular):
        read_grid_text(HEADER)


def test_all_masked_grid_rejected():
    with pytest.raises(AllMasked):
        read_grid_text(HEADER + "0,0,1,0,0,0,1\n0,1,1,0,0,0,1\n")


# -------------------------------------------------------------- synthesis


def test_noise_free_unmasked_c1_grid_equals_truth():
    grid, truth = synthesize_grid((8, 6), noise_deg=0.0, mask_fraction=0.0, seed=2, symmetry="C1")
    assert np.allclose(grid.rotations(), truth.rotations, atol=1e-12)
    assert not grid.mask.any()


def test_constant_field_has_zero_curvature():
    _, truth = synthesize_grid((6, 6), SmoothFieldSpec(amplitude_deg=0.0), noise_deg=1.0, seed=1)
    assert np.all(truth.kappa == 0.0)


def test_synthetic_curvature_matches_finite_differences_of_truth():
    spacing = (0.5, 0.25)
    _, truth = synthesize_grid((40, 40), SmoothFieldSpec(amplitude_deg=5.0), noise_deg=0.0, seed=6, spacing=spacing)
    R = truth.rotations
    for axis in (0, 1):
        sl = [slice(1, -1), slice(1, -1)]
        fwd = np.roll(R, -1, axis=axis)[1:-1, 1:-1]
        bwd = np.roll(R, 1, axis=axis)[1:-1, 1:-1]
        dR = (fwd - bwd) / (2 * spacing[axis])
        W = np.einsum("...ji,...jk->...ik", R[tuple(sl)], dR)
        assert np.allclose(SkewBasis.coords(W), truth.kappa[1:-1, 1:-1, :, axis], atol=2e-2 * np.abs(truth.kappa).max())


def test_mean_misorientation_of_synthetic_noise():
    grid, truth = synthesize_grid((64, 64), noise_deg=2.0, mask_fraction=0.05, seed=3, symmetry="O")
    ang = np.degrees(misorientation_angles(truth.rotations, grid.rotations(), "O"))[~grid.mask]
    # angles of isotropic Gaussian rotation vectors follow a Maxwell law
    expected = 2.0 / math.sqrt(3.0) * 2.0 * math.sqrt(2.0 / math.pi)
    assert np.mean(ang) == pytest.approx(expected, rel=0.05)
    assert grid.mask.sum() == round(0.05 * 64 * 64)


def test_synthesis_validation():
    with pytest.raises(ValueError):
        synthesize_grid((4, 4), noise_deg=-1.0)
    with pytest.raises(ValueError):
        synthesize_grid((4, 4), mask_fraction=1.0)


# -------------------------------------------------------------- embedding


def test_embedding_of_identity_cell_is_identity():
    grid = OrientationGrid.from_rotations(np.broadcast_to(np.eye(3), (2, 2, 3, 3)), symmetry="O")
    image = embed_grid(grid)
    assert np.allclose(image.reshape(2, 2, 3, 3), np.eye(3))


def test_symmetry_element_embeds_as_identity():
    G = symmetry_group("O")
    R = np.broadcast_to(np.eye(3), (3, 3, 3, 3)).copy()
    R[1, 2] = G[5]
    R[0, 0] = G[17]
    grid = OrientationGrid.from_rotations(R, symmetry="O")
    image = embed_grid(grid, anchor=np.eye(3))
    assert np.allclose(image.reshape(3, 3, 3, 3), np.eye(3), atol=1e-12)


def test_embedding_invariant_under_right_group_action():
    grid, _ = synthesize_grid((10, 10), noise_deg=2.0, mask_fraction=0.1, seed=5, symmetry="D6")
    G = symmetry_group("D6")
    moved = grid.rotations() @ G[np.random.default_rng(0).integers(0, len(G), size=grid.dims)]
    other = OrientationGrid.from_rotations(moved, grid.mask, symmetry="D6")
    anchor = grid_anchor(grid)
    assert np.allclose(grid_anchor(other), anchor, atol=1e-12)
    assert np.allclose(embed_grid(grid, anchor), embed_grid(other, anchor), atol=1e-12)


def test_embedding_warns_when_far_from_anchor():
    R = np.stack([np.eye(3), exp_skew(np.array([0.0, 0.0, 0.5]))]).reshape(1, 2, 3, 3)
    grid = OrientationGrid.from_rotations(R, symmetry="O")
    with pytest.warns(RuntimeWarning):
        embed_grid(grid, anchor=np.eye(3))


def test_masked_cells_embed_as_zero():
    grid, _ = synthesize_grid((6, 6), noise_deg=0.0, mask_fraction=0.2, seed=1, symmetry="C1")
    image = embed_grid(grid)
    assert np.all(image[grid.mask] == 0.0)


# -------------------------------------------------------------- smoothing


def test_zero_smoothing_reproduces_input():
    grid, _ = synthesize_grid((12, 10), noise_deg=2.0, mask_fraction=0.0, seed=7, symmetry="C1")
    image = embed_grid(grid)
    out = smooth_and_project(image, 0.0)
    assert np.allclose(out.rotations(), grid.rotations(), atol=1e-9)


def test_constant_grid_unchanged():
    R = exp_skew(np.array([0.1, 0.2, -0.3]))
    grid = OrientationGrid.from_rotations(np.broadcast_to(R, (8, 8, 3, 3)))
    for s in (0.0, 10.0):
        out = smooth_and_project(embed_grid(grid), s)
        assert np.allclose(out.rotations(), R, atol=1e-12)


def test_gcv_smoothing_reduces_misorientation():
    grid, truth = synthesize_grid((32, 32), noise_deg=2.0, mask_fraction=0.05, seed=8, symmetry="O")
    den = OrientationDenoiser()
    out = den.fit_transform(grid)
    valid = ~grid.mask
    raw = misorientation_angles(truth.rotations, grid.rotations(), "O")[valid]
    smooth = misorientation_angles(truth.rotations, out.rotations(), "O")
    assert np.mean(smooth) < 0.5 * np.mean(raw)
    assert den.smoothing_ > 0.0


def test_masked_cells_are_inpainted():
    grid, truth = synthesize_grid((20, 20), noise_deg=0.0, mask_fraction=0.1, seed=9, symmetry="C1")
    out = OrientationDenoiser(smoothing=0.0).fit_transform(grid)
    assert not out.mask.any()
    ang = misorientation_angles(truth.rotations, out.rotations())[grid.mask]
    assert np.degrees(ang.max()) < 0.5


def test_project_image_failures():
    with pytest.raises(ProjectionFailed):
        project_image(np.zeros((2, 2, 9)))
    ambiguous = np.diag([1.0, 0.5, -0.5]).reshape(1, 1, 9)
    with pytest.raises(ProjectionFailed):
        project_image(ambiguous)


# -------------------------------------------------------------- curvature


def test_constant_field_has_zero_smoothed_and_fd_curvature():
    R = exp_skew(np.array([0.4, 0.0, 0.2]))
    grid = OrientationGrid.from_rotations(np.broadcast_to(R, (6, 7, 3, 3)))
    _, series = smooth_and_project(embed_grid(grid), 1.0, return_series=True)
    assert np.abs(curvature_from_smooth(series, grid).kappa).max() < 1e-12
    assert np.abs(curvature_fd(grid).kappa).max() < 1e-12


def test_twist_field_recovered_by_smooth_curvature():
    alpha = 0.02
    grid, exact = twist_field((32, 32), alpha=alpha)
    image, anchor = embed_grid(grid, return_anchor=True)
    _, series = smooth_and_project(image, 0.0, anchor=anchor, return_series=True)
    k = curvature_from_smooth(series, grid).kappa
    assert np.abs(k[..., 2, 0] - alpha).max() <= 0.02 * alpha
    others = k.copy()
    others[..., 2, 0] = 0.0
    assert np.abs(others).max() <= 1e-6
    assert np.allclose(curvature_from_smooth(series, grid, cell=(3, 4)), k[3, 4])


def test_twist_field_fd_is_second_order():
    errors = []
    for N in (16, 32, 64):
        grid, exact = twist_field((N, 4), spacing=(1 / N, 1 / N), alpha=0.5, wobble=0.05)
        errors.append(np.abs(curvature_fd(grid).kappa - exact).max())
    assert errors[0] / errors[1] >= 3.5 and errors[1] / errors[2] >= 3.5


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_smooth_and_fd_curvature_agree_on_noise_free_fields(seed):
    grid, truth = smooth_grid(seed)
    den = OrientationDenoiser(smoothing=0.0).fit(grid)
    k_smooth = den.curvature().kappa
    k_fd = curvature_fd(grid).kappa
    assert rel_rms(k_smooth, k_fd) <= 0.02
    assert rel_rms(k_smooth, truth.kappa) <= 0.02


def test_smooth_curvature_improves_on_fd_for_noisy_grid():
    grid, truth = synthesize_grid((48, 48), noise_deg=2.0, mask_fraction=0.05, seed=10, symmetry="O")
    den = OrientationDenoiser().fit(grid)
    _, kappa = truth.in_gauge(representatives(grid, den.anchor_), "O")
    fd = curvature_fd(grid, anchor=den.anchor_)
    smooth = den.curvature()
    valid = fd.valid
    err_fd = np.sqrt(np.mean(np.sum((fd.kappa - kappa)[valid] ** 2, axis=(1, 2))))
    err_smooth = np.sqrt(np.mean(np.sum((smooth.kappa - kappa)[valid] ** 2, axis=(1, 2))))
    assert err_smooth <= 0.5 * err_fd


def test_pullback_rejects_degenerate_rotation():
    with pytest.raises(IllConditionedPullback):
        _pullback(np.zeros((3, 3)), np.zeros((9, 2)))


def test_fd_masked_cell_and_isolated_cell():
    rows = [f"{i},{j},1,0,0,0,{int((i, j) in {(1, 1), (0, 1), (1, 0)})}\n" for i in range(3) for j in range(3)]
    grid = read_grid_text(HEADER + "".join(rows))
    with pytest.raises(MaskedNeighbor):
        curvature_fd(grid, cell=(1, 1))
    with pytest.raises(MaskedNeighbor):
        curvature_fd(grid, cell=(0, 0))
    field = curvature_fd(grid)
    assert not field.valid[0, 0] and not field.valid[1, 1]
    assert np.allclose(curvature_fd(grid, cell=(2, 2)), 0.0)


def test_fd_detects_half_turn_neighbours():
    R = np.stack([np.eye(3), np.diag([1.0, -1.0, -1.0])]).reshape(2, 1, 3, 3)
    grid = OrientationGrid.from_rotations(R)
    with pytest.raises(AmbiguousLog):
        curvature_fd(grid)


def test_curvature_csv_lists_valid_cells():
    grid, _ = twist_field((4, 3), alpha=0.1)
    text = curvature_fd(grid).to_csv().splitlines()
    assert text[0] == "i,j,k11,k12,k21,k22,k31,k32"
    assert len(text) == 1 + 12
    assert float(text[1].split(",")[6]) == pytest.approx(0.1)


# -------------------------------------------------------------- estimator


def test_denoiser_api():
    grid, _ = synthesize_grid((16, 16), noise_deg=2.0, mask_fraction=0.1, seed=11, symmetry="O")
    den = OrientationDenoiser(smoothing=0.5, pad=2)
    assert den.get_params() == {"smoothing": 0.5, "n_grid": 20, "detrend": True, "pad": 2}
    with pytest.raises(NotFittedError):
        den.transform(grid)
    with pytest.raises(NotFittedError):
        den.curvature()
    a = den.fit_transform(grid)
    b = den.transform(grid)
    assert np.allclose(a.rotations(), b.rotations(), atol=1e-12)
    assert den.n_inpainted_ == int(grid.mask.sum())
    assert den.curvature().kappa.shape == (16, 16, 3, 2)
    with pytest.raises(TypeError):
        den.fit(np.zeros((4, 4, 4)))
    with pytest.raises(ValueError):
        OrientationDenoiser(smoothing="auto").fit(grid)
    with pytest.raises(ValueError):
        OrientationDenoiser(smoothing=-1.0).fit(grid)
    with pytest.raises(ValueError):
        OrientationDenoiser(pad=-1).fit(grid)


def test_denoiser_handles_grids_smaller_than_pad():
    grid, _ = synthesize_grid((3, 2), noise_deg=1.0, mask_fraction=0.0, seed=12, symmetry="C1")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        out = OrientationDenoiser(smoothing=0.0, pad=8).fit_transform(grid)
    assert np.allclose(out.rotations(), grid.rotations(), atol=1e-9)
