import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from manifold_approx.approximators import torus_coefficients, torus_eval, torus_eval_deriv
from manifold_approx.bounds import (
    SmoothnessData,
    build_report,
    diff_bound,
    diff_constant,
    fourier_c1,
    fourier_constants,
    fourier_diff_rhs,
    fourier_value_rhs,
    minimal_bandwidth,
    sobolev_norm_torus,
    value_bound,
)
from manifold_approx.exceptions import EpsilonExceedsReach
from manifold_approx.experiments import (
    ProjectiveField,
    TorusTestFunction,
    periodic_profile,
    run_sphere_experiment,
    run_torus_experiment,
    sphere_test_points,
)
from manifold_approx.approximators import sphere_tangent_frame
from manifold_approx.zoo import CircleModel

# ---------------------------------------------------------------- constants


def test_value_bound():
    assert value_bound(0.25) == 0.5
    with pytest.raises(ValueError):
        value_bound(-1.0)


def test_diff_constant_formula_and_reach_check():
    assert diff_constant(2.0, 1.0, 0.5, 1.5) == pytest.approx((1.0 + 1.0) * 2.0)
    with pytest.raises(EpsilonExceedsReach):
        diff_constant(1.0, 1.0, 0.1, 1.0)


def test_diff_bound_vectorized():
    out = diff_bound(1.0, 0.5, 0.1, 1.0, np.array([0.0, 0.05]))
    assert np.allclose(out, [0.1, 0.1 + 4.4 * 0.05])


def test_fourier_constants_closed_form():
    d, r, n, tau, eps = 3, 2, 8, 1.0, 0.25
    C1, C2, n_min = fourier_constants(d, r, n, tau, eps)
    assert C1 == pytest.approx(math.sqrt(6) / (2 * math.pi) ** 2)
    expected_C2 = C1 * (2 / tau + 1 / (tau - eps)) * (1 + 2 * math.pi * C1**2 * n ** (1.5 - r))
    assert C2 == pytest.approx(expected_C2)
    assert n_min is None
    with pytest.raises(ValueError):
        fourier_constants(d, 1, n, tau, eps)
    with pytest.raises(EpsilonExceedsReach):
        fourier_constants(d, r, n, tau, 1.0)


@given(st.integers(2, 4), st.floats(1e-3, 1e3), st.floats(1e-3, 1.0))
def test_minimal_bandwidth_is_minimal(r, norm, eps):
    C1 = fourier_c1(3, r)
    n = minimal_bandwidth(C1, r, norm, eps)
    target = C1 * norm / eps
    assert n >= 1
    assert n ** (r - 0.5) >= target
    assert n == 1 or (n - 1) ** (r - 0.5) < target


def test_minimal_bandwidth_requires_positive_eps():
    with pytest.raises(ValueError):
        minimal_bandwidth(1.0, 2, 1.0, 0.0)


def test_fourier_rhs_formulas():
    C1, C2, r, n, F = 0.1, 0.2, 2, 4, 3.0
    assert fourier_value_rhs(C1, r, n, F) == pytest.approx(2 * C1 * n**-1.5 * F)
    assert fourier_diff_rhs(C1, C2, r, n, F) == pytest.approx(2 * math.pi * C1 * n**-0.5 * F + C2 * n**-1.5 * F**2)


def test_sobolev_norm_of_single_mode():
    t = np.arange(64) / 64
    s = torus_coefficients(np.sin(2 * np.pi * 3 * t), 8)
    for r in (2, 3):
        assert sobolev_norm_torus(s, r) == pytest.approx((6 * math.pi) ** r / math.sqrt(2))


def test_smoothness_data_validation():
    SmoothnessData(2, 1.0, 0.1, 0.1)
    with pytest.raises(ValueError):
        SmoothnessData(1, 1.0, 0.1, 0.1)
    with pytest.raises(ValueError):
        SmoothnessData(2, -1.0, 0.1, 0.1)


# ------------------------------------------------------------------ reports


def circle_functions(scale):
    model = CircleModel(1.0)

    def f(t):
        a = 2 * np.pi * t
        return np.stack([np.cos(a), np.sin(a)], 1), 2 * np.pi * np.stack([-np.sin(a), np.cos(a)], 1)

    def lin(t):
        v, d = f(t)
        return scale(t)[:, None] * v, scale(t)[:, None] * d

    return model, f, lin


def test_report_on_radially_scaled_circle():
    model, f, lin = circle_functions(lambda t: 1.0 + 0.2 * np.cos(2 * np.pi * t))
    rep = build_report(model, f, lin, np.linspace(0, 1, 50, endpoint=False))
    assert rep.within_reach.all()
    # radial perturbations project exactly back onto the circle
    assert np.nanmax(rep.value_error) < 1e-14
    assert np.all(rep.margin_value >= 0) and np.all(rep.margin_diff >= 0)
    assert rep.eps == pytest.approx(0.2)
    summ = rep.summary()
    assert summ["points"] == 50 and summ["value_bound"] == pytest.approx(0.4)


def test_report_flags_points_outside_reach():
    model, f, lin = circle_functions(lambda t: 1.0 + 1.5 * np.cos(2 * np.pi * t))
    rep = build_report(model, f, lin, np.linspace(0, 1, 40, endpoint=False))
    assert not rep.within_reach.all()
    assert np.all(np.isnan(rep.bound_diff[~rep.within_reach]))
    assert np.all(np.isfinite(rep.bound_diff[rep.within_reach]))


def test_report_serialization_round_trip():
    model, f, lin = circle_functions(lambda t: 1.1 + 0.0 * t)
    rep = build_report(model, f, lin, np.linspace(0, 1, 8, endpoint=False))
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert len(rows) == 8
    assert float(rows[3]["linear_value_error"]) == rep.linear_value_error[3]
    assert json.loads(rep.to_json())["within_reach"] == 8


# ------------------------------------------------------------- experiments


@pytest.mark.parametrize("m", [3, 4, 5])
def test_periodic_profile_matches_fourier_series(m):
    t = np.linspace(0, 1, 17)
    k = np.arange(1, 20000, dtype=float)[:, None]
    trig = np.cos if m % 2 == 0 else np.sin
    series = np.sum(trig(2 * np.pi * k * t) / k**m, axis=0)
    assert np.allclose(periodic_profile(m, t), series, atol=1e-8)


def test_periodic_profile_derivative_and_limits():
    t = np.linspace(0.05, 0.95, 9)
    h = 1e-6
    fd = (periodic_profile(4, t + h) - periodic_profile(4, t - h)) / (2 * h)
    assert np.allclose(periodic_profile(4, t, 1), fd, atol=1e-6)
    with pytest.raises(ValueError):
        periodic_profile(4, t, 3)
    with pytest.raises(ValueError):
        periodic_profile(1, t)


@pytest.mark.parametrize("manifold", ["sphere", "so3"])
def test_torus_function_derivative_and_manifold_membership(manifold):
    func = TorusTestFunction(manifold, 2)
    t = np.linspace(0.03, 0.97, 11)
    f, df = func.evaluate(t)
    model = func.model()
    assert all(model.contains(v) for v in f)
    h = 1e-6
    fd = (func.values(t + h) - func.values(t - h)) / (2 * h)
    assert np.allclose(df, fd, atol=1e-6)
    with pytest.raises(ValueError):
        TorusTestFunction("torus", 2).evaluate(t)


def test_torus_experiment_rows_and_bounds():
    exp = run_torus_experiment("sphere", 2, n_list=(4, 16), dense=4096, points=512)
    assert [row.n for row in exp.rows] == [4, 16]
    assert exp.n_min >= 1
    for row in exp.rows:
        assert row.applicable
        assert row.sup_value_error <= row.value_rhs
        assert row.sup_diff_error <= row.diff_rhs
        assert row.sup_value_error <= 2 * row.sup_linear_value_error + 1e-12
        assert set(row.as_dict()) >= {"n", "value_rhs", "diff_rhs", "C1", "C2"}
    assert exp.rows[1].sup_value_error < exp.rows[0].sup_value_error


def test_torus_experiment_bandlimited_rows_are_exact():
    exp = run_torus_experiment("so3", 2, n_list=(2,), bandlimited=True, dense=1024, points=256)
    assert np.nanmax(exp.rows[0].report.value_error) < 1e-12
    assert np.nanmax(exp.rows[0].report.diff_error) < 1e-10


def test_tiny_bandwidth_flags_out_of_reach_points():
    exp = run_torus_experiment("sphere", 2, n_list=(0,), amplitude=3.0, dense=1024, points=256)
    row = exp.rows[0]
    assert row.within_reach < row.points
    assert math.isnan(row.value_rhs) and math.isinf(row.eps_n)


def test_projective_field_differential_matches_fd():
    field = ProjectiveField.random(np.random.default_rng(0))
    X = sphere_test_points(6, 1)
    frames = np.array([sphere_tangent_frame(x) for x in X])
    vals, diffs = field.evaluate(X, frames)
    h = 1e-6
    for a in range(2):
        P = X + h * frames[:, a]
        M = X - h * frames[:, a]
        P /= np.linalg.norm(P, axis=1, keepdims=True)
        M /= np.linalg.norm(M, axis=1, keepdims=True)
        fd = (field.evaluate(P, frames)[0] - field.evaluate(M, frames)[0]) / (2 * h)
        assert np.allclose(diffs[:, :, a], fd, atol=1e-6)
    assert np.allclose(vals.reshape(-1, 3, 3), np.swapaxes(vals.reshape(-1, 3, 3), 1, 2))


def test_sphere_experiment_small():
    exp = run_sphere_experiment(L=4, points=100)
    rep = exp.report
    assert exp.nodes == 50
    assert rep.within_reach.all()
    assert np.all(rep.margin_value >= -1e-10) and np.all(rep.margin_diff >= -1e-8)


def test_torus_sampling_is_consistent_with_series_eval():
    func = TorusTestFunction("sphere", 3)
    t = np.arange(256) / 256
    s = torus_coefficients(func.values(t), 20)
    assert np.abs(torus_eval(s, t) - func.values(t)).max() < 1e-3
    assert torus_eval_deriv(s, t).shape == (256, 3)
