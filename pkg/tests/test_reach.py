import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from manifold_approx.exceptions import InsufficientSamples
from manifold_approx.reach import (
    BoundCheckRecord,
    check_commutator,
    check_curvature_bound,
    check_dP_deviation,
    check_tangent_lipschitz,
    commutator_pair_norms,
    estimate_reach,
    resolve_reach,
    summarize,
    tangent_projector_gap,
)
from manifold_approx.zoo import CircleModel, ProjectiveModel, RotationModel, SphereModel


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_circle_reach_estimate(r):
    model = CircleModel(r)
    est = estimate_reach(model, model.sample(400, np.random.default_rng(0)))
    assert est.value == pytest.approx(r, rel=1e-6)
    assert est.sample_count == 400
    a, b = est.argmin_pair
    assert a.shape == b.shape == (2,)


def test_estimate_reach_never_increases_on_nested_samples():
    model = ProjectiveModel()
    X = model.sample(600, np.random.default_rng(1))
    values = [estimate_reach(model, X[:n]).value for n in (100, 300, 600)]
    assert values[0] >= values[1] >= values[2]


def test_estimate_reach_rp2_from_antipodal_structure():
    model = ProjectiveModel()
    est = estimate_reach(model, model.sample(1500, np.random.default_rng(2))).value
    assert est == pytest.approx(1.0 / math.sqrt(2.0), rel=0.02)


def test_so3_reach_estimate_near_sqrt2():
    # the medial axis of SO(3) contains diag(1, 0, 0), at distance sqrt(2) from I
    model = RotationModel()
    est = estimate_reach(model, model.sample(1500, np.random.default_rng(3))).value
    assert est == pytest.approx(math.sqrt(2.0), rel=0.02)


def test_estimate_reach_needs_two_points():
    with pytest.raises(InsufficientSamples):
        estimate_reach(SphereModel(), np.zeros((1, 3)))


def test_estimate_reach_rejects_coincident_samples():
    with pytest.raises(InsufficientSamples):
        estimate_reach(SphereModel(), np.tile([0.0, 0.0, 1.0], (5, 1)))


def test_resolve_reach_prefers_given_then_known():
    assert resolve_reach(SphereModel(), 0.3) == 0.3
    assert resolve_reach(ProjectiveModel()) == pytest.approx(1.0 / math.sqrt(2.0))


def test_tangent_projector_gap_circle_closed_form():
    model = CircleModel(1.0)
    theta = 0.3
    gap = tangent_projector_gap(model, model.point(0.0), model.point(theta))
    assert gap == pytest.approx(math.sin(theta), abs=1e-12)


@pytest.mark.parametrize("model", [SphereModel(), ProjectiveModel(), CircleModel(0.5)])
def test_tangent_lipschitz_holds(model):
    records = check_tangent_lipschitz(model, 300, rng_seed=4)
    assert summarize(records)["violations"] == 0


def test_tangent_lipschitz_detects_overestimated_reach():
    records = check_tangent_lipschitz(SphereModel(), 300, rng_seed=5, tau=3.0)
    assert summarize(records)["violations"] > 0


@pytest.mark.parametrize("model", [SphereModel(), ProjectiveModel(), CircleModel(2.0)])
def test_dP_deviation_holds(model):
    records = check_dP_deviation(model, 150, rng_seed=6)
    assert len(records) == 300
    assert {r.bound for r in records} == {"dP-split", "dP-combined"}
    assert summarize(records)["violations"] == 0


def test_dP_deviation_rejects_ratio_beyond_reach():
    with pytest.raises(ValueError):
        check_dP_deviation(SphereModel(), 5, max_ratio=1.0)


@given(st.integers(2, 9), st.integers(0, 2**31 - 1))
def test_commutator_bound_property(dim, seed):
    records = check_commutator(dim, 50, rng_seed=seed)
    assert summarize(records)["violations"] == 0


def test_commutator_equality_case():
    # T = diag(1, 0) and a quarter turn: |TR - RT| = 1 while |I - R| = sqrt(2)
    T = np.diag([1.0, 0.0])
    R = np.array([[0.0, -1.0], [1.0, 0.0]])
    lhs, rhs = commutator_pair_norms(T, R)
    assert lhs == pytest.approx(1.0)
    assert rhs == pytest.approx(math.sqrt(2.0))


def test_commutator_splits_trials_over_dimensions():
    records = check_commutator(range(2, 5), 10, keep_inputs=True)
    dims = [r.inputs["dim"] for r in records]
    assert dims.count(2) == 4 and dims.count(3) == 3 and dims.count(4) == 3
    assert np.asarray(records[0].inputs["T"]).shape == (2, 2)
    with pytest.raises(ValueError):
        check_commutator(1, 5)


@pytest.mark.parametrize("model", [SphereModel(), ProjectiveModel()])
def test_curvature_bound_holds(model):
    assert summarize(check_curvature_bound(model, 100, rng_seed=7))["violations"] == 0


def test_summarize_reports_worst_ratio():
    recs = [BoundCheckRecord.make(1.0, 2.0, {"k": 0}), BoundCheckRecord.make(3.0, 2.0, {"k": 1}, slack=0.0)]
    s = summarize(recs, "demo")
    assert s == {"bound": "demo", "trials": 2, "violations": 1, "max_ratio": 1.5, "argmax_inputs": {"k": 1}}
    assert summarize([])["trials"] == 0
