import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from deagrey import dataset
from deagrey.dea import (DeaInstance, DeaOptions, Orientation, Rts, RtsBoundaryWarning,
                         RtsClass, SlackStage, classify_rts, decompose, evaluate_all,
                         evaluate_dmu, project)
from deagrey.errors import ValidationError
from oracles import dea_oracle

CRS_IN = DeaOptions(Orientation.INPUT, Rts.CRS)
VRS_IN = DeaOptions(Orientation.INPUT, Rts.VRS)


def test_two_dmu_crs_input(two_dmu):
    s = evaluate_dmu(two_dmu, 1, CRS_IN)
    assert s.score == pytest.approx(dea_oracle([[1, 2]], [[1, 1]], 1), abs=1e-12)
    assert s.score == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(s.lambdas, [1.0, 0.0], atol=1e-12)
    assert [x.score for x in evaluate_all(two_dmu, CRS_IN)] == pytest.approx([1.0, 0.5])


def test_two_dmu_decomposition(two_dmu):
    # B is dominated by A under both frontiers, so all of B's loss is technical
    pte = dea_oracle([[1, 2]], [[1, 1]], 1, rts="vrs")
    assert pte == pytest.approx(0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RtsBoundaryWarning)
        d = decompose(two_dmu, 1)
    assert (d.te, d.pte) == pytest.approx((0.5, pte))
    assert d.se == pytest.approx(1.0)
    assert d.rts_class is RtsClass.CONSTANT and d.boundary


def test_two_dmu_tie_rule_warns(two_dmu):
    s = evaluate_dmu(two_dmu, 1, CRS_IN)
    assert s.sum_lambda == 1.0
    with pytest.warns(RtsBoundaryWarning):
        assert classify_rts(s) is RtsClass.CONSTANT


def test_two_dmu_projection(two_dmu):
    t = project(two_dmu, evaluate_dmu(two_dmu, 1, CRS_IN))
    np.testing.assert_allclose(t.target_inputs, [1.0], atol=1e-12)
    np.testing.assert_allclose(t.target_outputs, [1.0], atol=1e-12)


def test_self_reference_is_efficient(rng):
    X = rng.uniform(1, 10, (2, 5))
    Y = rng.uniform(1, 10, (2, 5))
    inst = DeaInstance(list("abcde"), X, Y)
    for k in range(5):
        s = evaluate_dmu(inst, k, VRS_IN, reference=[k])
        assert s.score == pytest.approx(1.0, abs=1e-12)
        assert s.lambdas[k] == pytest.approx(1.0)
        assert np.allclose(s.input_slacks, 0) and np.allclose(s.output_slacks, 0)
        assert s.efficient


def test_identical_dmus_all_efficient():
    inst = DeaInstance(list("abcd"), np.full((2, 4), 3.0), np.full((1, 4), 2.0))
    for opts in (CRS_IN, VRS_IN, DeaOptions("output", "crs"), DeaOptions("output", "vrs")):
        assert all(abs(s.score - 1) < 1e-12 for s in evaluate_all(inst, opts))


def test_efficient_unit_decomposes_to_one():
    inst = DeaInstance(list("abc"), [[1.0, 2.0, 4.0]], [[1.0, 3.0, 4.0]])
    d = decompose(inst, 1)
    assert (d.te, d.pte, d.se) == pytest.approx((1.0, 1.0, 1.0))
    assert d.rts_class is RtsClass.CONSTANT and not d.boundary


def test_efficient_projection_is_identity():
    inst = DeaInstance(list("abc"), [[1.0, 2.0, 4.0]], [[1.0, 3.0, 4.0]])
    s = evaluate_dmu(inst, 1, CRS_IN)
    t = project(inst, s)
    np.testing.assert_allclose(t.target_inputs, inst.inputs[:, 1], atol=1e-9)
    np.testing.assert_allclose(t.target_outputs, inst.outputs[:, 1], atol=1e-9)


def test_irs_and_drs_classification():
    # one input, one output; the ray through b = (2, 4) is the CRS frontier
    inst = DeaInstance(list("abcd"), [[1.0, 2.0, 4.0, 1.0]], [[1.0, 4.0, 5.0, 0.5]])
    small = evaluate_dmu(inst, 3, CRS_IN)
    big = evaluate_dmu(inst, 2, CRS_IN)
    assert classify_rts(small) is RtsClass.INCREASING
    assert classify_rts(big) is RtsClass.DECREASING


def test_classify_needs_crs(two_dmu):
    with pytest.raises(ValidationError):
        classify_rts(evaluate_dmu(two_dmu, 0, VRS_IN))


def test_two_stage_maximises_slack():
    # c is radially efficient (theta = 1) under CRS but carries an input-2 slack
    X = [[1.0, 1.0], [1.0, 2.0]]
    Y = [[1.0, 1.0]]
    inst = DeaInstance(["a", "c"], X, Y)
    s2 = evaluate_dmu(inst, 1, DeaOptions("input", "crs", "two-stage"))
    assert s2.score == pytest.approx(1.0)
    assert s2.input_slacks[1] == pytest.approx(1.0)
    assert not s2.efficient


def test_output_orientation_score():
    inst = DeaInstance(["a", "b"], [[1.0, 1.0]], [[2.0, 1.0]])
    s = evaluate_dmu(inst, 1, DeaOptions("output", "crs"))
    assert s.score == pytest.approx(2.0)
    assert s.efficiency == pytest.approx(0.5)
    t = project(inst, s)
    np.testing.assert_allclose(t.target_outputs, [2.0])


@pytest.mark.parametrize("X, Y, match", [
    ([[1.0, 0.0]], [[1.0, 1.0]], "nonpositive"),
    ([[1.0, -1.0]], [[1.0, 1.0]], "nonpositive"),
    ([[1.0, 1.0]], [[1.0, 0.0]], "positive output"),
    ([[1.0]], [[1.0]], "at least 2"),
])
def test_instance_validation(X, Y, match):
    names = ["a", "b"][:len(X[0])]
    with pytest.raises(ValidationError, match=match):
        DeaInstance(names, X, Y)


def test_zero_replacement_policy():
    inst = DeaInstance(["a", "b", "c"], [[0.0, 2.0, 4.0]], [[1.0, 1.0, 1.0]],
                       zero_policy="replace")
    assert inst.inputs[0, 0] == pytest.approx(2e-6)


def test_bad_index(two_dmu):
    with pytest.raises(ValidationError):
        evaluate_dmu(two_dmu, 2)


def test_states_tx_is_efficient():
    inst = dataset.build_dea_instance(dataset.load_states_2009(), dataset.states_2009_spec())
    tx = inst.dmu_names.index("TX")
    assert evaluate_dmu(inst, tx, CRS_IN).score == pytest.approx(1.0, abs=1e-9)
    assert evaluate_dmu(inst, tx, VRS_IN).score == pytest.approx(1.0, abs=1e-9)
    d = decompose(inst, tx)
    assert d.rts_class is RtsClass.CONSTANT


def test_states_vrs_unit_entries():
    inst = dataset.build_dea_instance(dataset.load_states_2009(), dataset.states_2009_spec())
    scores = dict(zip(inst.dmu_names, (s.score for s in evaluate_all(inst, VRS_IN))))
    assert scores["TX"] == pytest.approx(1.0, abs=1e-9)
    assert scores["NM"] == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("state", ["AZ", "CA", "NM"])
def test_states_increasing_returns(state):
    inst = dataset.build_dea_instance(dataset.load_states_2009(), dataset.states_2009_spec())
    s = evaluate_dmu(inst, inst.dmu_names.index(state), CRS_IN)
    assert classify_rts(s) is RtsClass.INCREASING


# ---------------------------------------------------------------- properties

@st.composite
def instances(draw, max_n=8, max_dim=3):
    n = draw(st.integers(2, max_n))
    w = draw(st.integers(1, max_dim))
    q = draw(st.integers(1, max_dim))
    vals = st.floats(1.0, 10.0, allow_nan=False)
    X = draw(arrays(float, (w, n), elements=vals))
    Y = draw(arrays(float, (q, n), elements=vals))
    return DeaInstance([f"d{j}" for j in range(n)], X, Y)


@settings(max_examples=60, deadline=None)
@given(instances(max_n=4), st.sampled_from(["input", "output"]), st.sampled_from(["crs", "vrs"]))
def test_oracle_equivalence(inst, orientation, rts):
    assume(inst.w + inst.q <= 3)
    for k in range(inst.n):
        s = evaluate_dmu(inst, k, DeaOptions(orientation, rts))
        ref = dea_oracle(inst.inputs, inst.outputs, k, orientation, rts)
        assert abs(s.score - ref) <= 1e-7


@settings(max_examples=40, deadline=None)
@given(instances(), st.sampled_from(["input", "output"]))
def test_score_invariants(inst, orientation):
    for rts in ("crs", "vrs"):
        for s in evaluate_all(inst, DeaOptions(orientation, rts)):
            if orientation == "input":
                assert 0 < s.score <= 1 + 1e-9
            else:
                assert s.score >= 1 - 1e-9
            assert s.lambdas.min() >= -1e-9
            assert s.input_slacks.min() >= -1e-9 and s.output_slacks.min() >= -1e-9
            if rts == "vrs":
                assert abs(s.sum_lambda - 1) <= 1e-7
            x0 = inst.inputs[:, s.dmu_index]
            y0 = inst.outputs[:, s.dmu_index]
            if orientation == "input":
                assert np.all(inst.inputs @ s.lambdas <= s.score * x0 + 1e-6)
                assert np.all(inst.outputs @ s.lambdas >= y0 - 1e-6)
            t = project(inst, s)
            np.testing.assert_allclose(inst.inputs @ s.lambdas, t.target_inputs,
                                       atol=1e-6, rtol=1e-9)
            np.testing.assert_allclose(inst.outputs @ s.lambdas, t.target_outputs,
                                       atol=1e-6, rtol=1e-9)
            assert np.all(t.target_inputs <= x0 + 1e-9)
            assert np.all(t.target_outputs >= y0 - 1e-9)


@settings(max_examples=40, deadline=None)
@given(instances())
def test_crs_below_vrs_and_decomposition(inst):
    for k in range(inst.n):
        d = decompose(inst, k)
        te = evaluate_dmu(inst, k, CRS_IN).score
        pte = evaluate_dmu(inst, k, VRS_IN).score
        assert te <= pte + 1e-7
        assert abs(d.te - d.pte * d.se) <= 1e-9
        assert abs(d.se - te / pte) <= 1e-9
        assert 0 < d.se <= 1 + 1e-9


@settings(max_examples=30, deadline=None)
@given(instances(), st.floats(0.1, 10.0), st.booleans(), st.data())
def test_units_invariance(inst, c, scale_input, data):
    rows = inst.w if scale_input else inst.q
    i = data.draw(st.integers(0, rows - 1))
    X, Y = inst.inputs.copy(), inst.outputs.copy()
    (X if scale_input else Y)[i] *= c
    scaled = DeaInstance(inst.dmu_names, X, Y)
    for opts in (CRS_IN, VRS_IN):
        a = [s.score for s in evaluate_all(inst, opts)]
        b = [s.score for s in evaluate_all(scaled, opts)]
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-6)


@settings(max_examples=30, deadline=None)
@given(instances(max_n=7), st.data())
def test_dominated_dmu_never_helps(inst, data):
    j = data.draw(st.integers(0, inst.n - 1))
    bump = data.draw(st.floats(0.0, 2.0))
    shrink = data.draw(st.floats(0.5, 1.0))
    x = inst.inputs[:, j].copy()
    x[0] += bump + 0.1
    y = inst.outputs[:, j] * shrink
    bigger = inst.with_dmu("dom", x, y)
    for opts in (CRS_IN, VRS_IN):
        before = [s.score for s in evaluate_all(inst, opts)]
        after = [evaluate_dmu(bigger, k, opts).score for k in range(inst.n)]
        assert all(a <= b + 1e-7 for a, b in zip(after, before))
