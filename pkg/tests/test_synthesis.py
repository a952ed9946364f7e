import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arcforge.arcs import StandardArc, arc_metric, is_delta_distributed, recover_arc, vertices
from arcforge.measures import DiscreteMeasure, dirac, pushforward, uniform
from arcforge.relu_net import ReluNetwork, chain, compose, eval_net
from arcforge.synthesis import (
    NoCoordinate, PartitionPlan, bend_bias, bend_network, bend_scales, bending_trace,
    clip_network, knots_for_arc, partition_support, project_to_axis, resize_network,
    resize_weights, synthesize_arc_transport, verify_transport,
)

seeds = st.integers(0, 2**32 - 1)


def on_axis(xs):
    xs = np.asarray(xs, dtype=float)
    return np.column_stack([xs, np.zeros_like(xs)])


# -- projection ---------------------------------------------------------------

def test_projection_on_diagonal_points():
    m = 4
    mu = uniform([[k, k, k] for k in range(m + 1)])
    layer, axis, sign = project_to_axis(mu, m)
    assert (axis, sign) == (1, 1)
    assert len(pushforward(mu, ReluNetwork((layer,)))) == m + 1


def test_projection_picks_negative_second_axis():
    mu = uniform([[0.0, -1.0], [0.0, -2.0], [0.0, -3.0]])
    _, axis, sign = project_to_axis(mu, 2)
    assert (axis, sign) == (2, -1)


def test_projection_needs_enough_points():
    with pytest.raises(NoCoordinate):
        project_to_axis(uniform([[0.0, 0.0], [1.0, 1.0]]), 4)


def test_projection_counts_positive_values():
    # zero does not help the partition, which isolates m positive values
    mu = uniform([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(NoCoordinate):
        project_to_axis(mu, 2)
    assert project_to_axis(uniform([[2.0, 0.0], [1.0, 0.0]]), 2)[1:] == (1, 1)


@given(seeds)
def test_projection_lands_on_nonnegative_first_axis(seed):
    rng = np.random.default_rng(seed)
    mu = DiscreteMeasure(rng.normal(size=(12, 3)), rng.dirichlet(np.ones(12)))
    layer, _, _ = project_to_axis(mu, 2)
    out = pushforward(mu, ReluNetwork((layer,)))
    assert np.all(out.points[:, 0] >= 0)
    assert np.all(out.points[:, 1:] == 0)


# -- clipping and partition ---------------------------------------------------

@pytest.mark.parametrize("x, expected", [(2.0, 1.0), (0.5, 0.5), (-3.0, 0.0)])
def test_clip_values(x, expected):
    assert eval_net(clip_network(1.0), [x, 0.0]).tolist() == [expected, 0.0]


def test_clip_rejects_nonpositive_bound():
    with pytest.raises(ValueError):
        clip_network(0.0)


@given(st.floats(0.1, 10), st.floats(-20, 20), st.floats(-20, 20))
def test_clip_formula(b, x, y):
    out = eval_net(clip_network(b), [x, y])
    assert out[0] == pytest.approx(min(max(x, 0.0), b), abs=1e-14)
    assert out[1] == 0.0


def test_partition_examples():
    assert partition_support([1.0, 2.0, 3.0], 3).tolist() == [0.0, 1.5, 2.5, 4.0]
    assert partition_support(np.arange(1.0, 8.0), 1).tolist() == [0.0, 2.0]
    with pytest.raises(ValueError):
        partition_support([1.0, 2.0], 3)


@given(st.lists(st.floats(0.01, 50), min_size=2, max_size=30, unique=True), st.data())
def test_partition_isolates_values(values, data):
    s = np.unique(values)
    m = data.draw(st.integers(1, len(s)))
    b = partition_support(values, m)
    assert b[0] == 0 and np.all(np.diff(b) > 0)
    for j in range(1, m + 1):
        assert b[j - 1] < s[j - 1] < b[j]


# -- resize -------------------------------------------------------------------

def test_resize_example():
    plan = PartitionPlan((0.0, 1.0, 2.0), (0.0, 2.0, 3.0))
    assert resize_weights(plan).tolist() == [1.0, -0.5]
    F = resize_network(plan)
    assert np.allclose(eval_net(F, on_axis([0.0, 1.0, 2.0])), on_axis([0.0, 2.0, 3.0]), atol=1e-15)


def test_resize_identity_plan():
    plan = PartitionPlan((0.0, 1.0, 2.5, 4.0), (0.0, 1.0, 2.5, 4.0))
    assert np.all(resize_weights(plan) == 0)
    b = on_axis(plan.breakpoints)
    assert np.array_equal(eval_net(resize_network(plan), b), b)


def test_plan_validation():
    with pytest.raises(ValueError):
        PartitionPlan((0.0, 2.0, 1.0), (0.0, 1.0, 2.0))
    with pytest.raises(ValueError):
        PartitionPlan((0.5, 1.0), (0.0, 1.0))
    with pytest.raises(ValueError):
        resize_network(PartitionPlan((0.0, 1.0), (0.0, 1.0)))


@st.composite
def plans(draw):
    m = draw(st.integers(2, 10))
    gaps_b = draw(st.lists(st.floats(0.05, 3.0), min_size=m, max_size=m))
    gaps_a = draw(st.lists(st.floats(0.05, 3.0), min_size=m, max_size=m))
    return PartitionPlan(tuple(np.concatenate([[0], np.cumsum(gaps_b)])),
                         tuple(np.concatenate([[0], np.cumsum(gaps_a)])))


@given(plans())
def test_resize_hits_knots_and_is_monotone(plan):
    F = resize_network(plan)
    out = eval_net(F, on_axis(plan.breakpoints))
    assert np.allclose(out, on_axis(plan.knots), atol=1e-9, rtol=0)
    grid = np.linspace(0, plan.breakpoints[-1], 10_000)
    y = eval_net(F, on_axis(grid))
    assert np.all(np.diff(y[:, 0]) >= -1e-12)
    assert np.all(y[:, 1] == 0)


# -- bending ------------------------------------------------------------------

def test_bend_m2_example():
    G = bend_network([0.0, 1.0, 2.0], 2)
    out = eval_net(G, on_axis([0.0, 1.0, 2.0]))
    assert np.allclose(out, [[0, 0], [0.5, 0.5], [1.5, 0.5]], atol=1e-15)
    assert np.allclose(bend_scales([0.0, 1.0, 2.0], 2), [math.sqrt(2) / 2, 1.0], rtol=1e-15)


def test_bend_bias_power():
    # the layer that lifts vertex m - j sees it at height cos^(j-1) a_{m-j}
    phi = math.pi / 6
    a = [0.0, 1.0, 2.0, 4.0]
    assert bend_bias(a, 3, 1) == pytest.approx(math.sin(phi) * a[2], rel=1e-15)
    assert bend_bias(a, 3, 3) == pytest.approx(math.sin(phi) * math.cos(phi) ** 2 * a[0], abs=0)


@st.composite
def knots(draw):
    m = draw(st.integers(2, 12))
    gaps = draw(st.lists(st.floats(0.05, 4.0), min_size=m, max_size=m))
    return m, np.concatenate([[0.0], np.cumsum(gaps)])


@given(knots())
def test_bend_maps_knots_to_vertices(mk):
    m, a = mk
    arc = StandardArc(m, bend_scales(a, m) / bend_scales(a, m)[-1])
    raw = bend_scales(a, m)
    out = eval_net(bend_network(a, m), on_axis(a))
    assert out[0].tolist() == [0.0, 0.0]
    assert np.allclose(out, vertices(arc) * raw[-1], atol=1e-9 * max(1, a[-1]))
    assert raw[-1] == pytest.approx(a[-1] - a[-2], rel=1e-12)


@given(knots())
def test_bend_maps_intervals_onto_segments(mk):
    m, a = mk
    G = bend_network(a, m)
    v = eval_net(G, on_axis(a))
    for i in range(m):
        t = np.linspace(0, 1, 7)
        xs = a[i] + t * (a[i + 1] - a[i])
        expected = v[i] + t[:, None] * (v[i + 1] - v[i])
        assert np.allclose(eval_net(G, on_axis(xs)), expected, atol=1e-9 * max(1, a[-1]))


def test_bending_trace_stages():
    trace = bending_trace([0.0, 1.0, 3.0, 4.0], 3, samples=5)
    assert len(trace) == 4
    assert trace[0].shape == (9, 2)


@given(st.integers(2, 12), seeds)
def test_knots_bend_into_target(m, seed):
    rng = np.random.default_rng(seed)
    arc = StandardArc(m, rng.uniform(0.1, 3.0, m - 1))
    a = knots_for_arc(arc)
    assert np.allclose(bend_scales(a, m), arc.scales, rtol=1e-12)
    assert np.allclose(eval_net(bend_network(a, m), on_axis(a)), vertices(arc), atol=1e-9)


def test_resize_then_bend_sends_breakpoints_to_vertices():
    arc = StandardArc(3, [0.5, 2.0])
    plan = PartitionPlan((0.0, 1.0, 2.0, 3.0), tuple(knots_for_arc(arc)))
    net = compose(resize_network(plan), bend_network(plan.knots, 3))
    assert np.allclose(eval_net(net, on_axis(plan.breakpoints)), vertices(arc), atol=1e-12)


# -- end to end ---------------------------------------------------------------

def test_uniform_line_example():
    mu = uniform([[k, 0.0] for k in range(10)])
    arc = StandardArc(3, [2.0, 1.0])
    res = synthesize_arc_transport(mu, arc)
    assert res.delta >= 0.1 - 1e-15
    rep = verify_transport(mu, arc, res)
    assert rep["delta_distributed"]
    assert rep["scale_error"] < 1e-9


def test_dirac_pair_lands_on_distinct_segments():
    mu = DiscreteMeasure([[0.3, 0.0], [1.7, 0.0]], [0.5, 0.5])
    arc = StandardArc(2, [1.5])
    res = synthesize_arc_transport(mu, arc)
    out = pushforward(mu, res.net)
    v = vertices(arc)
    assert len(out) == 2
    assert res.delta == 0.5
    assert is_delta_distributed(out, arc, 0.5)
    # neither atom sits on the shared vertex
    assert np.min(np.linalg.norm(out.points - v[1], axis=1)) > 1e-6


def test_pipeline_is_idempotent_on_its_own_output():
    rng = np.random.default_rng(5)
    mu = DiscreteMeasure(rng.normal(size=(20, 2)), rng.dirichlet(np.ones(20)))
    arc = StandardArc(4, [0.7, 1.9, 0.4])
    first = pushforward(mu, synthesize_arc_transport(mu, arc).net)
    second = pushforward(first, synthesize_arc_transport(first, arc).net)
    assert arc_metric(recover_arc(second, 4, 1e-9), arc) < 1e-9


def test_higher_dimension_matches_plane_build():
    pts = np.array([[0.5, 0.0], [1.0, 0.0], [2.0, 0.0], [3.5, 0.0]])
    arc = StandardArc(3, [1.2, 0.8])
    mu2 = uniform(pts)
    mu4 = uniform(np.pad(pts, ((0, 0), (0, 2))))
    out2 = pushforward(mu2, synthesize_arc_transport(mu2, arc).net)
    out4 = pushforward(mu4, synthesize_arc_transport(mu4, arc).net)
    assert np.array_equal(out4.points[:, :2], out2.points)
    assert np.all(out4.points[:, 2:] == 0)


@settings(max_examples=40)
@given(seeds, st.integers(2, 4), st.integers(10, 50))
def test_stage_contracts(seed, d, n):
    rng = np.random.default_rng(seed)
    mu = DiscreteMeasure(rng.normal(size=(n, d)) * 2, rng.dirichlet(np.ones(n)))
    proj, _, _ = project_to_axis(mu, 2)
    k = len(np.unique(pushforward(mu, ReluNetwork((proj,))).points[:, 0]))
    m = int(rng.integers(2, min(12, k - 1) + 1))
    arc = StandardArc(m, rng.uniform(0.1, 3.0, m - 1))
    res = synthesize_arc_transport(mu, arc)
    proj_net, clip, F, G = res.stages
    b = res.plan.breakpoints
    clipped = pushforward(mu, chain(proj_net, clip))
    assert np.all(clipped.points[:, 0] >= 0) and np.all(clipped.points[:, 0] <= b[-1])
    assert np.all(clipped.points[:, 1:] == 0)
    assert abs(clipped.weights.sum() - 1) <= 1e-12
    pad = np.zeros((m + 1, d))
    pad[:, 0] = b
    assert np.allclose(eval_net(F, pad)[:, 0], res.plan.knots, atol=1e-9, rtol=0)
    out = pushforward(mu, res.net)
    assert res.delta > 0
    assert is_delta_distributed(out, arc, res.delta, 1e-9)
    assert arc_metric(recover_arc(out, m, res.delta), arc) < 1e-9


def test_point_mass_has_no_coordinate():
    with pytest.raises(NoCoordinate):
        synthesize_arc_transport(dirac([1.0, 2.0]), StandardArc(2, [1.0]))


def test_one_dimensional_measure_rejected():
    with pytest.raises(ValueError):
        synthesize_arc_transport(uniform([[0.0], [1.0], [2.0]]), StandardArc(2, [1.0]))
