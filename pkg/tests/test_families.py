import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arcforge.families import (
    DiracParams, SingleFunctionFamily, WalkFamily, decode_network, dirac_family,
    dirac_pushforward_params, find_walk_edge, gamma, h_curve, hilbert, hilbert_gn,
    level_walk, sequence_distance, single_function_measure, walk_measure, walk_prefix,
    walk_vertex,
)
from arcforge.measures import DiscreteMeasure, dirac, prokhorov_exact, pushforward
from arcforge.relu_net import ReluLayer, ReluNetwork

seeds = st.integers(0, 2**32 - 1)


def random_net(rng, d, scale=1.0):
    return ReluNetwork((ReluLayer(scale * rng.normal(size=(d, d)), scale * rng.normal(size=d)),))


# -- Dirac mixtures -----------------------------------------------------------

def test_single_dirac():
    assert dirac_family(DiracParams([[1.0, 2.0]], [1.0])) == dirac([1.0, 2.0])


def test_coinciding_locations_merge():
    mu = dirac_family(DiracParams([[1.0, 1.0], [1.0, 1.0]], [0.5, 0.5]))
    assert len(mu) == 1 and mu.weights[0] == 1.0


def test_off_simplex_rejected():
    with pytest.raises(ValueError):
        DiracParams([[0.0], [1.0]], [0.6, 0.6])
    with pytest.raises(ValueError):
        DiracParams([[0.0], [1.0]], [1.5, -0.5])


def test_identity_layer_keeps_nonnegative_params():
    p = DiracParams([[0.5, 2.0], [1.0, 0.0]], [0.3, 0.7])
    q = dirac_pushforward_params(p, np.eye(2), np.zeros(2))
    assert np.array_equal(q.locations, p.locations)
    assert np.array_equal(q.coeffs, p.coeffs)


def test_zero_weight_layer_collapses():
    p = DiracParams([[0.5, -2.0], [1.0, 3.0]], [0.3, 0.7])
    q = dirac_pushforward_params(p, np.zeros((2, 2)), [0.5, 2.0])
    assert np.all(q.locations == [0.5, 2.0])
    assert dirac_family(q) == dirac([0.5, 2.0])


def test_pushforward_params_dimension_mismatch():
    with pytest.raises(ValueError):
        dirac_pushforward_params(DiracParams([[0.0, 0.0]], [1.0]), np.eye(3), np.zeros(3))


@given(seeds, st.integers(1, 8), st.integers(1, 4))
def test_dirac_family_is_invariant(seed, n, d):
    rng = np.random.default_rng(seed)
    p = DiracParams(rng.normal(size=(n, d)), rng.dirichlet(np.ones(n)))
    W, b = rng.normal(size=(d, d)), rng.normal(size=d)
    lhs = dirac_family(dirac_pushforward_params(p, W, b))
    rhs = pushforward(dirac_family(p), ReluNetwork((ReluLayer(W, b),)))
    # merged weights may be summed in a different order
    assert np.array_equal(lhs.points, rhs.points)
    assert np.allclose(lhs.weights, rhs.weights, rtol=0, atol=1e-15)
    assert prokhorov_exact(lhs, rhs) == 0.0


@given(seeds, st.integers(1, 5))
def test_dirac_parametrisation_is_lipschitz(seed, n):
    rng = np.random.default_rng(seed)
    p = DiracParams(rng.normal(size=(n, 2)), rng.dirichlet(np.ones(n)))
    step = 10.0 ** rng.uniform(-4, -1)
    locs = p.locations + step * rng.normal(size=p.locations.shape)
    c = np.abs(p.coeffs + step * rng.normal(size=n) / n)
    q = DiracParams(locs, c / c.sum())
    dist = np.linalg.norm(p.as_vector() - q.as_vector())
    assert prokhorov_exact(dirac_family(p), dirac_family(q)) <= 2 * dist + 1e-9


# -- Hilbert curve and Gamma --------------------------------------------------

def test_hilbert_endpoints():
    assert hilbert(0.0, 6).tolist() == [0.0, 0.0]
    assert hilbert(1.0, 6).tolist() == [1.0, 0.0]
    assert hilbert_gn(0.0, 2, 6).tolist() == [0.0, 0.0]


def test_hilbert_first_level_cell_order():
    # each quarter of the parameter passes through the centre of its quadrant:
    # lower-left, upper-left, upper-right, lower-right
    centres = hilbert(np.array([1, 3, 5, 7]) / 8, 8)
    assert centres.tolist() == [[0.25, 0.25], [0.25, 0.75], [0.75, 0.75], [0.75, 0.25]]


def test_hilbert_coverage_depth_6():
    pts = hilbert(np.arange(2**12 + 1) / 2**12, 6)
    cells = {tuple(c) for c in np.minimum(np.floor(pts * 16), 15).astype(int)}
    assert len(cells) == 256


def test_hilbert_is_exact_on_grid():
    # consecutive grid points are adjacent cell corners of side 2^-depth
    depth = 5
    pts = hilbert(np.arange(4**depth + 1) / 4**depth, depth)
    steps = np.abs(np.diff(pts, axis=0)).sum(axis=1)
    assert np.all(steps == 2.0**-depth)


@given(st.floats(0, 1), st.integers(1, 10))
def test_hilbert_refinement_error(t, depth):
    fine = hilbert(t, 14)
    assert np.linalg.norm(hilbert(t, depth) - fine) <= np.sqrt(2) * 2.0**-depth + 2 * 2.0**-14


@given(st.floats(0, 1), st.integers(2, 6))
def test_gn_range(t, n):
    p = hilbert_gn(t, n, 5)
    assert p.shape == (n,)
    assert np.all((p >= 0) & (p <= 1))


def test_hilbert_rejects_out_of_range():
    with pytest.raises(ValueError):
        hilbert(1.5, 4)
    with pytest.raises(ValueError):
        hilbert_gn(-0.1, 3, 4)
    with pytest.raises(ValueError):
        hilbert(0.5, 0)


def test_gamma_below_two_is_empty():
    assert gamma(1.5).size == 0
    assert gamma(-7.0).size == 0


@pytest.mark.parametrize("n", range(2, 11))
def test_gamma_vanishes_at_integers(n):
    g = gamma(float(n))
    assert len(g) == n and np.all(g == 0)
    assert np.all(gamma(n - 1e-12) == 0) or np.max(np.abs(gamma(n - 1e-12))) < 1e-6


def test_gamma_ramp_value():
    assert gamma(2.125, 8).tolist() == [-1.0, -1.0]


@given(st.integers(2, 6))
def test_h_curve_ends_at_origin(n):
    out = h_curve([0.0, 0.25, 0.75, 1.0], n, 6)
    assert np.all(out[0] == 0) and np.all(out[3] == 0)
    assert np.all(np.abs(out) <= n)


@settings(max_examples=30)
@given(st.floats(2, 8))
def test_gamma_continuity_improves_with_smaller_steps(t):
    jumps = [sequence_distance(gamma(t + h, 6), gamma(t, 6)) for h in (1e-3, 1e-5, 1e-7)]
    assert jumps[2] <= jumps[0] + 1e-12


def test_sequence_distance_pads():
    assert sequence_distance([1.0, 2.0], [1.0, 2.0, 0.0, 0.0]) == 0.0
    assert sequence_distance([], [0.5]) == 0.5


def test_decode_network():
    seq = np.concatenate([[1.0], [1.0, 0.0, 0.0, 1.0], [0.5, -0.5]])
    net = decode_network(seq, 2)
    assert len(net) == 1
    assert net.layers[0].b.tolist() == [0.5, -0.5]
    assert decode_network([2.0, 1.0, 0.0], 1).layers[1].W.tolist() == [[0.0]]


@pytest.mark.parametrize("seq", [[1.5, 1.0, 0.0], [0.0, 1.0], [-1.0], [], [1.0, 1.0, 0.0, 7.0]])
def test_decode_rejects(seq):
    with pytest.raises(ValueError):
        decode_network(seq, 1)


# -- tree walks ---------------------------------------------------------------

def test_walk_starts_at_root():
    assert walk_vertex(0) == ""


def test_walk_steps_change_length_by_one():
    w = walk_prefix(5000)
    assert all(abs(len(a) - len(b)) == 1 for a, b in zip(w, w[1:]))


def test_level_walk_covers_every_edge_both_ways():
    for k in range(4):
        w = level_walk(k)
        assert w[0] == w[-1] == "0" * k
        steps = set(zip(w, w[1:]))
        inner = ["".join(p) for p in itertools.product("01", repeat=k)]
        outer = ["".join(p) for p in itertools.product("01", repeat=k + 1)]
        edges = {(a, b) for a in inner for b in outer}
        assert edges <= steps and {(b, a) for a, b in edges} <= steps
        assert len(w) - 1 == 2 * len(edges)


def test_level_one_covers_k24():
    w = level_walk(1)
    assert {(a, b) for a, b in zip(w, w[1:]) if len(a) == 1} == {
        (a, b) for a in "01" for b in ("00", "01", "10", "11")}


def test_walk_prefix_concatenates_levels():
    w = walk_prefix(len(level_walk(0)) + len(level_walk(1)))
    assert tuple(w) == level_walk(0) + level_walk(1)


def test_find_walk_edge():
    m = find_walk_edge("0", "01")
    assert walk_vertex(m) == "0" and walk_vertex(m + 1) == "01"
    with pytest.raises(LookupError):
        find_walk_edge("0", "1", limit=100)


@pytest.fixture(scope="module")
def walk_setup():
    rng = np.random.default_rng(11)
    mu = DiscreteMeasure(rng.normal(size=(4, 2)), rng.dirichlet(np.ones(4)))
    return random_net(rng, 2), random_net(rng, 2), mu


def test_walk_measure_at_zero_and_integers(walk_setup):
    f0, f1, mu = walk_setup
    assert walk_measure(0.0, f0, f1, mu) == mu
    fam = WalkFamily((f0, f1), mu)
    assert fam(7.0) == fam.node(walk_vertex(7))
    assert fam.node("01") == pushforward(pushforward(mu, f0), f1)


def test_walk_rejects_mismatched_dimension(walk_setup):
    f0, _, mu = walk_setup
    with pytest.raises(ValueError):
        WalkFamily((f0, ReluNetwork((ReluLayer(np.eye(3), np.zeros(3)),))), mu)


@settings(max_examples=40)
@given(st.floats(0, 20))
def test_walk_family_invariance(walk_setup, t):
    f0, f1, mu = walk_setup
    fam = WalkFamily((f0, f1), mu)
    for i, f in enumerate((f0, f1)):
        image = pushforward(fam(t), f)
        target = fam(fam.image_parameter(t, i))
        assert prokhorov_exact(image, target) == 0.0


@settings(max_examples=40)
@given(st.floats(0, 20), st.floats(0, 20))
def test_walk_family_lipschitz(walk_setup, t1, t2):
    f0, f1, mu = walk_setup
    fam = WalkFamily((f0, f1), mu)
    assert prokhorov_exact(fam(t1), fam(t2)) <= 2 * abs(t1 - t2) + 1e-9


@settings(max_examples=40)
@given(st.floats(0, 12))
def test_single_function_shift(walk_setup, t):
    f0, _, mu = walk_setup
    fam = SingleFunctionFamily(f0, mu)
    assert prokhorov_exact(pushforward(fam(t), f0), fam(t + 1)) == 0.0


def test_single_function_start(walk_setup):
    f0, _, mu = walk_setup
    assert single_function_measure(0.0, f0, mu) == mu
    with pytest.raises(ValueError):
        single_function_measure(-1.0, f0, mu)
