"""Seeded random fixtures shared by the CLI, the experiment scripts and the tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arcs import StandardArc, arc_measure, arc_metric, segment_masses
from .measures import DiscreteMeasure, prokhorov_exact
from .relu_net import ReluLayer, ReluNetwork, layer_1d
from .rng import SplitMix64


def random_measure(rng: SplitMix64, n_atoms: int, d: int, scale: float = 2.0) -> DiscreteMeasure:
    return DiscreteMeasure(scale * rng.normal((n_atoms, d)), rng.simplex(n_atoms))


def random_arc(rng: SplitMix64, m: int, lo: float = 0.2, hi: float = 3.0) -> StandardArc:
    return StandardArc(m, rng.uniform(lo, hi, size=m - 1))


def random_layer(rng: SplitMix64, d: int, scale: float = 1.0) -> ReluLayer:
    return ReluLayer(scale * rng.normal((d, d)), scale * rng.normal(d))


def random_network(rng: SplitMix64, d: int, depth: int, scale: float = 1.0) -> ReluNetwork:
    return ReluNetwork(tuple(random_layer(rng, d, scale) for _ in range(depth)))


def random_net_1d(rng: SplitMix64, max_layers: int = 10, bound: float = 3.0) -> ReluNetwork:
    n = rng.integers(1, max_layers)
    return ReluNetwork(tuple(layer_1d(rng.uniform(-bound, bound), rng.uniform(-bound, bound))
                             for _ in range(n)))


@dataclass(frozen=True)
class ArcFixture:
    arc: StandardArc
    mu: DiscreteMeasure
    delta: float


def random_arc_fixture(rng: SplitMix64, m: int, per_segment: int = 2, d: int = 2) -> ArcFixture:
    """A measure with atoms inside every segment of a random arc.

    Fractions stay away from the vertices so each atom belongs to one segment.
    """
    arc = random_arc(rng, m)
    idx = np.repeat(np.arange(1, m + 1), per_segment)
    frac = rng.uniform(0.05, 0.95, size=len(idx))
    mu = arc_measure(arc, frac, rng.simplex(len(idx)), idx, d)
    return ArcFixture(arc, mu, float(np.min(segment_masses(mu, arc))))


@dataclass(frozen=True)
class LipschitzPair:
    m: int
    delta: float
    d_p: float
    d_ca: float

    @property
    def bound(self) -> float:
        from .arcs import arc_lipschitz_constant
        return arc_lipschitz_constant(self.m) * self.d_p


def random_delta_pair(rng: SplitMix64, max_atoms: int = 10, max_tries: int = 100) -> LipschitzPair:
    """Two nearby measures that are delta-distributed on nearby arcs with d_P <= delta.

    The second arc perturbs the scales of the first, and its measure reuses the
    parametric positions and weights of the first up to small noise.
    """
    for _ in range(max_tries):
        m = rng.integers(2, max_atoms // 2)
        per = 2 if 2 * m <= max_atoms else 1
        idx = np.repeat(np.arange(1, m + 1), per)
        n = len(idx)
        a1 = random_arc(rng, m)
        eps = 10.0 ** rng.uniform(-4, -1)
        r2 = a1.scales[:-1] * (1.0 + eps * rng.uniform(-1, 1, size=m - 1))
        a2 = StandardArc(m, r2)
        f1 = rng.uniform(0.05, 0.95, size=n)
        f2 = np.clip(f1 + eps * rng.uniform(-1, 1, size=n), 0.0, 1.0)
        w1 = rng.simplex(n)
        w2 = np.abs(w1 + eps * rng.uniform(-1, 1, size=n) / n)
        w2 = w2 / w2.sum()
        mu1 = arc_measure(a1, f1, w1, idx)
        mu2 = arc_measure(a2, f2, w2, idx)
        delta = float(min(segment_masses(mu1, a1).min(), segment_masses(mu2, a2).min()))
        d_p = prokhorov_exact(mu1, mu2)
        if d_p <= delta:
            return LipschitzPair(m, delta, d_p, arc_metric(a1, a2))
    raise RuntimeError("could not draw a pair within Prokhorov distance delta")


def random_arc_pair(rng: SplitMix64) -> tuple[StandardArc, StandardArc]:
    m = rng.integers(2, 12)
    return random_arc(rng, m), random_arc(rng, m)
