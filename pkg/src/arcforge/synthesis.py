"""Explicit ReLU layers that transport a finite measure onto a chosen standard arc.

Pipeline (all stages are ordinary ReLU layers, composed in this order):

1. ``project_to_axis``: one layer moving a signed coordinate onto the
   non-negative part of the first axis.
2. ``clip_network``: two layers clamping the first coordinate to [0, b_m].
3. ``resize_network``: m + 1 planar layers sending breakpoints b_j to knots a_j.
4. ``bend_network``: m + 1 planar layers folding [0, a_m] into the arc.

Planar stages are built in R^2 and padded to the ambient dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arcs import StandardArc, arc_metric, distance_to_arc, is_delta_distributed, recover_arc, turning_angle
from .measures import MERGE_TOL, DiscreteMeasure, pushforward
from .relu_net import ReluLayer, ReluNetwork, chain, embed_network, eval_net, rotation


class NoCoordinate(ValueError):
    """No signed coordinate separates enough support points."""


@dataclass(frozen=True)
class PartitionPlan:
    """Breakpoints b_0 < ... < b_m and target knots a_0 < ... < a_m, both from 0."""

    breakpoints: tuple[float, ...]
    knots: tuple[float, ...]

    def __post_init__(self):
        b = tuple(float(x) for x in self.breakpoints)
        a = tuple(float(x) for x in self.knots)
        if len(a) != len(b) or len(a) < 2:
            raise ValueError("breakpoints and knots need equal length >= 2")
        for name, seq in (("breakpoints", b), ("knots", a)):
            if seq[0] != 0.0:
                raise ValueError(f"{name} must start at 0")
            if any(y <= x for x, y in zip(seq, seq[1:])):
                raise ValueError(f"{name} must be strictly increasing")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "knots", a)

    @property
    def m(self) -> int:
        return len(self.knots) - 1


def _distinct(values: np.ndarray, tol: float = MERGE_TOL) -> np.ndarray:
    v = np.sort(np.asarray(values, dtype=float))
    if len(v) == 0:
        return v
    keep = np.concatenate([[True], np.diff(v) > tol])
    return v[keep]


def _signed_counts(mu: DiscreteMeasure):
    for j in range(mu.d):
        for sign in (1, -1):
            v = _distinct(sign * mu.points[:, j])
            yield int(np.sum(v > MERGE_TOL)), j, sign


def max_segments(mu: DiscreteMeasure) -> int:
    """Largest arc order m that ``project_to_axis`` accepts for mu."""
    return max(c for c, _, _ in _signed_counts(mu))


def project_to_axis(mu: DiscreteMeasure, m: int):
    """Pick a signed coordinate and return ``(layer, axis, sign)``.

    The layer is x -> relu(sign * x_axis) e_1. Among all coordinates and
    signs the one with the most distinct positive values wins; ties go to
    the lower axis, then to sign +1. ``axis`` is 1-based. The partition
    needs m such values.
    """
    best = None
    for cand in _signed_counts(mu):
        if best is None or cand[0] > best[0]:
            best = cand
    count, j, sign = best
    if count < m:
        raise NoCoordinate(
            f"best signed coordinate has {count} distinct positive values, need {m}")
    W = np.zeros((mu.d, mu.d))
    W[0, j] = sign
    return ReluLayer(W, np.zeros(mu.d)), j + 1, sign


def clip_network(b_max: float) -> ReluNetwork:
    """x -> relu(-relu(-x + (b_max, 0)) + (b_max, 0)) in the plane."""
    if not b_max > 0:
        raise ValueError("b_max must be positive")
    shift = np.array([b_max, 0.0])
    return ReluNetwork((ReluLayer(-np.eye(2), shift), ReluLayer(-np.eye(2), shift)))


def partition_support(values, m: int) -> np.ndarray:
    """Breakpoints 0 = b_0 < ... < b_m isolating the m smallest positive values."""
    s = _distinct(values)
    s = s[s > MERGE_TOL]
    if m < 1 or len(s) < m:
        raise ValueError(f"need {m} distinct positive values, got {len(s)}")
    s = s[:m]
    b = np.empty(m + 1)
    b[0] = 0.0
    b[1:m] = 0.5 * (s[:-1] + s[1:])
    b[m] = s[m - 1] + 1.0
    return b


def resize_weights(plan: PartitionPlan) -> np.ndarray:
    """Correction weights w_1..w_m of the piecewise-linear resize map.

    f_{j+1}(x) = x + w_{j+1} relu(x - a_j) with
    w_{j+1} = (a_{j+1} - b^j_{j+1}) / (b^j_{j+1} - a_j), where b^j are the
    breakpoints after the first j corrections.
    """
    a = np.array(plan.knots)
    cur = np.array(plan.breakpoints)
    w = np.zeros(plan.m + 1)
    for j in range(plan.m):
        w[j + 1] = (a[j + 1] - cur[j + 1]) / (cur[j + 1] - a[j])
        cur = cur + w[j + 1] * np.maximum(cur - a[j], 0.0)
        cur[j + 1] = a[j + 1]
    return w[1:]


def resize_network(plan: PartitionPlan) -> ReluNetwork:
    """Planar network F with F((b_i, 0)) = (a_i, 0) for every i."""
    m = plan.m
    if m < 2:
        raise ValueError("resizing needs m >= 2")
    a = plan.knots
    w = resize_weights(plan)
    layers = [ReluLayer([[1.0, 0.0], [1.0, 0.0]], [0.0, 0.0])]
    for j in range(1, m):
        layers.append(ReluLayer([[1.0, w[j - 1]], [1.0, w[j - 1]]], [0.0, -a[j]]))
    layers.append(ReluLayer([[1.0, w[m - 1]], [0.0, 0.0]], [0.0, 0.0]))
    return ReluNetwork(tuple(layers))


def bend_bias(a, m: int, j: int) -> float:
    """First bias component of bending layer j (1-based).

    Layer j puts vertex m - j on the second axis, where it sits at height
    cos(phi)^(j-1) * a_{m-j} after the previous j - 1 shrinking steps.
    """
    phi = turning_angle(m)
    return math.sin(phi) * math.cos(phi) ** (j - 1) * a[m - j]


def bend_network(a, m: int) -> ReluNetwork:
    """Planar network G mapping (a_i, 0) to the vertices of a standard arc.

    The resulting scales are r_i = cos(phi)^(m-i) * (a_i - a_{i-1}).
    """
    a = np.asarray(a, dtype=float)
    if m < 2 or len(a) != m + 1:
        raise ValueError("need m >= 2 and m + 1 knots")
    if a[0] != 0.0 or np.any(np.diff(a) <= 0):
        raise ValueError("knots must start at 0 and increase strictly")
    phi = turning_angle(m)
    layers = [ReluLayer(rotation(math.pi / 2), np.zeros(2))]
    rot = rotation(-phi)
    for j in range(1, m + 1):
        layers.append(ReluLayer(rot, [-bend_bias(a, m, j), 0.0]))
    return ReluNetwork(tuple(layers))


def bend_scales(a, m: int) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    phi = turning_angle(m)
    i = np.arange(1, m + 1)
    return np.cos(phi) ** (m - i) * np.diff(a)


def knots_for_arc(arc: StandardArc) -> np.ndarray:
    """a_0 = 0, a_j = a_{j-1} + r_j cos(phi)^(j-m): the knots that bend into ``arc``."""
    m = arc.m
    phi = turning_angle(m)
    j = np.arange(1, m + 1)
    return np.concatenate([[0.0], np.cumsum(arc.scales * np.cos(phi) ** (j - m))])


def bending_trace(a, m: int, samples: int = 0) -> list[np.ndarray]:
    """Images of the knots (and optional extra samples) after each bending layer."""
    net = bend_network(a, m)
    a = np.asarray(a, dtype=float)
    xs = np.sort(np.concatenate([a, np.linspace(0.0, a[-1], samples)])) if samples else a
    x = np.column_stack([xs, np.zeros_like(xs)])
    out = []
    for layer in net.layers:
        x = layer(x)
        out.append(x.copy())
    return out


@dataclass(frozen=True)
class TransportResult:
    net: ReluNetwork
    delta: float
    plan: PartitionPlan
    axis: int
    sign: int
    stages: tuple[ReluNetwork, ...]


def synthesize_arc_transport(mu: DiscreteMeasure, target: StandardArc) -> TransportResult:
    """Build a ReLU network whose pushforward of mu is delta-distributed on ``target``.

    delta is the smallest mass that the projected measure puts into an open
    partition interval (b_{j-1}, b_j).
    """
    m = target.m
    d = mu.d
    if d < 2:
        raise ValueError("arc transport needs ambient dimension >= 2")
    proj, axis, sign = project_to_axis(mu, m)
    projected = pushforward(mu, ReluNetwork((proj,)))
    x = projected.points[:, 0]
    b = partition_support(x, m)
    masses = [projected.mass((x > lo) & (x < hi)) for lo, hi in zip(b[:-1], b[1:])]
    delta = float(min(masses))
    a = knots_for_arc(target)
    plan = PartitionPlan(tuple(b), tuple(a))
    stages = (
        ReluNetwork((proj,)),
        embed_network(clip_network(b[-1]), d),
        embed_network(resize_network(plan), d),
        embed_network(bend_network(a, m), d),
    )
    return TransportResult(chain(*stages), delta, plan, axis, sign, stages)


def verify_transport(mu: DiscreteMeasure, target: StandardArc, result: TransportResult,
                     tol: float = 1e-9) -> dict:
    """Numbers used by the CLI report and the end-to-end tests."""
    out = pushforward(mu, result.net)
    deviation = float(np.max(distance_to_arc(out.points, target)))
    report = {
        "delta": result.delta,
        "max_support_deviation": deviation,
        "delta_distributed": is_delta_distributed(out, target, result.delta, tol),
        "mass": float(out.weights.sum()),
    }
    try:
        rec = recover_arc(out, target.m, result.delta, tol)
        report["recovered_scales"] = rec.scales.tolist()
        report["scale_error"] = float(np.max(np.abs(rec.scales - target.scales)))
        report["arc_error"] = arc_metric(rec, target)
    except ValueError as exc:
        report["recovered_scales"] = None
        report["scale_error"] = math.inf
        report["arc_error"] = math.inf
        report["recover_error"] = str(exc)
    return report


def breakpoint_images(result: TransportResult) -> np.ndarray:
    """F applied to (b_j, 0): should be (a_j, 0)."""
    b = np.array(result.plan.breakpoints)
    pts = np.column_stack([b, np.zeros_like(b)])
    return eval_net(ReluNetwork(tuple(result.stages[2].layers)), np.pad(pts, ((0, 0), (0, result.net.d - 2))))
