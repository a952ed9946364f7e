"""Standard m-arcs: convex polygonal chains with turning angle pi / (2m).

A standard arc starts at the origin, its i-th segment points in direction
(sin(i*phi), cos(i*phi)) with phi = pi / (2m), and its last segment has
unit length. It is therefore fixed by the scale vector (r_1, ..., r_{m-1}, 1).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .measures import DiscreteMeasure, point_segment_distance, segment_mass


class NoArc(ValueError):
    """No standard arc carries the measure with the requested mass per segment."""


class Ambiguous(ValueError):
    """More than one standard arc fits the measure within tolerance."""


def turning_angle(m: int) -> float:
    return math.pi / (2 * m)


def directions(m: int) -> np.ndarray:
    """Unit directions u_1..u_m of the segments, shape ``(m, 2)``."""
    angles = np.arange(1, m + 1) * turning_angle(m)
    u = np.column_stack([np.sin(angles), np.cos(angles)])
    u[-1] = (1.0, 0.0)  # m * phi = pi/2 exactly
    return u


@dataclass(frozen=True, eq=False)
class StandardArc:
    m: int
    scales: np.ndarray

    def __post_init__(self):
        m = int(self.m)
        if m < 2:
            raise ValueError("standard arcs need m >= 2")
        r = np.array(self.scales, dtype=float).ravel()
        if len(r) == m - 1:
            r = np.append(r, 1.0)
        if len(r) != m:
            raise ValueError(f"expected {m} scales, got {len(r)}")
        if r[-1] != 1.0:
            raise ValueError("the last scale of a standard arc must be exactly 1")
        if not np.all(np.isfinite(r)) or np.any(r <= 0):
            raise ValueError("scales must be positive and finite")
        r.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "scales", r)

    @property
    def phi(self) -> float:
        return turning_angle(self.m)

    @property
    def vertices(self) -> np.ndarray:
        return vertices(self)

    def segments(self) -> list[tuple[np.ndarray, np.ndarray]]:
        v = self.vertices
        return [(v[i], v[i + 1]) for i in range(self.m)]

    def __eq__(self, other):
        if not isinstance(other, StandardArc):
            return NotImplemented
        return self.m == other.m and np.array_equal(self.scales, other.scales)

    def __hash__(self):
        return hash((self.m, self.scales.tobytes()))

    def to_dict(self) -> dict:
        return {"m": self.m, "scales": self.scales.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "StandardArc":
        return cls(int(data["m"]), data["scales"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "StandardArc":
        return cls.from_dict(json.loads(text))


def vertices(arc: StandardArc) -> np.ndarray:
    """The m + 1 vertices v_0 = 0, v_i = v_{i-1} + r_i u_i."""
    steps = arc.scales[:, None] * directions(arc.m)
    return np.vstack([np.zeros(2), np.cumsum(steps, axis=0)])


def vertices_csv(arc: StandardArc) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["i", "x", "y"])
    for i, (x, y) in enumerate(vertices(arc)):
        writer.writerow([i, repr(float(x)), repr(float(y))])
    return buf.getvalue()


def arc_metric(a1: StandardArc, a2: StandardArc) -> float:
    """Largest Euclidean distance between corresponding vertices."""
    if a1.m != a2.m:
        raise ValueError(f"arcs have different orders {a1.m} and {a2.m}")
    return float(np.max(np.linalg.norm(vertices(a1) - vertices(a2), axis=1)))


def scale_map(arc: StandardArc) -> np.ndarray:
    return arc.scales.copy()


def from_scales(scales) -> StandardArc:
    return StandardArc(len(scales), scales)


def arc_lipschitz_constant(m: int) -> float:
    """Lipschitz constant of measure -> arc, 2*sqrt(2)/sin(phi_m)."""
    return 2.0 * math.sqrt(2.0) / math.sin(turning_angle(m))


# -- arc-supported measures ---------------------------------------------------

def _planar(mu: DiscreteMeasure, tol: float) -> np.ndarray | None:
    """First two coordinates of the atoms, or None if mu leaves span{e1, e2}."""
    if mu.d < 2:
        return None
    if mu.d > 2 and np.max(np.abs(mu.points[:, 2:])) > tol:
        return None
    return mu.points[:, :2]


def distance_to_arc(points, arc: StandardArc) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    planar = pts[:, :2]
    out = np.min([point_segment_distance(planar, s, e) for s, e in arc.segments()], axis=0)
    if pts.shape[1] > 2:
        out = np.hypot(out, np.linalg.norm(pts[:, 2:], axis=1))
    return out


def segment_masses(mu: DiscreteMeasure, arc: StandardArc, tol: float = 1e-9) -> np.ndarray:
    return np.array([segment_mass(mu, s, e, tol) for s, e in arc.segments()])


def is_delta_distributed(mu: DiscreteMeasure, arc: StandardArc, delta: float,
                         tol: float = 1e-9) -> bool:
    if mu.d < 2:
        return False
    if np.max(distance_to_arc(mu.points, arc)) > tol:
        return False
    return bool(np.all(segment_masses(mu, arc, tol) >= delta - 1e-12))


def arc_measure(arc: StandardArc, fractions, weights, segment_index, d: int = 2) -> DiscreteMeasure:
    """Measure with atoms at ``v_{i-1} + f * (v_i - v_{i-1})`` on chosen segments.

    ``segment_index`` is 1-based like the segment numbering of the arc.
    """
    v = vertices(arc)
    idx = np.asarray(segment_index, dtype=int)
    f = np.asarray(fractions, dtype=float)
    pts2 = v[idx - 1] + f[:, None] * (v[idx] - v[idx - 1])
    pts = np.zeros((len(pts2), d))
    pts[:, :2] = pts2
    return DiscreteMeasure(pts, weights)


def _fit_scales(planar: np.ndarray, m: int, tol: float, skip: int | None = None):
    """Walk the chain vertex by vertex, fixing r_i as the largest u_i-coordinate.

    Every atom on segment i or later, written in the basis (u_i, u_{i+1})
    relative to v_{i-1}, has u_i-coordinate at most r_i, with equality on
    segment i+1. ``skip`` selects the runner-up value at that index instead,
    which is how alternative candidates are probed.
    """
    u = directions(m)
    v = np.zeros(2)
    scales = []
    done = np.zeros(len(planar), dtype=bool)
    for i in range(m - 1):
        rel = planar - v
        a, c = u[i], u[i + 1]
        cross = a[0] * c[1] - a[1] * c[0]
        alpha = (rel[:, 0] * c[1] - rel[:, 1] * c[0]) / cross
        cand = alpha[~done]
        if len(cand) == 0:
            return None
        order = np.sort(cand)[::-1]
        r = order[0]
        if skip == i:
            lower = order[order < r - tol]
            if len(lower) == 0:
                return None
            r = lower[0]
        if r <= tol:
            return None
        scales.append(float(r))
        nxt = v + r * a
        done |= point_segment_distance(planar, v, nxt) <= tol
        v = nxt
    scales.append(1.0)
    return scales


def recover_arc(mu: DiscreteMeasure, m: int, delta: float, tol: float = 1e-9) -> StandardArc:
    """The unique standard m-arc carrying mu with at least ``delta`` per segment.

    Raises NoArc when no arc qualifies and Ambiguous when a second candidate
    passes the same checks (only possible through the ``tol`` relaxation).
    """
    if m < 2:
        raise ValueError("standard arcs need m >= 2")
    planar = _planar(mu, tol)
    if planar is None:
        raise NoArc("measure is not supported in span{e1, e2}")
    scales = _fit_scales(planar, m, tol)
    if scales is None:
        raise NoArc("could not fit segment scales")
    arc = StandardArc(m, scales)
    if not is_delta_distributed(mu, arc, delta, tol):
        raise NoArc("fitted arc does not carry the measure with the requested mass")
    for i in range(m - 1):
        alt = _fit_scales(planar, m, tol, skip=i)
        if alt is None:
            continue
        other = StandardArc(m, alt)
        if arc_metric(other, arc) > tol and is_delta_distributed(mu, other, delta, tol):
            raise Ambiguous(f"two arcs fit the measure: {arc.scales} and {other.scales}")
    return arc
