"""Finite-support probability measures, pushforwards and Prokhorov distances."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .relu_net import ReluNetwork, eval_net

MERGE_TOL = 1e-12
MASS_TOL = 1e-12
EXACT_MAX_SUPPORT = 20


class SupportTooLarge(ValueError):
    """Raised when exact Prokhorov enumeration would exceed its budget."""


def _lexsort_rows(points: np.ndarray) -> np.ndarray:
    return np.lexsort(points.T[::-1])


def _merge_close(points: np.ndarray, weights: np.ndarray, tol: float):
    """Merge atoms closer than ``tol``; points must already be sorted.

    The lexicographically first atom of each cluster is kept as representative.
    """
    n = len(points)
    if n < 2:
        return points, weights
    diff = points[:, None, :] - points[None, :, :]
    close = np.einsum("ijk,ijk->ij", diff, diff) <= tol * tol
    np.fill_diagonal(close, False)
    if not close.any():
        return points, weights
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in zip(*np.nonzero(np.triu(close))):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(n)])
    keep = np.unique(roots)
    merged = np.zeros(len(keep))
    np.add.at(merged, np.searchsorted(keep, roots), weights)
    return points[keep], merged


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability measure sum_i w_i delta_{x_i} with finitely many atoms.

    On construction zero-weight atoms are dropped, atoms within ``MERGE_TOL``
    of each other are merged and the atoms are sorted lexicographically, so
    two equal measures have equal arrays.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        w = np.array(self.weights, dtype=float).ravel()
        if pts.ndim != 2 or len(pts) != len(w):
            raise ValueError("points and weights must have matching lengths")
        if len(w) == 0:
            raise ValueError("a probability measure needs at least one atom")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(w))):
            raise ValueError("points and weights must be finite")
        if np.any(w < 0) or np.any(w > 1 + MASS_TOL):
            raise ValueError("weights must lie in [0, 1]")
        total = w.sum()
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")
        keep = w > 0
        pts, w = pts[keep], w[keep]
        order = _lexsort_rows(pts)
        pts, w = _merge_close(pts[order], w[order], MERGE_TOL)
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return len(self.weights)

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return (self.points.shape == other.points.shape
                and np.array_equal(self.points, other.points)
                and np.array_equal(self.weights, other.weights))

    def __hash__(self):
        return hash((self.points.tobytes(), self.weights.tobytes()))

    def mass(self, mask) -> float:
        return float(self.weights[np.asarray(mask, dtype=bool)].sum())

    def to_dict(self) -> dict:
        return {"points": self.points.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteMeasure":
        return cls(data["points"], data["weights"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DiscreteMeasure":
        return cls.from_dict(json.loads(text))


def dirac(point) -> DiscreteMeasure:
    return DiscreteMeasure([np.asarray(point, dtype=float).ravel()], [1.0])


def uniform(points) -> DiscreteMeasure:
    pts = np.asarray(points, dtype=float)
    return DiscreteMeasure(pts, np.full(len(pts), 1.0 / len(pts)))


def mixture(measures: Sequence[DiscreteMeasure], coeffs: Sequence[float]) -> DiscreteMeasure:
    """Convex combination sum_k coeffs[k] * measures[k] as an atom union."""
    if len(measures) != len(coeffs):
        raise ValueError("need one coefficient per measure")
    pts = np.concatenate([m.points for m in measures])
    w = np.concatenate([c * m.weights for m, c in zip(measures, coeffs)])
    return DiscreteMeasure(pts, w)


def map_measure(mu: DiscreteMeasure, f: Callable[[np.ndarray], np.ndarray]) -> DiscreteMeasure:
    """Pushforward under an arbitrary vectorised map on ``(n, d)`` arrays."""
    return DiscreteMeasure(f(mu.points), mu.weights)


def pushforward(mu: DiscreteMeasure, f: ReluNetwork) -> DiscreteMeasure:
    """f_* mu: image atoms with the same weights, collisions merged."""
    if f.d != mu.d:
        raise ValueError(f"network acts on R^{f.d} but the measure lives in R^{mu.d}")
    return DiscreteMeasure(eval_net(f, mu.points), mu.weights)


def support_equal(mu: DiscreteMeasure, points, tol: float = MERGE_TOL) -> bool:
    """True when supp(mu) equals the finite set ``points`` up to ``tol``."""
    pts = np.asarray(points, dtype=float).reshape(-1, mu.d)
    dist = np.linalg.norm(mu.points[:, None, :] - pts[None, :, :], axis=-1)
    return bool(np.all(dist.min(axis=1) <= tol) and np.all(dist.min(axis=0) <= tol))


# -- Prokhorov distance -------------------------------------------------------

def _subset_sums(values: np.ndarray) -> np.ndarray:
    """Table of sum(values[i] for i in mask) for every bitmask."""
    table = np.zeros(1 << len(values))
    for i, v in enumerate(values):
        size = 1 << i
        table[size:2 * size] = table[:size] + v
    return table


def _subset_unions(masks: np.ndarray) -> np.ndarray:
    """Table of the bitwise OR of masks[i] over i in each subset."""
    table = np.zeros(1 << len(masks), dtype=np.int64)
    for i, m in enumerate(masks):
        size = 1 << i
        table[size:2 * size] = table[:size] | m
    return table


def _neighbour_masks(dist: np.ndarray, radius: float) -> np.ndarray:
    bits = (1 << np.arange(dist.shape[1], dtype=np.int64))
    return ((dist <= radius) * bits).sum(axis=1).astype(np.int64)


def _max_deficit(mass_src: np.ndarray, mass_dst_table: np.ndarray, dist: np.ndarray,
                 radius: float) -> float:
    """max over B of src(B) - dst({y : dist(y, B) <= radius})."""
    unions = _subset_unions(_neighbour_masks(dist, radius))
    return float(np.max(_subset_sums(mass_src) - mass_dst_table[unions]))


def prokhorov_exact(mu: DiscreteMeasure, nu: DiscreteMeasure, tol: float = 1e-9) -> float:
    """Prokhorov distance between two finite-support measures.

    For radii strictly between two consecutive cross distances the
    neighbourhood of every support subset is fixed, so the worst mass
    deficit over all subsets of each support is a step function of the
    radius. The distance is the first radius that dominates the deficit of
    its step; the steps are searched by bisection over the sorted distances.
    Deficits and distances at or below ``tol`` are treated as zero, which
    bounds the error by ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if mu.d != nu.d:
        raise ValueError("measures live in different dimensions")
    if len(mu) + len(nu) > EXACT_MAX_SUPPORT:
        raise SupportTooLarge(
            f"combined support {len(mu) + len(nu)} exceeds {EXACT_MAX_SUPPORT}; "
            "use prokhorov_upper")
    dist = np.linalg.norm(mu.points[:, None, :] - nu.points[None, :, :], axis=-1)
    dist = np.where(dist <= tol, 0.0, dist)
    radii = np.unique(np.concatenate([[0.0], dist.ravel()]))
    nu_table = _subset_sums(nu.weights)
    mu_table = _subset_sums(mu.weights)

    def deficit(k):
        r = radii[k]
        g = max(_max_deficit(mu.weights, nu_table, dist, r),
                _max_deficit(nu.weights, mu_table, dist.T, r))
        return 0.0 if g <= tol else g

    def next_radius(k):
        return radii[k + 1] if k + 1 < len(radii) else math.inf

    lo, hi = 0, len(radii) - 1
    cache = {}
    while lo < hi:
        mid = (lo + hi) // 2
        cache[mid] = deficit(mid)
        if cache[mid] <= next_radius(mid):
            hi = mid
        else:
            lo = mid + 1
    g = cache[lo] if lo in cache else deficit(lo)
    return float(min(max(radii[lo], g), 1.0))


def greedy_coupling(mu: DiscreteMeasure, nu: DiscreteMeasure):
    """Couple the two measures by filling the closest pairs first.

    Returns ``(distances, masses)`` of the pairs that carry mass.
    """
    if mu.d != nu.d:
        raise ValueError("measures live in different dimensions")
    dist = np.linalg.norm(mu.points[:, None, :] - nu.points[None, :, :], axis=-1)
    order = np.argsort(dist, axis=None, kind="stable")
    left = mu.weights.astype(float)
    right = nu.weights.astype(float)
    out_d, out_m = [], []
    for flat in order:
        i, j = divmod(int(flat), dist.shape[1])
        m = min(left[i], right[j])
        if m <= 0:
            continue
        left[i] -= m
        right[j] -= m
        out_d.append(dist[i, j])
        out_m.append(m)
    return np.array(out_d), np.array(out_m)


def prokhorov_upper(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Upper bound on the Prokhorov distance from a greedy coupling.

    Any coupling pi certifies every eps with pi(|X - Y| >= eps) <= eps.
    """
    dists, masses = greedy_coupling(mu, nu)
    radii = np.unique(np.concatenate([[0.0], dists]))
    for k, r in enumerate(radii):
        tail = float(masses[dists > r].sum())
        if tail <= MASS_TOL:
            tail = 0.0
        nxt = radii[k + 1] if k + 1 < len(radii) else math.inf
        if tail <= nxt:
            return float(min(max(r, tail), 1.0))
    return 1.0


def point_segment_distance(points, start, end) -> np.ndarray:
    """Euclidean distance from each row of ``points`` to the closed segment."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    a = np.asarray(start, dtype=float)
    b = np.asarray(end, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        raise ValueError("segment endpoints coincide")
    t = np.clip((p - a) @ ab / denom, 0.0, 1.0)
    return np.linalg.norm(p - (a + t[:, None] * ab), axis=1)


def segment_mass(mu: DiscreteMeasure, seg_start, seg_end, tol: float = 1e-9) -> float:
    """Total weight of atoms within ``tol`` of the closed segment."""
    start = np.zeros(mu.d)
    end = np.zeros(mu.d)
    s = np.asarray(seg_start, dtype=float).ravel()
    e = np.asarray(seg_end, dtype=float).ravel()
    start[:len(s)] = s
    end[:len(e)] = e
    return mu.mass(point_segment_distance(mu.points, start, end) <= tol)
