"""Explicit ReLU-invariant families: Dirac mixtures, the space-filling
parametrisation Gamma, and walk-interpolated families for finite function sets.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .measures import DiscreteMeasure, mixture, pushforward
from .relu_net import ReluLayer, ReluNetwork


# -- Dirac mixtures -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiracParams:
    """Locations a_1..a_N (rows) and simplex weights c."""

    locations: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        a = np.array(self.locations, dtype=float)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        c = np.array(self.coeffs, dtype=float).ravel()
        if len(a) != len(c) or len(c) == 0:
            raise ValueError("need one coefficient per location")
        if np.any(c < -1e-12) or np.any(c > 1 + 1e-12) or abs(c.sum() - 1.0) > 1e-12:
            raise ValueError("coefficients must lie on the probability simplex")
        a.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "locations", a)
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self) -> int:
        return len(self.coeffs)

    @property
    def d(self) -> int:
        return self.locations.shape[1]

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.locations.ravel(), self.coeffs])


def dirac_family(params: DiracParams) -> DiscreteMeasure:
    w = np.clip(params.coeffs, 0.0, 1.0)
    return DiscreteMeasure(params.locations, w)


def dirac_pushforward_params(params: DiracParams, W, b) -> DiracParams:
    """Closed-form parameter update for one layer: a_i -> relu(W a_i + b)."""
    layer = ReluLayer(W, b)
    if layer.d != params.d:
        raise ValueError(f"layer acts on R^{layer.d}, locations live in R^{params.d}")
    return DiracParams(layer(params.locations), params.coeffs)


# -- space-filling curves -----------------------------------------------------

# quadrant maps (x, y) -> (a x + b y + e, c x + d y + f) for the digits
# 0..3: lower-left, upper-left, upper-right, lower-right
_QUADRANTS = (
    (0.0, 0.5, 0.0, 0.5, 0.0, 0.0),
    (0.5, 0.0, 0.0, 0.0, 0.5, 0.5),
    (0.5, 0.0, 0.5, 0.0, 0.5, 0.5),
    (0.0, -0.5, 1.0, -0.5, 0.0, 0.5),
)
_QUAD = np.array(_QUADRANTS)


def _hilbert_scalar(t: float, depth: int) -> tuple[float, float]:
    cells = 4 ** depth
    k = min(int(math.floor(t * cells)), cells - 1)
    x, y = t * cells - k, 0.0
    for level in range(depth):
        a, b, e, c, d, f = _QUADRANTS[(k >> (2 * level)) & 3]
        x, y = a * x + b * y + e, c * x + d * y + f
    return x, y


def hilbert(t, depth: int) -> np.ndarray:
    """Hilbert curve [0, 1] -> [0, 1]^2 with H(0) = (0, 0) and H(1) = (1, 0).

    The first ``depth`` base-4 digits of t select nested quadrants; the
    remainder is interpolated linearly along the chord from H(0) to H(1).
    Exact at t = k / 4**depth, within sqrt(2) * 2**-depth of the limit curve.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if np.any(t < 0) or np.any(t > 1):
        raise ValueError("t must lie in [0, 1]")
    if len(t) <= 16:
        # numpy overhead dominates for a handful of points
        out = np.array([_hilbert_scalar(float(v), depth) for v in t]).reshape(len(t), 2)
        return out[0] if scalar else out
    cells = 4 ** depth
    scaled = t * cells
    k = np.minimum(np.floor(scaled).astype(np.int64), cells - 1)
    x, y = scaled - k, np.zeros_like(scaled)
    for level in range(depth):
        a, b, e, c, d, f = _QUAD[(k >> (2 * level)) & 3].T
        x, y = a * x + b * y + e, c * x + d * y + f
    out = np.column_stack([x, y])
    return out[0] if scalar else out


def hilbert_gn(t, n: int, depth: int) -> np.ndarray:
    """Curve [0, 1] -> [0, 1]^n with g_2 = hilbert and g_n = (id x g) o g_{n-1}."""
    if n < 2:
        raise ValueError("n must be at least 2")
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    p = np.atleast_2d(hilbert(np.atleast_1d(t), depth))
    for _ in range(3, n + 1):
        p = np.column_stack([p[:, :-1], hilbert(p[:, -1], depth)])
    return p[0] if scalar else p


@lru_cache(maxsize=None)
def _h_ends(n: int, depth: int) -> tuple[np.ndarray, np.ndarray]:
    return 2 * hilbert_gn(0.0, n, depth) - 1, 2 * hilbert_gn(1.0, n, depth) - 1


def h_curve(s, n: int, depth: int) -> np.ndarray:
    """Map [0, 1] onto [-n, n]^n with both endpoints sent to the origin."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    start, end = _h_ends(n, depth)
    out = np.empty((len(s), n))
    lo = s <= 0.25
    hi = s >= 0.75
    mid = ~(lo | hi)
    out[lo] = 4 * n * s[lo, None] * start
    out[hi] = 4 * n * (1 - s[hi, None]) * end
    if mid.any():
        out[mid] = n * (2 * hilbert_gn(2 * s[mid] - 0.5, n, depth) - 1)
    return out


def gamma(t: float, depth: int = 8) -> np.ndarray:
    """Continuous surjection R -> eventually-zero sequences, truncated.

    Returns the first floor(t) coordinates for t >= 2 (all later ones are 0)
    and an empty array for t < 2.
    """
    if t < 2:
        return np.zeros(0)
    n = int(math.floor(t))
    return h_curve(t - n, n, depth)[0] + 0.0


def sequence_distance(x, y) -> float:
    """Sup-norm distance between two zero-padded finite sequences."""
    n = max(len(x), len(y))
    a = np.zeros(n)
    b = np.zeros(n)
    a[:len(x)] = x
    b[:len(y)] = y
    return float(np.max(np.abs(a - b))) if n else 0.0


def decode_network(seq, d: int, tol: float = 1e-9) -> ReluNetwork:
    """Read ``(L, W_1, b_1, ..., W_L, b_L, 0, ...)`` as an L-layer network on R^d.

    Only points whose first component is a positive integer (within ``tol``)
    and whose entries vanish past the last layer encode a network.
    """
    seq = np.asarray(seq, dtype=float)
    if len(seq) == 0:
        raise ValueError("the zero sequence does not encode a network")
    L = round(seq[0])
    if abs(seq[0] - L) > tol or L < 1:
        raise ValueError(f"first component {seq[0]!r} is not a positive integer")
    block = d * d + d
    body = np.zeros(L * block)
    rest = seq[1:]
    if np.any(np.abs(rest[L * block:]) > tol):
        raise ValueError("non-zero entries beyond the last encoded layer")
    rest = rest[:L * block]
    body[:len(rest)] = rest
    layers = []
    for i in range(L):
        chunk = body[i * block:(i + 1) * block]
        layers.append(ReluLayer(chunk[:d * d].reshape(d, d), chunk[d * d:]))
    return ReluNetwork(tuple(layers))


# -- walk families ------------------------------------------------------------

def _level(k: int, q: int) -> list[str]:
    if k == 0:
        return [""]
    out = [""]
    for _ in range(k):
        out = [s + str(c) for s in out for c in range(q)]
    return out


@lru_cache(maxsize=None)
def level_walk(k: int, q: int = 2) -> tuple[str, ...]:
    """Closed walk on the complete bipartite graph between lengths k and k+1.

    Starts and ends at "0" * k and walks every edge once in each direction.
    """
    inner, outer = _level(k, q), _level(k + 1, q)
    z0 = "0" * k
    walk = [z0]
    for b in outer:
        walk.append(b)
        for a in inner:
            if a != z0:
                walk += [a, b]
        walk.append(z0)
    return tuple(walk)


class _WalkPrefix:
    """Lazily grown concatenation W_0 W_1 W_2 ... of the level walks."""

    def __init__(self, q: int):
        self.q = q
        self.vertices: list[str] = []
        self.levels = 0
        self.lock = threading.Lock()

    def ensure(self, n: int) -> None:
        if len(self.vertices) >= n:
            return
        with self.lock:
            while len(self.vertices) < n:
                self.vertices.extend(level_walk(self.levels, self.q))
                self.levels += 1

    def __getitem__(self, i: int) -> str:
        self.ensure(i + 1)
        return self.vertices[i]


_PREFIXES: dict[int, _WalkPrefix] = {}
_PREFIX_LOCK = threading.Lock()


def _prefix(q: int) -> _WalkPrefix:
    with _PREFIX_LOCK:
        if q not in _PREFIXES:
            _PREFIXES[q] = _WalkPrefix(q)
        return _PREFIXES[q]


def walk_vertex(i: int, num_functions: int = 2) -> str:
    if i < 0:
        raise ValueError("walk index must be non-negative")
    return _prefix(num_functions)[i]


def walk_prefix(n: int, num_functions: int = 2) -> list[str]:
    p = _prefix(num_functions)
    p.ensure(n)
    return p.vertices[:n]


def find_walk_edge(z1: str, z2: str, num_functions: int = 2, limit: int = 10_000_000) -> int:
    """Smallest m with W(m) = z1 and W(m+1) = z2."""
    p = _prefix(num_functions)
    i = 0
    while i + 1 < limit:
        p.ensure(i + 2)
        if p.vertices[i] == z1 and p.vertices[i + 1] == z2:
            return i
        i += 1
    raise LookupError(f"edge {z1!r} -> {z2!r} not found in the first {limit} steps")


def _fractional(t: float) -> tuple[int, float]:
    if t < 0:
        raise ValueError("t must be non-negative")
    n = int(math.floor(t))
    return n, t - n


def _interpolate(lo: DiscreteMeasure, hi: DiscreteMeasure, eta: float) -> DiscreteMeasure:
    if eta == 0.0:
        return lo
    return mixture([lo, hi], [1.0 - eta, eta])


class WalkFamily:
    """mu_t = (1 - eta) mu_{W(n)} + eta mu_{W(n+1)}, with mu_z = (f_{z_k} o ... o f_{z_1})_* mu."""

    def __init__(self, nets: Sequence[ReluNetwork], mu: DiscreteMeasure):
        if any(f.d != mu.d for f in nets):
            raise ValueError("all networks must act on the measure's dimension")
        self.nets = tuple(nets)
        self.mu = mu
        self._cache: dict[str, DiscreteMeasure] = {"": mu}

    def node(self, z: str) -> DiscreteMeasure:
        if z not in self._cache:
            self._cache[z] = pushforward(self.node(z[:-1]), self.nets[int(z[-1])])
        return self._cache[z]

    def __call__(self, t: float) -> DiscreteMeasure:
        n, eta = _fractional(t)
        q = len(self.nets)
        lo = self.node(walk_vertex(n, q))
        return _interpolate(lo, self.node(walk_vertex(n + 1, q)), eta)

    def image_parameter(self, t: float, i: int) -> float:
        """A parameter t' with (f_i)_* mu_t = mu_{t'} (integer part from the walk)."""
        n, eta = _fractional(t)
        q = len(self.nets)
        z1, z2 = walk_vertex(n, q) + str(i), walk_vertex(n + 1, q) + str(i)
        return find_walk_edge(z1, z2, q) + eta


def walk_measure(t: float, f0: ReluNetwork, f1: ReluNetwork, mu: DiscreteMeasure) -> DiscreteMeasure:
    return WalkFamily((f0, f1), mu)(t)


class SingleFunctionFamily:
    """mu_t interpolating the orbit mu_0, f_* mu_0, f_* f_* mu_0, ..."""

    def __init__(self, f: ReluNetwork, mu0: DiscreteMeasure):
        if f.d != mu0.d:
            raise ValueError("network and measure dimensions differ")
        self.f = f
        self._orbit = [mu0]

    def iterate(self, n: int) -> DiscreteMeasure:
        while len(self._orbit) <= n:
            self._orbit.append(pushforward(self._orbit[-1], self.f))
        return self._orbit[n]

    def __call__(self, t: float) -> DiscreteMeasure:
        n, eta = _fractional(t)
        return _interpolate(self.iterate(n), self.iterate(n + 1), eta)


def single_function_measure(t: float, f: ReluNetwork, mu0: DiscreteMeasure) -> DiscreteMeasure:
    return SingleFunctionFamily(f, mu0)(t)
