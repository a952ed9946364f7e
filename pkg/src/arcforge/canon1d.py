"""Exact normal forms of one-dimensional ReLU networks.

Every composition of layers x -> relu(w x + b) on the real line is constant,
a bounded ramp between two constants, or a one-sided knee, and each of these
is realised by a three-layer network. Composing symbolically in the algebra
of continuous piecewise-linear functions gives the form without sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .measures import DiscreteMeasure, pushforward
from .relu_net import ReluNetwork, layer_1d, network_1d

MERGE_SLOPE_TOL = 1e-10


@dataclass(frozen=True)
class Pwl1D:
    """Continuous piecewise-linear function on R.

    Piece i is ``slopes[i] * x + intercepts[i]`` on [breakpoints[i-1], breakpoints[i]],
    with the first and last pieces unbounded.
    """

    breakpoints: tuple[float, ...]
    slopes: tuple[float, ...]
    intercepts: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.slopes) == len(self.intercepts) == len(self.breakpoints) + 1):
            raise ValueError("need one more piece than breakpoints")

    @classmethod
    def identity(cls) -> "Pwl1D":
        return cls((), (1.0,), (0.0,))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(np.asarray(self.breakpoints), x, side="left")
        return np.asarray(self.slopes)[idx] * x + np.asarray(self.intercepts)[idx]

    def apply_layer(self, w: float, b: float) -> "Pwl1D":
        """relu(w * self + b), splitting pieces where the pre-activation changes sign."""
        bps, slopes, icpts = [], [], []
        t = self.breakpoints
        for i, (s, c) in enumerate(zip(self.slopes, self.intercepts)):
            s2, c2 = w * s, w * c + b
            lo = t[i - 1] if i > 0 else -math.inf
            hi = t[i] if i < len(t) else math.inf
            cuts = [lo, hi]
            root = None
            if s2 != 0.0:
                root = -c2 / s2 + 0.0
                if math.isinf(root):
                    raise ValueError("breakpoint lies beyond the floating-point range")
                if lo < root < hi:
                    cuts = [lo, root, hi]
            for k in range(len(cuts) - 1):
                a, z = cuts[k], cuts[k + 1]
                # sign of s2 * x + c2 on (a, z), decided without sampling
                if root is None:
                    positive = c2 > 0
                elif root <= a:
                    positive = s2 > 0
                else:
                    positive = s2 < 0
                if positive:
                    slopes.append(s2 + 0.0)
                    icpts.append(c2)
                else:
                    slopes.append(0.0)
                    icpts.append(0.0)
                if k < len(cuts) - 2 or i < len(t):
                    bps.append(z)
        return Pwl1D(tuple(bps), tuple(slopes), tuple(icpts)).simplified()

    def simplified(self) -> "Pwl1D":
        """Merge collinear neighbours and drop empty pieces."""
        bps = list(self.breakpoints)
        slopes = list(self.slopes)
        icpts = list(self.intercepts)
        i = 0
        while i < len(bps):
            scale = max(1.0, abs(icpts[i]), abs(icpts[i + 1]))
            # flat and sloped pieces never merge, however small the slope
            same_kind = (slopes[i] == 0.0) == (slopes[i + 1] == 0.0)
            collinear = (same_kind
                         and abs(slopes[i] - slopes[i + 1]) <= MERGE_SLOPE_TOL * max(1.0, abs(slopes[i]))
                         and abs(icpts[i] - icpts[i + 1]) <= MERGE_SLOPE_TOL * scale)
            empty = i + 1 < len(bps) and bps[i + 1] <= bps[i]
            if collinear:
                del bps[i], slopes[i + 1], icpts[i + 1]
            elif empty:
                del bps[i + 1], slopes[i + 1], icpts[i + 1]
            else:
                i += 1
        return Pwl1D(tuple(bps), tuple(slopes), tuple(icpts))


@dataclass(frozen=True)
class Constant:
    c: float

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.c)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()


@dataclass(frozen=True)
class BoundedRamp:
    """c1 left of a1, c2 right of a2, linear in between."""

    c1: float
    c2: float
    a1: float
    a2: float

    def __post_init__(self):
        if not self.a1 < self.a2:
            raise ValueError("BoundedRamp needs a1 < a2")
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("ReLU outputs are non-negative")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        slope = (self.c2 - self.c1) / (self.a2 - self.a1)
        inner = self.c1 + slope * (x - self.a1)
        return np.where(x <= self.a1, self.c1, np.where(x >= self.a2, self.c2, inner))

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (self.a1, self.a2)


@dataclass(frozen=True)
class Knee:
    """c where w * (x - a) <= 0, c + w * (x - a) elsewhere."""

    c: float
    a: float
    w: float

    def __post_init__(self):
        if self.w == 0:
            raise ValueError("Knee needs w != 0; use Constant")
        if self.c < 0:
            raise ValueError("ReLU outputs are non-negative")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.c + np.maximum(self.w * (x - self.a), 0.0)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (self.a,)


Canon1DForm = Union[Constant, BoundedRamp, Knee]


@dataclass(frozen=True)
class ThreeLayerParams:
    w1: float
    b1: float
    w2: float
    b2: float
    w3: float
    b3: float

    def __post_init__(self):
        for name in ("w1", "b1", "w2", "b2", "w3", "b3"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v + 0.0)  # drop negative zero

    def as_tuple(self) -> tuple[float, ...]:
        return (self.w1, self.b1, self.w2, self.b2, self.w3, self.b3)

    def network(self) -> ReluNetwork:
        return network_1d([(self.w1, self.b1), (self.w2, self.b2), (self.w3, self.b3)])


def _check_1d(net: ReluNetwork):
    if net.d != 1:
        raise ValueError(f"expected a 1-D network, got dimension {net.d}")


def symbolic(net: ReluNetwork) -> Pwl1D:
    _check_1d(net)
    f = Pwl1D.identity()
    for layer in net.layers:
        f = f.apply_layer(float(layer.W[0, 0]), float(layer.b[0]))
    return f


def _eval_scalar(net: ReluNetwork, x: float) -> float:
    for layer in net.layers:
        x = max(float(layer.W[0, 0]) * x + float(layer.b[0]), 0.0)
    return x


def classify(net: ReluNetwork) -> Canon1DForm:
    _check_1d(net)
    if any(float(layer.W[0, 0]) == 0.0 for layer in net.layers):
        return Constant(_eval_scalar(net, 0.0))
    f = symbolic(net)
    s, c, t = f.slopes, f.intercepts, f.breakpoints
    if len(s) == 1:
        if s[0] != 0.0:
            raise AssertionError("a ReLU network cannot be affine and non-constant on R")
        return Constant(c[0])
    if len(s) == 2:
        if s[0] == 0.0 and s[1] != 0.0:
            return Knee(c[0], t[0], s[1])
        if s[1] == 0.0 and s[0] != 0.0:
            return Knee(c[1], t[0], s[0])
    if len(s) == 3 and s[0] == 0.0 and s[2] == 0.0 and s[1] != 0.0:
        if c[0] == c[2]:  # a ramp squeezed below one ulp; monotone, so constant
            return Constant(c[0])
        return BoundedRamp(c[0], c[2], t[0], t[1])
    raise AssertionError(f"unexpected piecewise-linear shape {f}")


def to_three_layer(form: Canon1DForm) -> ThreeLayerParams:
    if isinstance(form, Constant):
        form = _as_ramp(form.c)
    if isinstance(form, BoundedRamp):
        jump = form.c2 - form.c1
        return ThreeLayerParams(
            1.0, -form.a1,
            -abs(jump) / (form.a2 - form.a1), abs(jump),
            -float(np.sign(jump)), form.c2,
        )
    sign = float(np.sign(form.w))
    return ThreeLayerParams(sign, -sign * form.a, abs(form.w), form.c, 1.0, 0.0)


def _as_ramp(c: float) -> BoundedRamp:
    return BoundedRamp(c, c, 0.0, 1.0)


def forms_close(f: Canon1DForm, g: Canon1DForm, tol: float = 1e-9) -> bool:
    """Same variant and parameters within ``tol`` relative to the largest one.

    A constant also matches a bounded ramp whose two levels both lie within
    ``tol`` of it, since the two functions then differ by at most ``tol``.
    """
    if isinstance(g, Constant) and isinstance(f, BoundedRamp):
        f, g = g, f
    if isinstance(f, Constant) and isinstance(g, BoundedRamp):
        scale = max(1.0, abs(f.c))
        return abs(g.c1 - f.c) <= tol * scale and abs(g.c2 - f.c) <= tol * scale
    if type(f) is not type(g):
        return False
    a = np.array(list(vars(f).values()), dtype=float)
    b = np.array(list(vars(g).values()), dtype=float)
    scale = max(1.0, float(np.max(np.abs(a))))
    return bool(np.all(np.abs(a - b) <= tol * scale))


def form_to_dict(form: Canon1DForm) -> dict:
    return {"variant": type(form).__name__, **{k: float(v) for k, v in vars(form).items()}}


def verification_grid(form: Canon1DForm, n: int = 10_000, margin: float = 10.0) -> np.ndarray:
    bps = form.breakpoints or (0.0,)
    return np.linspace(min(bps) - margin, max(bps) + margin, n)


# -- the six-parameter invariant family ---------------------------------------

DEFAULT_K = (0.0, 10.0)


def default_prototype() -> DiscreteMeasure:
    """Ten equally weighted atoms at 0.5, 1.5, ..., 9.5 inside K = [0, 10]."""
    return DiscreteMeasure(np.arange(10) + 0.5, np.full(10, 0.1))


def family1d(theta: ThreeLayerParams, mu0: DiscreteMeasure | None = None) -> DiscreteMeasure:
    """The pushforward of the prototype under the three-layer network theta."""
    mu0 = default_prototype() if mu0 is None else mu0
    return pushforward(mu0, theta.network())


def family1d_step(theta: ThreeLayerParams, w: float, b: float,
                  mu0: DiscreteMeasure | None = None) -> ThreeLayerParams:
    """Parameters omega with family1d(omega) equal to relu(w x + b) pushed through family1d(theta)."""
    mu0 = default_prototype() if mu0 is None else mu0
    lo, hi = DEFAULT_K
    if np.any(mu0.points < lo) or np.any(mu0.points > hi):
        raise ValueError("prototype measure must be supported in K")
    net = ReluNetwork(theta.network().layers + (layer_1d(w, b),))
    return to_three_layer(classify(net))
