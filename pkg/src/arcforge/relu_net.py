"""Square ReLU layers x -> relu(W x + b) and their compositions."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def relu(x):
    return np.maximum(x, 0.0)


def _frozen(a, ndim: int) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ReluLayer:
    """One layer x -> relu(W x + b) with square W."""

    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        W = _frozen(self.W, 2)
        b = _frozen(self.b, 1)
        if W.shape[0] != W.shape[1]:
            raise ValueError(f"weight matrix must be square, got {W.shape}")
        if b.shape[0] != W.shape[0]:
            raise ValueError("bias length does not match weight matrix")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def d(self) -> int:
        return self.W.shape[0]

    def __call__(self, x):
        return relu(np.asarray(x, dtype=float) @ self.W.T + self.b)

    def __eq__(self, other):
        if not isinstance(other, ReluLayer):
            return NotImplemented
        return np.array_equal(self.W, other.W) and np.array_equal(self.b, other.b)

    def __hash__(self):
        return hash((self.W.tobytes(), self.b.tobytes()))

    def to_dict(self) -> dict:
        return {"W": self.W.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "ReluLayer":
        return cls(data["W"], data["b"])


@dataclass(frozen=True)
class ReluNetwork:
    """Non-empty sequence of equal-width ReLU layers, applied first to last."""

    layers: tuple[ReluLayer, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("a network needs at least one layer")
        d = layers[0].d
        if any(layer.d != d for layer in layers):
            raise ValueError("all layers must share the same dimension")
        object.__setattr__(self, "layers", layers)

    @property
    def d(self) -> int:
        return self.layers[0].d

    def __len__(self):
        return len(self.layers)

    def __call__(self, x):
        return eval_net(self, x)

    def to_dict(self) -> dict:
        return {"d": self.d, "layers": [layer.to_dict() for layer in self.layers]}

    @classmethod
    def from_dict(cls, data: dict) -> "ReluNetwork":
        net = cls(tuple(ReluLayer.from_dict(layer) for layer in data["layers"]))
        if "d" in data and int(data["d"]) != net.d:
            raise ValueError(f"declared d={data['d']} but layers have d={net.d}")
        return net

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ReluNetwork":
        return cls.from_dict(json.loads(text))


def network(*layers: ReluLayer) -> ReluNetwork:
    return ReluNetwork(tuple(layers))


def eval_net(net: ReluNetwork, x) -> np.ndarray:
    """Evaluate ``net`` at a point (shape ``(d,)``) or a batch (shape ``(n, d)``)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != net.d:
        raise ValueError(f"input has dimension {x.shape[-1]}, network expects {net.d}")
    for layer in net.layers:
        x = layer(x)
    return x


def compose(f: ReluNetwork, g: ReluNetwork) -> ReluNetwork:
    """The network "g after f"."""
    if f.d != g.d:
        raise ValueError(f"cannot compose networks of dimension {f.d} and {g.d}")
    return ReluNetwork(f.layers + g.layers)


def chain(*nets: ReluNetwork) -> ReluNetwork:
    """Compose left to right: ``chain(f, g, h)`` applies f first."""
    out = nets[0]
    for net in nets[1:]:
        out = compose(out, net)
    return out


def embed_2d_to_d(layer: ReluLayer, d: int) -> ReluLayer:
    """Pad a planar layer with zeros so it acts on span{e1, e2} of R^d."""
    if d < 2:
        raise ValueError("ambient dimension must be at least 2")
    if layer.d != 2:
        raise ValueError("only 2-dimensional layers can be embedded")
    W = np.zeros((d, d))
    W[:2, :2] = layer.W
    b = np.zeros(d)
    b[:2] = layer.b
    return ReluLayer(W, b)


def embed_network(net: ReluNetwork, d: int) -> ReluNetwork:
    return ReluNetwork(tuple(embed_2d_to_d(layer, d) for layer in net.layers))


def identity_layer(d: int) -> ReluLayer:
    return ReluLayer(np.eye(d), np.zeros(d))


def rotation(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, -s], [s, c]])


def layer_1d(w: float, b: float) -> ReluLayer:
    return ReluLayer([[w]], [b])


def network_1d(params: Sequence[tuple[float, float]]) -> ReluNetwork:
    """Build a 1-D network from ``[(w1, b1), (w2, b2), ...]``."""
    return ReluNetwork(tuple(layer_1d(w, b) for w, b in params))
