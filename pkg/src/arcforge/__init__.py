"""ReLU-layer transport of finite measures onto standard arcs, exact Prokhorov
distances, 1-D network normal forms and explicit ReLU-invariant families."""

from .arcs import Ambiguous, NoArc, StandardArc, arc_metric, recover_arc
from .measures import DiscreteMeasure, SupportTooLarge, prokhorov_exact, prokhorov_upper, pushforward
from .relu_net import ReluLayer, ReluNetwork, compose, eval_net
from .synthesis import NoCoordinate, synthesize_arc_transport

__version__ = "0.1.0"
