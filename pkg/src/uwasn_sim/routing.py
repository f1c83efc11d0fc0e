"""Packet type, the protocol contract, and the VBF and DBR baselines.

Both baselines are opportunistic flooding schemes: every receiver decides
on its own whether it is eligible, waits a holding time that favours better
placed forwarders, and cancels if it overhears the same packet first.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .channel import SOUND_SPEED


@dataclass(frozen=True, slots=True)
class Packet:
    id: int
    source: int
    created_at: float
    hops: tuple[int, ...]
    # (source position, sink position) frozen at creation, used by VBF
    vbf_anchor: tuple[tuple[float, float, float], tuple[float, float, float]]
    payload_size: int
    route: tuple[int, ...] | None = None

    def extended(self, node_id: int) -> "Packet":
        return replace(self, hops=self.hops + (node_id,))


class Action(enum.Enum):
    FORWARD = "forward"
    DROP = "drop"
    DELIVER = "deliver"


@dataclass(frozen=True, slots=True)
class ProtocolDecision:
    action: Action
    hold: float = 0.0

    def __post_init__(self):
        if self.hold < 0:
            raise ValueError("hold time must be non-negative")


DROP = ProtocolDecision(Action.DROP)
DELIVER = ProtocolDecision(Action.DELIVER)


def forward(hold: float) -> ProtocolDecision:
    return ProtocolDecision(Action.FORWARD, max(0.0, hold))


class Protocol:
    """Interface the engine drives. ``sim`` is the running
    :class:`~uwasn_sim.engine.Simulation`."""

    name = "protocol"

    def begin_round(self, sim) -> None:
        pass

    def originate(self, sim, packet: Packet) -> Packet | None:
        """Prepare a freshly generated packet; None drops it at the source."""
        return packet

    def on_receive(self, node, packet: Packet, sim) -> ProtocolDecision:
        if node.is_sink:
            return DELIVER
        return self.decide(node, packet, sim)

    def decide(self, node, packet: Packet, sim) -> ProtocolDecision:
        raise NotImplementedError

    def transmit(self, sim, node, packet: Packet) -> None:
        raise NotImplementedError


class FloodingProtocol(Protocol):
    """Broadcast at the node's current toggled power level."""

    def transmit(self, sim, node, packet: Packet) -> None:
        sim.broadcast(node.id, packet, node.power_level)


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _dot(a, b) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def distance_to_segment(point, start, end) -> float:
    """Euclidean distance from ``point`` to the segment ``start``-``end``."""
    axis = _sub(end, start)
    rel = _sub(point, start)
    length_sq = _dot(axis, axis)
    t = 0.0 if length_sq == 0 else min(1.0, max(0.0, _dot(rel, axis) / length_sq))
    closest = (start[0] + t * axis[0], start[1] + t * axis[1], start[2] + t * axis[2])
    return math.dist(point, closest)


def vbf_hold(p: float, d: float, cos_theta: float, pipe_radius: float, comm_range: float) -> float:
    """Holding time for a VBF candidate.

    ``p`` is its distance from the routing vector, ``d`` its distance from
    the previous hop and ``cos_theta`` the cosine of the angle at the
    previous hop between the candidate and the sink.
    """
    alpha = p / pipe_radius + (comm_range - d * cos_theta) / comm_range
    t_delay = comm_range / SOUND_SPEED
    return math.sqrt(max(alpha, 0.0)) * t_delay + max(comm_range - d, 0.0) / SOUND_SPEED


def vbf_decide(node, packet: Packet, state, pipe_radius: float) -> ProtocolDecision:
    src_anchor, sink_anchor = packet.vbf_anchor
    here = node.pos.as_tuple()
    p = distance_to_segment(here, src_anchor, sink_anchor)
    if p > pipe_radius:
        return DROP
    prev = state.nodes[packet.hops[-1]].pos.as_tuple()
    to_node = _sub(here, prev)
    to_sink = _sub(sink_anchor, prev)
    d = math.sqrt(_dot(to_node, to_node))
    norm = d * math.sqrt(_dot(to_sink, to_sink))
    cos_theta = _dot(to_node, to_sink) / norm if norm > 0 else 1.0
    comm_range = state.config.range_for(node.power_level)
    return forward(vbf_hold(p, d, cos_theta, pipe_radius, comm_range))


def dbr_hold(depth_gain: float, depth_threshold: float, comm_range: float) -> float:
    tau = comm_range / SOUND_SPEED
    delta = depth_threshold if depth_threshold > 0 else comm_range / 2
    return max(0.0, 2 * tau / delta * (comm_range - depth_gain))


def dbr_decide(node, packet: Packet, state, depth_threshold: float) -> ProtocolDecision:
    prev = state.nodes[packet.hops[-1]]
    gain = prev.pos.z - node.pos.z
    # zero gain never forwards, so delivered traces strictly ascend
    if gain <= 0 or gain < depth_threshold:
        return DROP
    comm_range = state.config.range_for(node.power_level)
    return forward(dbr_hold(gain, depth_threshold, comm_range))


class VbfProtocol(FloodingProtocol):
    name = "vbf"

    def decide(self, node, packet, sim):
        return vbf_decide(node, packet, sim.state, sim.config.vbf_pipe_radius)


class DbrProtocol(FloodingProtocol):
    name = "dbr"

    def decide(self, node, packet, sim):
        return dbr_decide(node, packet, sim.state, sim.config.dbr_depth_threshold)
