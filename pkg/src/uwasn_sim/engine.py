"""Discrete-event core: named RNG streams, the event queue and the round loop."""
from __future__ import annotations

import hashlib
import heapq
import itertools
import random
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .channel import SOUND_SPEED, link_delivery_probability, link_energy
from .config import PowerLevel
from .metrics import RoundMetrics
from .routing import Action, Packet, Protocol
from .world import NetworkState, apply_mobility, toggle_power_levels

STREAMS = ("deployment", "mobility", "channel", "ga")


class RngStream(random.Random):
    """A ``random.Random`` whose seed is derived from (seed, label).

    Different labels give unrelated sequences, so e.g. drawing more channel
    noise never shifts the mobility pattern.
    """

    def __new__(cls, seed: int, label: str):
        return super().__new__(cls)

    def __init__(self, seed: int, label: str):
        self.stream_seed = seed
        self.label = label
        digest = hashlib.sha256(f"uwasn-sim:{seed}:{label}".encode()).digest()
        super().__init__(int.from_bytes(digest[:8], "big"))


class PacketArrival(NamedTuple):
    node: int
    packet: Packet


class HoldExpire(NamedTuple):
    node: int
    packet: Packet


class RoundStart(NamedTuple):
    round: int


class RoundEnd(NamedTuple):
    round: int


@dataclass(order=True, slots=True)
class Event:
    time: float
    seq: int
    kind: object = field(compare=False)


class CausalityError(ValueError):
    pass


class EventQueue:
    """Min-heap of events ordered by (time, seq)."""

    def __init__(self):
        self._heap: list[Event] = []
        self._seq = itertools.count()
        self.clock = 0.0

    def __len__(self) -> int:
        return len(self._heap)

    def schedule(self, time: float, kind) -> Event:
        if time < self.clock:
            raise CausalityError(f"event at t={time} is before the clock t={self.clock}")
        event = Event(time, next(self._seq), kind)
        heapq.heappush(self._heap, event)
        return event

    def pop(self) -> Event:
        event = heapq.heappop(self._heap)
        self.clock = event.time
        return event


@dataclass(frozen=True, slots=True)
class Delivery:
    round: int
    packet_id: int
    source: int
    trace: tuple[int, ...]  # source ... sink
    delay: float
    positions: np.ndarray  # node positions during the round


@dataclass(frozen=True, slots=True)
class Transmission:
    time: float
    round: int
    sender: int
    packet_id: int
    level: PowerLevel
    sender_alive: bool


_HOLDING, _SENT, _SUPPRESSED, _REJECTED = range(4)


class Simulation:
    """One engine instance: a network, a protocol and its RNG streams.

    Strictly single-threaded. ``record_trace`` keeps the full event and
    transmission logs used by the replay and invariant tests.
    """

    def __init__(self, state: NetworkState, protocol: Protocol, seed: int | None = None,
                 record_trace: bool = False):
        self.state = state
        self.config = state.config
        self.protocol = protocol
        self.seed = self.config.seed if seed is None else seed
        self.rng_mobility = RngStream(self.seed, "mobility")
        self.rng_channel = RngStream(self.seed, "channel")
        self.rng_ga = RngStream(self.seed, "ga")
        self.queue = EventQueue()
        self.ttl = 2 * len(state)
        self.tx_energy = {lvl: link_energy(lvl, self.config)[0] for lvl in PowerLevel}
        self.rx_energy = link_energy(PowerLevel.HIGH, self.config)[1]
        self.record_trace = record_trace
        self.trace: list[tuple] = []
        self.transmissions: list[Transmission] = []
        self.deliveries: list[Delivery] = []
        self.metrics: list[RoundMetrics] = []
        self.round = 0
        self._packet_ids = itertools.count()
        self._reset_round_books()

    @property
    def clock(self) -> float:
        return self.queue.clock

    def _reset_round_books(self):
        self._status: dict[tuple[int, int], int] = {}
        self._pending: dict[int, int] = {}
        self._settled: set[int] = set()
        self._delivered_at: dict[int, float] = {}
        self.generated = 0
        self.delivered = 0
        self.dropped = 0
        self._delays: list[float] = []

    @property
    def in_flight(self) -> int:
        return sum(1 for pid in self._pending
                   if pid not in self._settled and pid not in self._delivered_at)

    def run(self, rounds: int | None = None) -> list[RoundMetrics]:
        total = self.config.rounds if rounds is None else rounds
        for r in range(self.round + 1, self.round + 1 + total):
            self.run_round(r)
        return self.metrics

    def run_round(self, round_no: int) -> RoundMetrics:
        if round_no < 1:
            raise ValueError("rounds are numbered from 1")
        self.round = round_no
        self._reset_round_books()
        self._positions = self.state.positions().copy()
        self._distances = self.state.distances()
        self.queue.schedule(self.clock, RoundStart(round_no))
        while self.queue:
            self._dispatch(self.queue.pop())
        self.queue.schedule(self.clock, RoundEnd(round_no))
        self._dispatch(self.queue.pop())
        snapshot = RoundMetrics(
            round=round_no,
            generated=self.generated,
            delivered=self.delivered,
            delay_samples=tuple(self._delays),
            residual_total=self.state.residual_total(),
            alive_nodes=self.state.alive_count(),
            dropped=self.dropped,
        )
        self.metrics.append(snapshot)
        return snapshot

    # -- event handling -------------------------------------------------

    def _dispatch(self, event: Event) -> None:
        kind = event.kind
        if self.record_trace:
            self.trace.append(_trace_row(event))
        if isinstance(kind, PacketArrival):
            self._pending[kind.packet.id] -= 1
            self._receive(kind.node, kind.packet)
            self._settle(kind.packet.id)
        elif isinstance(kind, HoldExpire):
            self._pending[kind.packet.id] -= 1
            self._hold_expired(kind.node, kind.packet)
            self._settle(kind.packet.id)
        elif isinstance(kind, RoundStart):
            self._start_round()
        elif isinstance(kind, RoundEnd):
            apply_mobility(self.state, self.rng_mobility)
            toggle_power_levels(self.state, kind.round)

    def _start_round(self) -> None:
        self.protocol.begin_round(self)
        sink_pos = self.state.sink.pos.as_tuple()
        for src in self.state.source_ids:
            node = self.state.nodes[src]
            packet = Packet(
                id=next(self._packet_ids),
                source=src,
                created_at=self.clock,
                hops=(src,),
                vbf_anchor=(node.pos.as_tuple(), sink_pos),
                payload_size=self.config.packet_size,
            )
            self.generated += 1
            self._pending[packet.id] = 0
            if node.alive:
                routed = self.protocol.originate(self, packet)
                if routed is not None:
                    self.schedule_hold(src, routed, 0.0)
            self._settle(packet.id)

    def _receive(self, node_id: int, packet: Packet) -> None:
        node = self.state.nodes[node_id]
        if not node.is_sink and not node.alive:
            return
        if node.is_sink:
            if self.protocol.on_receive(node, packet, self).action is Action.DELIVER:
                self._deliver(packet)
            return
        key = (packet.id, node_id)
        status = self._status.get(key)
        if status == _HOLDING:
            self._status[key] = _SUPPRESSED
            return
        if status is not None:
            return
        decision = self.protocol.on_receive(node, packet, self)
        if decision.action is Action.FORWARD:
            self.schedule_hold(node_id, packet.extended(node_id), decision.hold)
        else:
            self._status[key] = _REJECTED

    def _hold_expired(self, node_id: int, packet: Packet) -> None:
        key = (packet.id, node_id)
        if self._status.get(key) != _HOLDING:
            return
        self._status[key] = _SENT
        node = self.state.nodes[node_id]
        if not node.alive or len(packet.hops) > self.ttl:
            return
        self.protocol.transmit(self, node, packet)

    def _deliver(self, packet: Packet) -> None:
        if packet.id in self._delivered_at:
            return
        self._delivered_at[packet.id] = self.clock
        delay = self.clock - packet.created_at
        self.delivered += 1
        self._delays.append(delay)
        self.deliveries.append(Delivery(
            round=self.round,
            packet_id=packet.id,
            source=packet.source,
            trace=packet.hops + (self.state.sink_id,),
            delay=delay,
            positions=self._positions,
        ))

    def _settle(self, packet_id: int) -> None:
        if self._pending[packet_id] or packet_id in self._settled:
            return
        self._settled.add(packet_id)
        if packet_id not in self._delivered_at:
            self.dropped += 1

    # -- primitives used by protocols -------------------------------------

    def schedule_hold(self, node_id: int, packet: Packet, hold: float) -> None:
        """Arm ``node_id`` to transmit ``packet`` after ``hold`` seconds."""
        self._status[(packet.id, node_id)] = _HOLDING
        self._pending[packet.id] += 1
        self.queue.schedule(self.clock + hold, HoldExpire(node_id, packet))

    def can_transmit(self, node_id: int, level: PowerLevel) -> bool:
        node = self.state.nodes[node_id]
        return node.alive and node.energy >= self.tx_energy[level]

    def distance(self, a: int, b: int) -> float:
        return float(self._distances[a, b])

    def _spend_tx(self, sender_id: int, packet: Packet, level: PowerLevel) -> bool:
        if not self.can_transmit(sender_id, level):
            return False
        if self.record_trace:
            self.transmissions.append(Transmission(
                self.clock, self.round, sender_id, packet.id, level,
                self.state.nodes[sender_id].alive))
        self.state.debit(sender_id, self.tx_energy[level])
        return True

    def _attempt(self, receiver_id: int, packet: Packet, distance: float, level: PowerLevel) -> bool:
        self.state.debit(receiver_id, self.rx_energy)
        p = link_delivery_probability(distance, level, self.config)
        if self.rng_channel.random() < p:
            self._pending[packet.id] += 1
            arrival = self.clock + self.config.tx_duration + distance / SOUND_SPEED
            self.queue.schedule(arrival, PacketArrival(receiver_id, packet))
            return True
        return False

    def broadcast(self, sender_id: int, packet: Packet, level: PowerLevel) -> bool:
        """Transmit to every live node in range; False if the sender cannot
        afford the transmission."""
        if not self._spend_tx(sender_id, packet, level):
            return False
        row = self._distances[sender_id]
        nodes = self.state.nodes
        for j in np.flatnonzero(row <= self.config.range_for(level)).tolist():
            if j == sender_id:
                continue
            receiver = nodes[j]
            if receiver.is_sink or receiver.alive:
                self._attempt(j, packet, float(row[j]), level)
        return True

    def unicast(self, sender_id: int, receiver_id: int, packet: Packet, level: PowerLevel) -> bool:
        """One addressed transmission attempt; True if the receiver got it.
        Callers check :meth:`can_transmit` first."""
        if not self._spend_tx(sender_id, packet, level):
            return False
        receiver = self.state.nodes[receiver_id]
        if not (receiver.is_sink or receiver.alive):
            return False
        d = float(self._distances[sender_id, receiver_id])
        if d > self.config.range_for(level):
            return False
        return self._attempt(receiver_id, packet, d, level)


def _trace_row(event: Event) -> tuple:
    kind = event.kind
    if isinstance(kind, (PacketArrival, HoldExpire)):
        return (event.time, event.seq, type(kind).__name__, kind.node, kind.packet.id, kind.packet.hops)
    return (event.time, event.seq, type(kind).__name__, kind.round)
