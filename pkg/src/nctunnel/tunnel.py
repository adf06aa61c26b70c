"""Tunnel endpoint state machines for the world and island gateways.

An endpoint encodes its ingress direction and decodes its peer's. Both
roles run the same machinery; the two directions of a tunnel are fully
independent codec instances and may use different symbol sizes (bulk data
one way, small acknowledgements the other).

Ingress drives the emission schedule: every source packet triggers one
coded datagram, with repair datagrams interleaved per the schedule.
Generations seal when full or when the flush timeout expires with symbols
pending; a partial seal emits whatever remains of the proportional repair
budget. Egress is loss-tolerant bookkeeping: malformed datagrams are
counted and dropped, stale generations are ignored, and the decode window
bounds memory by evicting the oldest generation when full.
"""

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from . import framing
from .errors import FramingError
from .rlnc import (
    DECODED,
    INNOVATIVE,
    CodecConfig,
    Generation,
    GenerationDecoder,
    emission_schedule,
    repair_budget,
)

WORLD_GATEWAY = "world_gateway"
ISLAND_GATEWAY = "island_gateway"

DEFAULT_DECODE_WINDOW = 8


@dataclass
class TunnelStats:
    datagrams_sent: int = 0
    datagrams_received: int = 0
    generations_decoded: int = 0
    generations_failed: int = 0
    innovative: int = 0
    redundant: int = 0
    inner_in: int = 0
    inner_out: int = 0
    malformed: int = 0
    late_drops: int = 0
    oversize_drops: int = 0
    corrupt_slots: int = 0


class TunnelEndpoint:
    """One end of a coded tunnel.

    config governs the encode direction; peer_config (defaults to config)
    is what arriving datagrams must match. The caller serializes
    ingress/egress/tick on a single endpoint; distinct endpoints are
    independent.
    """

    def __init__(
        self,
        role: str,
        config: CodecConfig,
        rng: np.random.Generator,
        peer_config: CodecConfig | None = None,
        decode_window: int = DEFAULT_DECODE_WINDOW,
    ):
        if role not in (WORLD_GATEWAY, ISLAND_GATEWAY):
            raise ValueError(f"unknown role {role!r}")
        if decode_window < 1:
            raise ValueError("decode_window must be >= 1")
        self.role = role
        self.config = config
        self.peer_config = peer_config or config
        self.rng = rng
        self.decode_window = decode_window
        self.stats = TunnelStats()

        self._schedule = emission_schedule(config)
        self._next_generation_id = 0
        self._open: Generation | None = None
        self._open_since = 0.0
        self._open_repairs_sent = 0

        self._decoders: OrderedDict[int, GenerationDecoder] = OrderedDict()
        self._dead_floor = -1  # generation ids <= floor are gone for good

    @property
    def inner_capacity(self) -> int:
        """Largest inner packet one symbol can carry."""
        return self.config.max_packet_size

    # --- encode side -----------------------------------------------------

    def ingress(self, inner_packet: bytes, now: float) -> list[bytes]:
        """Accept one inner packet; return serialized datagrams due now."""
        if len(inner_packet) > self.inner_capacity:
            self.stats.oversize_drops += 1
            return []
        self.stats.inner_in += 1
        if self._open is None:
            self._open = Generation(self._next_generation_id, self.config)
            self._next_generation_id += 1
            self._open_since = now
            self._open_repairs_sent = 0
        gen = self._open
        slot = gen.push(inner_packet)
        emissions = self._schedule[slot]
        self._open_repairs_sent += emissions - 1
        out = []
        for i in range(emissions):
            final = gen.sealed and i == emissions - 1
            out.append(framing.serialize(gen.emit(self.rng, final=final)))
        if gen.sealed:
            self._open = None
        self.stats.datagrams_sent += len(out)
        return out

    def tick(self, now: float) -> list[bytes]:
        """Flush a stale partial generation; no-op otherwise."""
        gen = self._open
        if gen is None or gen.size == 0:
            return []
        if now - self._open_since < self.config.flush_timeout:
            return []
        gen.seal()
        self._open = None
        remaining = max(
            0, repair_budget(self.config, gen.size) - self._open_repairs_sent
        )
        out = [
            framing.serialize(gen.emit(self.rng, final=(i == remaining - 1)))
            for i in range(remaining)
        ]
        self.stats.datagrams_sent += len(out)
        return out

    # --- decode side -----------------------------------------------------

    def egress(self, datagram: bytes) -> list[bytes]:
        """Feed one received datagram; return newly recovered inner packets."""
        self.stats.datagrams_received += 1
        try:
            cp = framing.parse(datagram)
        except FramingError:
            self.stats.malformed += 1
            return []
        if len(cp.payload) != self.peer_config.symbol_size:
            self.stats.malformed += 1
            return []
        gid = cp.generation_id
        if gid <= self._dead_floor:
            self.stats.late_drops += 1
            return []
        dec = self._decoders.get(gid)
        if dec is None:
            if len(self._decoders) >= self.decode_window:
                self._evict_oldest()
            dec = GenerationDecoder(cp.generation_size, len(cp.payload))
            self._decoders[gid] = dec
        try:
            status = dec.push(cp)
        except ValueError:
            self.stats.malformed += 1
            return []
        if status == INNOVATIVE:
            self.stats.innovative += 1
        elif status == DECODED:
            self.stats.innovative += 1
            self.stats.generations_decoded += 1
        else:
            self.stats.redundant += 1
        released = dec.release()
        if dec.corrupt_slots:
            self.stats.corrupt_slots += dec.corrupt_slots
            dec.corrupt_slots = 0
        self.stats.inner_out += len(released)
        return [packet for _, packet in released]

    def _evict_oldest(self) -> None:
        gid, dec = self._decoders.popitem(last=False)
        self._dead_floor = max(self._dead_floor, gid)
        if not dec.decoded:
            self.stats.generations_failed += 1
