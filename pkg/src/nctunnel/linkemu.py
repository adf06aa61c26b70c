"""Deterministic discrete-event model of one satellite-link direction.

A link is a drop-tail FIFO queue in front of a fixed-rate transmitter plus
a fixed one-way propagation delay. Random per-packet loss and a two-state
Gilbert-Elliott burst process are applied at departure time, which models
loss at the modem input and on the radio path after queueing. A test
instrument (`inject_burst`) can deterministically kill a run of departures.

Everything runs on a shared EventQueue; ties dispatch in insertion order,
so a (scenario, seed) pair always produces the identical event trace.
"""

import heapq
import math
from dataclasses import dataclass

ENQUEUED = "enqueued"
TAIL_DROPPED = "tail_dropped"


class EventQueue:
    """Time-ordered callback dispatch with deterministic tie-breaking."""

    def __init__(self):
        self._heap = []
        self._seq = 0
        self.now = 0.0
        self.delivered = []  # (packet, time) from links without a sink

    def push(self, time: float, fn, *args) -> None:
        if time < self.now:
            raise ValueError(f"event at {time} is in the past (now={self.now})")
        heapq.heappush(self._heap, (time, self._seq, fn, args))
        self._seq += 1

    def advance(self, until: float) -> list:
        """Dispatch every event up to `until`; returns sink-less deliveries."""
        if until < self.now:
            raise ValueError("cannot advance into the past")
        while self._heap and self._heap[0][0] <= until:
            time, _, fn, args = heapq.heappop(self._heap)
            self.now = time
            fn(time, *args)
        self.now = until
        out = self.delivered
        self.delivered = []
        return out


def advance(events: EventQueue, until: float) -> list:
    """Module-level alias for EventQueue.advance."""
    return events.advance(until)


@dataclass(frozen=True)
class GilbertElliott:
    """Two-state burst loss process: lossless good state, lossy bad state."""

    p_good_bad: float
    p_bad_good: float
    loss_prob_bad: float

    def __post_init__(self):
        for name in ("p_good_bad", "p_bad_good", "loss_prob_bad"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {v}")


@dataclass(frozen=True)
class LinkProfile:
    """Static description of one link direction."""

    bandwidth_bps: float
    propagation_delay_s: float
    queue_capacity_bytes: int
    random_loss: float = 0.0
    burst: GilbertElliott | None = None

    def __post_init__(self):
        if self.bandwidth_bps <= 0:
            raise ValueError("bandwidth must be positive")
        if self.propagation_delay_s < 0:
            raise ValueError("propagation delay cannot be negative")
        if self.queue_capacity_bytes <= 0:
            raise ValueError("queue capacity must be positive")
        if not 0.0 <= self.random_loss <= 1.0:
            raise ValueError("random_loss must be in [0,1]")


class Link:
    """One link direction bound to an event queue.

    Delivered packets go to `sink(packet, arrival_time)` when set, else to
    the event queue's delivered list (handy in tests). Transmitter busy
    time, offers and drops are accumulated per `bucket_width` seconds for
    utilization and loss-rate reporting.
    """

    def __init__(self, profile: LinkProfile, events: EventQueue, rng,
                 sink=None, bucket_width: float = 1.0, name: str = "link"):
        self.profile = profile
        self.events = events
        self.rng = rng
        self.sink = sink
        self.name = name
        self.bucket_width = bucket_width

        self.queued_bytes = 0
        self.offered = 0
        self.delivered = 0
        self.dropped_tail = 0
        self.dropped_random = 0
        self.dropped_burst = 0
        self._busy_until = 0.0
        self._bad_state = False
        self._forced_bursts = []  # [start_time, remaining] in arrival order
        self._busy = {}       # bucket index -> busy seconds
        self._bucket_offers = {}
        self._bucket_drops = {}

    @property
    def dropped(self) -> int:
        return self.dropped_tail + self.dropped_random + self.dropped_burst

    def offer(self, packet, size: int, now: float) -> str:
        """Enqueue a packet or tail-drop it; schedules its departure."""
        self.offered += 1
        bucket = int(now / self.bucket_width)
        self._bucket_offers[bucket] = self._bucket_offers.get(bucket, 0) + 1
        if self.queued_bytes + size > self.profile.queue_capacity_bytes:
            self.dropped_tail += 1
            self._bucket_drops[bucket] = self._bucket_drops.get(bucket, 0) + 1
            return TAIL_DROPPED
        self.queued_bytes += size
        start = max(now, self._busy_until)
        end = start + size * 8.0 / self.profile.bandwidth_bps
        self._busy_until = end
        self._add_busy(start, end)
        self.events.push(end, self._depart, packet, size)
        return ENQUEUED

    def inject_burst(self, start: float, length: int) -> None:
        """Force the next `length` departures at/after `start` to drop.

        Bypasses the stochastic loss models; test instrument.
        """
        if length < 1:
            raise ValueError("burst length must be >= 1")
        self._forced_bursts.append([start, length])

    def utilization(self, window: float = 1.0) -> list[float]:
        """Busy fraction of the transmitter for each full window elapsed."""
        if window <= 0:
            raise ValueError("window must be positive")
        per = max(1, round(window / self.bucket_width))
        total_buckets = int(self.events.now / self.bucket_width)
        out = []
        for w0 in range(0, total_buckets - per + 1, per):
            busy = sum(self._busy.get(b, 0.0) for b in range(w0, w0 + per))
            out.append(min(1.0, busy / (per * self.bucket_width)))
        return out

    def window_stats(self, bucket: int) -> tuple[float, int, int]:
        """(busy seconds, offers, drops) for one accounting bucket."""
        return (
            self._busy.get(bucket, 0.0),
            self._bucket_offers.get(bucket, 0),
            self._bucket_drops.get(bucket, 0),
        )

    def _add_busy(self, start: float, end: float) -> None:
        width = self.bucket_width
        while start < end - 1e-12:
            b = int(start / width)
            bound = (b + 1) * width
            self._busy[b] = self._busy.get(b, 0.0) + min(end, bound) - start
            start = min(end, bound)

    def _lost_at_departure(self, t: float) -> str | None:
        for burst in self._forced_bursts:
            if t >= burst[0] and burst[1] > 0:
                burst[1] -= 1
                return "burst"
        if self.profile.random_loss and self.rng.random() < self.profile.random_loss:
            return "random"
        ge = self.profile.burst
        if ge is not None:
            flip = self.rng.random()
            if self._bad_state:
                if flip < ge.p_bad_good:
                    self._bad_state = False
            else:
                if flip < ge.p_good_bad:
                    self._bad_state = True
            if self._bad_state and self.rng.random() < ge.loss_prob_bad:
                return "random"
        return None

    def _depart(self, t: float, packet, size: int) -> None:
        self.queued_bytes -= size
        reason = self._lost_at_departure(t)
        if reason is not None:
            if reason == "burst":
                self.dropped_burst += 1
            else:
                self.dropped_random += 1
            bucket = int(t / self.bucket_width)
            self._bucket_drops[bucket] = self._bucket_drops.get(bucket, 0) + 1
            return
        self.delivered += 1
        self.events.push(
            t + self.profile.propagation_delay_s, self._deliver, packet
        )

    def _deliver(self, t: float, packet) -> None:
        if self.sink is not None:
            self.sink(packet, t)
        else:
            self.events.delivered.append((packet, t))
