"""Loss-reactive TCP flow model (Reno-style AIMD) for the simulator.

The sender is a bulk transfer with unlimited data: slow start doubles the
window every round trip, congestion avoidance adds one segment per round
trip, three duplicate ACKs halve into fast recovery, and a retransmission
timeout collapses the window to one segment with exponential timer backoff
and go-back-N resend. Loss detection is purely ACK-driven, so the reaction
to a drop is delayed by at least one round trip, which is the precondition
for queue oscillation at long-latency bottlenecks.

Receivers acknowledge every data segment immediately (no delayed ACK) and
count goodput once per delivered sequence range, so retransmissions never
inflate it.
"""

import math
import struct
from dataclasses import dataclass

from .linkemu import LinkProfile

SEG_HEADER_BYTES = 40  # IPv4 + TCP header cost per segment on the wire

SLOW_START = "slow_start"
CONGESTION_AVOIDANCE = "congestion_avoidance"
FAST_RECOVERY = "fast_recovery"
RTO_WAIT = "rto_wait"

TRIPLE_DUPACK = "triple_dupack"
RTO = "rto"


@dataclass
class Segment:
    flow_id: int
    seq: int
    ack: int
    is_ack: bool
    size: int  # wire bytes, headers included

    @property
    def payload_len(self) -> int:
        return 0 if self.is_ack else self.size - SEG_HEADER_BYTES


_SEG = struct.Struct(">IQQBH")


def pack_segment(seg: Segment) -> bytes:
    """Serialize a segment for transport through the coded tunnel."""
    head = _SEG.pack(
        seg.flow_id, seg.seq, seg.ack, int(seg.is_ack), seg.payload_len
    )
    return head.ljust(seg.size, b"\x00")


def unpack_segment(data: bytes) -> Segment:
    flow_id, seq, ack, flags, payload_len = _SEG.unpack_from(data)
    return Segment(flow_id, seq, ack, bool(flags & 1), len(data))


def bdp(profile: LinkProfile, rtt: float) -> float:
    """Bandwidth-delay product in bytes."""
    if rtt <= 0:
        raise ValueError("rtt must be positive")
    return profile.bandwidth_bps * rtt / 8.0


class TcpSender:
    """One bulk TCP flow. `transmit(segment, now)` injects into the path."""

    def __init__(self, flow_id: int, mss: int, events, transmit,
                 initial_cwnd: float = 10.0, min_rto: float = 1.0,
                 max_rto: float = 60.0):
        self.flow_id = flow_id
        self.mss = mss
        self.events = events
        self.transmit = transmit
        self.min_rto = min_rto
        self.max_rto = max_rto

        self.cwnd = initial_cwnd
        self.ssthresh = math.inf
        self.state = SLOW_START
        self.snd_una = 0
        self.snd_nxt = 0
        self.dupacks = 0
        self.recover = -1  # highest snd_nxt at the most recent loss event
        self.srtt = None
        self.rttvar = 0.0
        self.rto = min_rto

        self.segments_sent = 0
        self.retransmits = 0
        self.loss_events = 0

        self._send_times = {}
        self._rto_epoch = 0
        self._fr_partial_seen = False

    def start(self, now: float) -> None:
        self._send_available(now)

    # --- spec-level state transitions --------------------------------

    def on_loss_signal(self, kind: str) -> None:
        """Apply the window reaction for one detected loss."""
        self.loss_events += 1
        self.ssthresh = max(self.cwnd / 2.0, 2.0)
        if kind == TRIPLE_DUPACK:
            self.cwnd = self.ssthresh
            self.state = FAST_RECOVERY
        elif kind == RTO:
            self.cwnd = 1.0
            self.state = SLOW_START
            self.rto = min(self.rto * 2.0, self.max_rto)
            self.dupacks = 0
        else:
            raise ValueError(f"unknown loss signal {kind!r}")

    def on_ack(self, seg: Segment, now: float) -> None:
        ack = seg.ack
        if ack > self.snd_una:
            self._sample_rtt(ack, now)
            self.snd_una = ack
            if self.snd_nxt < ack:  # cumulative jump past a go-back resend
                self.snd_nxt = ack
            self._forget_acked(ack)
            rearm = True
            if self.state == FAST_RECOVERY:
                if ack >= self.recover:
                    self.cwnd = self.ssthresh
                    self.state = CONGESTION_AVOIDANCE
                else:
                    # partial ACK: the next hole starts at snd_una. The
                    # timer restarts only for the first partial ACK; with
                    # many holes the RTO then fires and collapses the
                    # window (impatient NewReno, no SACK).
                    self._retransmit(now)
                    if self._fr_partial_seen:
                        rearm = False
                    self._fr_partial_seen = True
                self.dupacks = 0
            else:
                self.dupacks = 0
                if self.state in (SLOW_START, RTO_WAIT):
                    self.state = SLOW_START
                    self.cwnd += 1.0
                    if self.cwnd >= self.ssthresh:
                        self.state = CONGESTION_AVOIDANCE
                elif self.state == CONGESTION_AVOIDANCE:
                    self.cwnd += 1.0 / self.cwnd
            if self.snd_nxt > self.snd_una:
                if rearm:
                    self._arm_rto(now)
            else:
                self._rto_epoch += 1  # nothing in flight, disarm
            self._send_available(now)
        elif ack == self.snd_una and self.snd_nxt > self.snd_una:
            self.dupacks += 1
            if self.state == FAST_RECOVERY:
                self.cwnd += 1.0  # window inflation keeps the ACK clock
                self._send_available(now)
            elif self.dupacks == 3 and self.snd_una > self.recover:
                # one reduction per window of data: dupacks for a window
                # that already paid its halving are not a fresh loss event
                self.on_loss_signal(TRIPLE_DUPACK)
                self.recover = self.snd_nxt
                self._fr_partial_seen = False
                self._retransmit(now)
                self._arm_rto(now)

    # --- internals ----------------------------------------------------

    def _send_available(self, now: float) -> None:
        limit = int(self.cwnd) * self.mss
        while self.snd_nxt - self.snd_una + self.mss <= limit:
            seg = Segment(
                self.flow_id, self.snd_nxt, 0, False,
                self.mss + SEG_HEADER_BYTES,
            )
            self._send_times[self.snd_nxt] = now
            self.snd_nxt += self.mss
            self.segments_sent += 1
            if self.snd_nxt - self.snd_una == self.mss:
                self._arm_rto(now)
            self.transmit(seg, now)

    def _retransmit(self, now: float) -> None:
        self._send_times.pop(self.snd_una, None)  # Karn: no RTT sample
        self.retransmits += 1
        self.transmit(
            Segment(self.flow_id, self.snd_una, 0, False,
                    self.mss + SEG_HEADER_BYTES),
            now,
        )

    def _sample_rtt(self, ack: int, now: float) -> None:
        sent = self._send_times.get(ack - self.mss)
        if sent is None:
            return
        sample = now - sent
        if self.srtt is None:
            self.srtt = sample
            self.rttvar = sample / 2.0
        else:
            self.rttvar = 0.75 * self.rttvar + 0.25 * abs(self.srtt - sample)
            self.srtt = 0.875 * self.srtt + 0.125 * sample
        self.rto = min(
            max(self.srtt + 4.0 * self.rttvar, self.min_rto), self.max_rto
        )

    def _forget_acked(self, ack: int) -> None:
        for seq in [s for s in self._send_times if s < ack]:
            del self._send_times[seq]

    def _arm_rto(self, now: float) -> None:
        self._rto_epoch += 1
        self.events.push(now + self.rto, self._on_rto, self._rto_epoch)

    def _on_rto(self, now: float, epoch: int) -> None:
        if epoch != self._rto_epoch or self.snd_nxt == self.snd_una:
            return
        self.on_loss_signal(RTO)
        # go-back-N: resend from the hole as the window reopens
        self.snd_nxt = self.snd_una
        self._send_times = {}
        self._send_available(now)
        self._arm_rto(now)


class TcpReceiver:
    """Reassembly and immediate cumulative ACKs for one flow."""

    def __init__(self, flow_id: int, transmit):
        self.flow_id = flow_id
        self.transmit = transmit
        self.rcv_nxt = 0
        self.delivered_bytes = 0
        self._out_of_order = {}

    def on_data(self, seg: Segment, now: float) -> None:
        if seg.seq == self.rcv_nxt:
            self.rcv_nxt += seg.payload_len
            self.delivered_bytes += seg.payload_len
            while self.rcv_nxt in self._out_of_order:
                step = self._out_of_order.pop(self.rcv_nxt)
                self.rcv_nxt += step
                self.delivered_bytes += step
        elif seg.seq > self.rcv_nxt:
            self._out_of_order[seg.seq] = seg.payload_len
        self.transmit(
            Segment(self.flow_id, 0, self.rcv_nxt, True, SEG_HEADER_BYTES),
            now,
        )
