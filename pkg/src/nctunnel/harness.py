"""Experiment orchestration: wire flows, tunnel endpoints and links, run
the event loop, and collect per-interval samples plus a run summary.

Flow classes share the bottleneck: plain TCP segments ride the links
as-is, tunneled segments are packed into bytes and carried through one
shared coded tunnel per direction (bulk symbols down, small ACK symbols
up). Everything derives from the scenario seed, so a (scenario, seed)
pair reproduces byte-identical output.
"""

import statistics
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .framing import OUTER_OVERHEAD, inner_mtu
from .linkemu import EventQueue, Link
from .rlnc import CodecConfig, Generation, GenerationDecoder
from .scenario import Scenario
from .tcpmodel import (
    SEG_HEADER_BYTES,
    TcpReceiver,
    TcpSender,
    pack_segment,
    unpack_segment,
)
from .tunnel import ISLAND_GATEWAY, WORLD_GATEWAY, TunnelEndpoint

FLOW_STAGGER = 0.01  # seconds between flow starts, deterministic


@dataclass
class SampleRow:
    """One sampling interval on the bottleneck (downlink) direction."""

    time_s: float
    tcp_goodput_mbps: float
    nc_goodput_mbps: float
    utilization: float
    loss_fraction: float
    queue_bytes: int


@dataclass
class SweepRow:
    loss: float
    tcp_goodput_mbps: float
    nc_goodput_mbps: float


@dataclass
class RunResult:
    scenario: Scenario
    rows: list
    summary: dict
    downlink: Link = field(repr=False, default=None)
    uplink: Link = field(repr=False, default=None)
    world_endpoint: TunnelEndpoint = field(repr=False, default=None)
    island_endpoint: TunnelEndpoint = field(repr=False, default=None)


def build_codec_configs(scenario: Scenario):
    """(data-direction config, ack-direction config) for one scenario."""
    probe = CodecConfig(
        scenario.generation_size, scenario.overhead, symbol_size=4096,
        flush_timeout=scenario.flush_timeout,
    )
    mtu = inner_mtu(scenario.outer_mtu, probe)
    data_cfg = CodecConfig(
        scenario.generation_size, scenario.overhead, symbol_size=mtu + 2,
        flush_timeout=scenario.flush_timeout,
    )
    ack_cfg = CodecConfig(
        scenario.generation_size, scenario.overhead,
        symbol_size=scenario.ack_symbol_size,
        flush_timeout=scenario.flush_timeout,
    )
    return data_cfg, ack_cfg


def run(scenario: Scenario) -> RunResult:
    """Run one scenario to completion; deterministic per (scenario, seed)."""
    events = EventQueue()
    seeds = np.random.SeedSequence(scenario.seed).spawn(4)
    down = Link(scenario.downlink, events, np.random.default_rng(seeds[0]),
                bucket_width=scenario.sample_interval, name="downlink")
    up = Link(scenario.uplink, events, np.random.default_rng(seeds[1]),
              bucket_width=scenario.sample_interval, name="uplink")

    world_ep = island_ep = None
    tunneled_mss = scenario.mss
    if scenario.tunneled_flows:
        data_cfg, ack_cfg = build_codec_configs(scenario)
        if scenario.ack_symbol_size < SEG_HEADER_BYTES + 2:
            raise ConfigError(
                f"ack_symbol_size {scenario.ack_symbol_size} cannot carry a "
                f"{SEG_HEADER_BYTES}-byte ACK segment"
            )
        world_ep = TunnelEndpoint(
            WORLD_GATEWAY, data_cfg, np.random.default_rng(seeds[2]),
            peer_config=ack_cfg, decode_window=scenario.decode_window,
        )
        island_ep = TunnelEndpoint(
            ISLAND_GATEWAY, ack_cfg, np.random.default_rng(seeds[3]),
            peer_config=data_cfg, decode_window=scenario.decode_window,
        )
        # the tunnel caps the inner packet size; clamp the segment size
        tunneled_mss = min(
            scenario.mss, data_cfg.max_packet_size - SEG_HEADER_BYTES
        )

    senders = {}
    receivers = {}
    plain_ids = list(range(scenario.plain_flows))
    nc_ids = list(
        range(scenario.plain_flows,
              scenario.plain_flows + scenario.tunneled_flows)
    )

    def down_deliver(pkt, now):
        if isinstance(pkt, bytes):
            for inner in island_ep.egress(pkt):
                seg = unpack_segment(inner)
                receivers[seg.flow_id].on_data(seg, now)
        else:
            receivers[pkt.flow_id].on_data(pkt, now)

    def up_deliver(pkt, now):
        if isinstance(pkt, bytes):
            for inner in world_ep.egress(pkt):
                seg = unpack_segment(inner)
                senders[seg.flow_id].on_ack(seg, now)
        else:
            senders[pkt.flow_id].on_ack(pkt, now)

    down.sink = down_deliver
    up.sink = up_deliver

    def plain_tx(seg, now):
        down.offer(seg, seg.size, now)

    def plain_ack_tx(seg, now):
        up.offer(seg, seg.size, now)

    def nc_tx(seg, now):
        for d in world_ep.ingress(pack_segment(seg), now):
            down.offer(d, len(d) + OUTER_OVERHEAD, now)

    def nc_ack_tx(seg, now):
        for d in island_ep.ingress(pack_segment(seg), now):
            up.offer(d, len(d) + OUTER_OVERHEAD, now)

    for fid in plain_ids:
        senders[fid] = TcpSender(fid, scenario.mss, events, plain_tx)
        receivers[fid] = TcpReceiver(fid, plain_ack_tx)
    for fid in nc_ids:
        senders[fid] = TcpSender(fid, tunneled_mss, events, nc_tx)
        receivers[fid] = TcpReceiver(fid, nc_ack_tx)

    # samples first so that, on time ties, a row closes its window before
    # new deliveries land in the next one
    rows = []
    prev = {"tcp": 0, "nc": 0}

    def sample(t):
        interval = scenario.sample_interval
        bucket = round(t / interval) - 1
        tcp_total = sum(receivers[f].delivered_bytes for f in plain_ids)
        nc_total = sum(receivers[f].delivered_bytes for f in nc_ids)
        busy, offers, drops = down.window_stats(bucket)
        rows.append(SampleRow(
            time_s=t,
            tcp_goodput_mbps=(tcp_total - prev["tcp"]) * 8 / interval / 1e6,
            nc_goodput_mbps=(nc_total - prev["nc"]) * 8 / interval / 1e6,
            utilization=min(1.0, busy / interval),
            loss_fraction=(drops / offers) if offers else 0.0,
            queue_bytes=down.queued_bytes,
        ))
        prev["tcp"] = tcp_total
        prev["nc"] = nc_total

    n_samples = int(scenario.duration / scenario.sample_interval + 1e-9)
    for k in range(1, n_samples + 1):
        events.push(k * scenario.sample_interval, sample)

    for idx, fid in enumerate(plain_ids + nc_ids):
        events.push(idx * FLOW_STAGGER,
                    lambda t, s=senders[fid]: s.start(t))

    if scenario.tunneled_flows:
        period = scenario.flush_timeout / 2.0

        def tunnel_tick(t):
            for d in world_ep.tick(t):
                down.offer(d, len(d) + OUTER_OVERHEAD, t)
            for d in island_ep.tick(t):
                up.offer(d, len(d) + OUTER_OVERHEAD, t)
            if t + period <= scenario.duration:
                events.push(t + period, tunnel_tick)

        events.push(period, tunnel_tick)

    events.advance(scenario.duration)

    summary = _summarize(scenario, rows, down, up, world_ep, island_ep)
    return RunResult(scenario, rows, summary, down, up, world_ep, island_ep)


def _summarize(scenario, rows, down, up, world_ep, island_ep):
    def klass(values, flows):
        if not rows:
            return {"flows": flows, "mean_goodput_mbps": 0.0,
                    "median_goodput_mbps": 0.0}
        return {
            "flows": flows,
            "mean_goodput_mbps": round(statistics.fmean(values), 6),
            "median_goodput_mbps": round(statistics.median(values), 6),
        }

    summary = {
        "scenario": scenario.name,
        "seed": scenario.seed,
        "duration_s": scenario.duration,
        "plain": klass([r.tcp_goodput_mbps for r in rows],
                       scenario.plain_flows),
        "tunneled": klass([r.nc_goodput_mbps for r in rows],
                          scenario.tunneled_flows),
        "mean_utilization": round(
            statistics.fmean(r.utilization for r in rows), 6
        ) if rows else 0.0,
        "downlink": _link_summary(down),
        "uplink": _link_summary(up),
    }
    if world_ep is not None:
        summary["tunnel"] = {
            "generations_decoded": (
                world_ep.stats.generations_decoded
                + island_ep.stats.generations_decoded
            ),
            "generations_failed": (
                world_ep.stats.generations_failed
                + island_ep.stats.generations_failed
            ),
            "datagrams_sent": (
                world_ep.stats.datagrams_sent + island_ep.stats.datagrams_sent
            ),
            "datagrams_received": (
                world_ep.stats.datagrams_received
                + island_ep.stats.datagrams_received
            ),
            "inner_in": world_ep.stats.inner_in + island_ep.stats.inner_in,
            "inner_out": world_ep.stats.inner_out + island_ep.stats.inner_out,
            "malformed": world_ep.stats.malformed + island_ep.stats.malformed,
        }
    return summary


def _link_summary(link):
    return {
        "offered": link.offered,
        "delivered": link.delivered,
        "dropped_tail": link.dropped_tail,
        "dropped_random": link.dropped_random,
        "dropped_burst": link.dropped_burst,
    }


def sweep_loss(scenario: Scenario, losses) -> list:
    """Run the scenario per loss value, each flow class in isolation.

    The loss value replaces the random loss on both directions; run i uses
    seed + i so sweep points are independent.
    """
    losses = list(losses)
    if not losses:
        raise ConfigError("loss sweep needs at least one loss value")
    out = []
    for i, loss in enumerate(losses):
        if not 0.0 <= loss <= 1.0:
            raise ConfigError(f"loss must be in [0,1], got {loss}")
        base = replace(
            scenario,
            downlink=replace(scenario.downlink, random_loss=loss),
            uplink=replace(scenario.uplink, random_loss=loss),
            seed=scenario.seed + i,
        )
        tcp = nc = 0.0
        if base.plain_flows:
            res = run(replace(base, tunneled_flows=0))
            tcp = res.summary["plain"]["mean_goodput_mbps"]
        if base.tunneled_flows:
            res = run(replace(base, plain_flows=0))
            nc = res.summary["tunneled"]["mean_goodput_mbps"]
        out.append(SweepRow(loss, tcp, nc))
    return out


def codec_bench(generation_size: int, overhead: int, generations: int,
                seed: int, symbol_size: int = 1402,
                deliver: str = "all") -> dict:
    """Encode and decode full generations in memory; report throughput.

    deliver="all" feeds every emission to the decoder; deliver="exact_n"
    feeds exactly n of them, which exposes the raw full-rank failure
    probability of the field. Failure counts are deterministic for a fixed
    seed; the Mbps figures are wall-clock measurements.
    """
    if generations < 1:
        raise ConfigError("generations must be >= 1")
    if deliver not in ("all", "exact_n"):
        raise ConfigError(f"unknown deliver mode {deliver!r}")
    cfg = CodecConfig(generation_size, overhead, symbol_size)
    rng = np.random.default_rng(seed)
    payload_bytes = cfg.max_packet_size
    failures = 0
    encode_time = decode_time = 0.0
    for gid in range(generations):
        packets = [rng.integers(0, 256, payload_bytes, dtype=np.uint8).tobytes()
                   for _ in range(generation_size)]
        t0 = time.perf_counter()
        gen = Generation(gid, cfg)
        for p in packets:
            gen.push(p)
        emissions = generation_size + (overhead if deliver == "all" else 0)
        coded = [gen.emit(rng) for _ in range(emissions)]
        encode_time += time.perf_counter() - t0

        t0 = time.perf_counter()
        dec = GenerationDecoder(generation_size, symbol_size)
        recovered = []
        for cp in coded:
            dec.push(cp)
            recovered.extend(dec.release())
            if dec.decoded:
                break
        decode_time += time.perf_counter() - t0
        ok = dec.decoded and [p for _, p in sorted(recovered)] == packets
        failures += not ok
    data_bits = generations * generation_size * payload_bytes * 8
    return {
        "generation_size": generation_size,
        "overhead": overhead,
        "generations": generations,
        "symbol_size": symbol_size,
        "deliver": deliver,
        "seed": seed,
        "decode_failures": failures,
        "encode_mbps": round(data_bits / encode_time / 1e6, 2),
        "decode_mbps": round(data_bits / decode_time / 1e6, 2),
    }


def burst_test(scenario: Scenario, burst_len: int, seed: int,
               generations: int = 12) -> dict:
    """Stream full generations over a clean link and kill one burst.

    Deterministic demonstration of the loss-burst boundary: bursts within
    the repair budget are masked, bursts beyond it destroy generations.
    """
    if burst_len < 1:
        raise ConfigError("burst length must be >= 1")
    events = EventQueue()
    seeds = np.random.SeedSequence(seed).spawn(2)
    clean = replace(scenario.downlink, random_loss=0.0, burst=None)
    link = Link(clean, events, np.random.default_rng(seeds[0]),
                name="downlink")
    data_cfg, _ = build_codec_configs(scenario)
    enc = TunnelEndpoint(WORLD_GATEWAY, data_cfg,
                         np.random.default_rng(seeds[1]),
                         decode_window=max(scenario.decode_window, generations))
    dec = TunnelEndpoint(ISLAND_GATEWAY, data_cfg,
                         np.random.default_rng(seeds[1]),
                         decode_window=max(scenario.decode_window, generations))
    delivered = []
    link.sink = lambda pkt, now: delivered.extend(dec.egress(pkt))

    n = scenario.generation_size
    total_packets = generations * n
    datagram_bytes = 12 + n + data_cfg.symbol_size + OUTER_OVERHEAD
    # pace inner packets so coded traffic loads the link to ~60%
    dt = (datagram_bytes * 8 / clean.bandwidth_bps) \
        * ((n + scenario.overhead) / n) / 0.6
    payload = b"\xA5" * min(64, data_cfg.max_packet_size)
    burst_start = (total_packets // 3) * dt
    link.inject_burst(burst_start, burst_len)
    for i in range(total_packets):
        t = i * dt
        events.advance(t)
        for d in enc.ingress(payload, t):
            link.offer(d, len(d) + OUTER_OVERHEAD, t)
    events.advance(total_packets * dt + 10.0)

    return {
        "burst_len": burst_len,
        "burst_start_s": round(burst_start, 6),
        "generations": generations,
        "generations_decoded": dec.stats.generations_decoded,
        "generations_lost": generations - dec.stats.generations_decoded,
        "inner_sent": enc.stats.inner_in,
        "inner_delivered": len(delivered),
        "datagrams_sent": enc.stats.datagrams_sent,
        "datagrams_dropped": link.dropped,
    }
