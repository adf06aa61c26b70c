"""Scenario files: the line-based `key = value` format with [sections].

A scenario fully determines one simulation (no wall-clock entropy): link
profiles for each direction, the flow mix, codec parameters, and the seed.
Queue capacities may be given in bytes or as the literal `bdp`, which
resolves to one bandwidth-delay product of that link at the path RTT.

Unknown sections or keys are rejected so typos fail loudly before any
simulation starts.
"""

import configparser
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .linkemu import GilbertElliott, LinkProfile

DEFAULT_SAMPLE_INTERVAL = 1.0
DEFAULT_MSS = 1400
DEFAULT_OUTER_MTU = 1500
DEFAULT_DECODE_WINDOW = 8
DEFAULT_ACK_SYMBOL_SIZE = 64
DEFAULT_FLUSH_TIMEOUT = 0.02

_KNOWN_KEYS = {
    "scenario": {"name", "duration_s", "seed", "sample_interval_s"},
    "downlink": {
        "bandwidth_mbps", "propagation_delay_ms", "queue_capacity",
        "random_loss", "ge_p_good_bad", "ge_p_bad_good", "ge_loss_prob_bad",
    },
    "uplink": {
        "bandwidth_mbps", "propagation_delay_ms", "queue_capacity",
        "random_loss", "ge_p_good_bad", "ge_p_bad_good", "ge_loss_prob_bad",
    },
    "flows": {"plain", "tunneled", "mss"},
    "codec": {
        "generation_size", "overhead", "flush_timeout_ms", "adaptive_overhead",
    },
    "tunnel": {"outer_mtu", "decode_window", "ack_symbol_size"},
}


@dataclass(frozen=True)
class Scenario:
    name: str
    downlink: LinkProfile
    uplink: LinkProfile
    plain_flows: int
    tunneled_flows: int
    mss: int
    generation_size: int
    overhead: int
    flush_timeout: float
    outer_mtu: int
    decode_window: int
    ack_symbol_size: int
    duration: float
    seed: int
    sample_interval: float = DEFAULT_SAMPLE_INTERVAL

    def __post_init__(self):
        if self.duration <= 0:
            raise ConfigError("duration must be positive")
        if self.plain_flows < 0 or self.tunneled_flows < 0:
            raise ConfigError("flow counts cannot be negative")
        if self.plain_flows + self.tunneled_flows < 1:
            raise ConfigError("scenario needs at least one flow")
        if self.sample_interval <= 0:
            raise ConfigError("sample_interval must be positive")
        if self.seed is None:
            raise ConfigError("seed is mandatory")

    @property
    def path_rtt(self) -> float:
        """Base round-trip across both directions, excluding queueing."""
        return (
            self.downlink.propagation_delay_s + self.uplink.propagation_delay_s
        )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}") from exc
    return parse_scenario(text, default_name=path.stem)


def parse_scenario(text: str, default_name: str = "scenario") -> Scenario:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"bad scenario syntax: {exc}") from exc

    for section in cp.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        unknown = set(cp[section]) - _KNOWN_KEYS[section]
        if unknown:
            raise ConfigError(
                f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}"
            )

    sc = cp["scenario"] if cp.has_section("scenario") else {}
    if "seed" not in sc:
        raise ConfigError("scenario needs a seed (no wall-clock entropy)")

    codec = cp["codec"] if cp.has_section("codec") else {}
    adaptive = _get(codec, "adaptive_overhead", str, "off")
    if adaptive != "off":
        raise ConfigError("adaptive overhead is not implemented")

    flows = cp["flows"] if cp.has_section("flows") else {}
    tun = cp["tunnel"] if cp.has_section("tunnel") else {}

    down_prop = _link_fields(cp, "downlink")
    up_prop = _link_fields(cp, "uplink")
    rtt = down_prop["propagation_delay_s"] + up_prop["propagation_delay_s"]

    try:
        return Scenario(
            name=_get(sc, "name", str, default_name),
            downlink=_build_profile(down_prop, rtt),
            uplink=_build_profile(up_prop, rtt),
            plain_flows=_get(flows, "plain", int, 0),
            tunneled_flows=_get(flows, "tunneled", int, 0),
            mss=_get(flows, "mss", int, DEFAULT_MSS),
            generation_size=_get(codec, "generation_size", int, 30),
            overhead=_get(codec, "overhead", int, 6),
            flush_timeout=_get(codec, "flush_timeout_ms", float,
                               DEFAULT_FLUSH_TIMEOUT * 1000) / 1000.0,
            outer_mtu=_get(tun, "outer_mtu", int, DEFAULT_OUTER_MTU),
            decode_window=_get(tun, "decode_window", int, DEFAULT_DECODE_WINDOW),
            ack_symbol_size=_get(tun, "ack_symbol_size", int,
                                 DEFAULT_ACK_SYMBOL_SIZE),
            duration=_get(sc, "duration_s", float, None),
            seed=_get(sc, "seed", int, None),
            sample_interval=_get(sc, "sample_interval_s", float,
                                 DEFAULT_SAMPLE_INTERVAL),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad scenario value: {exc}") from exc


def _get(section, key, cast, default):
    if key not in section:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    raw = section[key]
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def _link_fields(cp, section_name):
    if not cp.has_section(section_name):
        raise ConfigError(f"missing [{section_name}] section")
    sec = cp[section_name]
    fields = {
        "bandwidth_bps": _get(sec, "bandwidth_mbps", float, None) * 1e6,
        "propagation_delay_s": _get(sec, "propagation_delay_ms", float, None)
        / 1000.0,
        "queue_capacity": _get(sec, "queue_capacity", str, "bdp"),
        "random_loss": _get(sec, "random_loss", float, 0.0),
    }
    ge_keys = ("ge_p_good_bad", "ge_p_bad_good", "ge_loss_prob_bad")
    present = [k for k in ge_keys if k in sec]
    if present and len(present) != 3:
        raise ConfigError(
            f"[{section_name}] needs all of {', '.join(ge_keys)} or none"
        )
    fields["burst"] = (
        GilbertElliott(*(float(sec[k]) for k in ge_keys)) if present else None
    )
    return fields


def _build_profile(fields, rtt):
    cap = fields["queue_capacity"]
    if cap == "bdp":
        capacity = max(1, int(fields["bandwidth_bps"] * rtt / 8.0))
    else:
        try:
            capacity = int(cap)
        except ValueError:
            raise ConfigError(
                f"queue_capacity must be bytes or 'bdp', got {cap!r}"
            ) from None
    try:
        return LinkProfile(
            bandwidth_bps=fields["bandwidth_bps"],
            propagation_delay_s=fields["propagation_delay_s"],
            queue_capacity_bytes=capacity,
            random_loss=fields["random_loss"],
            burst=fields["burst"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
