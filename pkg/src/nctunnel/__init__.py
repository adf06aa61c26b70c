"""Generation-based RLNC tunnel codec and satellite-link TCP simulator."""

from .errors import ConfigError, FramingError
from .framing import inner_mtu, parse, serialize
from .harness import (
    RunResult,
    SampleRow,
    SweepRow,
    burst_test,
    codec_bench,
    run,
    sweep_loss,
)
from .linkemu import EventQueue, GilbertElliott, Link, LinkProfile
from .rlnc import (
    CodecConfig,
    CodedPacket,
    Generation,
    GenerationDecoder,
    emission_schedule,
)
from .scenario import Scenario, load_scenario, parse_scenario
from .tcpmodel import TcpReceiver, TcpSender, bdp
from .tunnel import TunnelEndpoint, TunnelStats

__version__ = "0.1.0"

__all__ = [
    "CodecConfig",
    "CodedPacket",
    "ConfigError",
    "EventQueue",
    "FramingError",
    "Generation",
    "GenerationDecoder",
    "GilbertElliott",
    "Link",
    "LinkProfile",
    "RunResult",
    "SampleRow",
    "Scenario",
    "SweepRow",
    "TcpReceiver",
    "TcpSender",
    "TunnelEndpoint",
    "TunnelStats",
    "bdp",
    "burst_test",
    "codec_bench",
    "emission_schedule",
    "inner_mtu",
    "load_scenario",
    "parse",
    "parse_scenario",
    "run",
    "serialize",
    "sweep_loss",
    "__version__",
]
