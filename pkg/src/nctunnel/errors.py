"""Shared exception types."""


class ConfigError(Exception):
    """Invalid configuration value or scenario file (CLI exit code 1)."""


class FramingError(Exception):
    """A datagram that cannot be parsed into a coded packet.

    The message is one of the structured reasons: "unsupported version"
    or "malformed datagram".
    """
