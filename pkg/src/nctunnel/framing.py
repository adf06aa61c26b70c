"""Wire format for coded packets inside the tunnel datagram payload.

Layout (all integers big-endian):

    offset  size  field
    0       1     version (0x01)
    1       1     flags (bit0 = final emission of the generation,
                  other bits reserved: zero on encode, ignored on decode)
    2       4     generation_id
    6       2     generation_size (effective n')
    8       2     symbol_size (S)
    10      2     prefix_size (k)
    12      k     coefficients, slot order
    12+k    S     coded payload

Total length is exactly 12 + k + S; anything else is malformed. Golden hex
fixtures for this layout live under tests/fixtures/.
"""

import struct

from .errors import ConfigError, FramingError
from .rlnc import CodecConfig, CodedPacket

HEADER = struct.Struct(">BBIHHH")
HEADER_SIZE = HEADER.size  # 12
VERSION = 0x01
FLAG_FINAL = 0x01

# Outer encapsulation cost on the satellite path: IPv4 (20) + UDP (8).
OUTER_OVERHEAD = 28


def serialize(cp: CodedPacket) -> bytes:
    """Encode a coded packet; byte-identical for identical inputs."""
    flags = FLAG_FINAL if cp.final else 0
    return (
        HEADER.pack(
            VERSION,
            flags,
            cp.generation_id,
            cp.generation_size,
            len(cp.payload),
            cp.prefix_size,
        )
        + cp.coefficients
        + cp.payload
    )


def parse(data: bytes) -> CodedPacket:
    """Decode one datagram payload, validating the layout exactly.

    Raises FramingError("unsupported version") or
    FramingError("malformed datagram"); never anything else.
    """
    if len(data) < HEADER_SIZE:
        raise FramingError("malformed datagram")
    version, flags, gen_id, gen_size, sym_size, prefix = HEADER.unpack_from(data)
    if version != VERSION:
        raise FramingError("unsupported version")
    if len(data) != HEADER_SIZE + prefix + sym_size:
        raise FramingError("malformed datagram")
    if prefix > gen_size:
        raise FramingError("malformed datagram")
    coeffs = data[HEADER_SIZE : HEADER_SIZE + prefix]
    if not any(coeffs):
        raise FramingError("malformed datagram")
    return CodedPacket(
        generation_id=gen_id,
        generation_size=gen_size,
        coefficients=coeffs,
        payload=data[HEADER_SIZE + prefix :],
        final=bool(flags & FLAG_FINAL),
    )


def inner_mtu(outer_path_mtu: int, config: CodecConfig) -> int:
    """Largest unencoded packet the tunnel accepts for this path MTU.

    Subtracts the outer IPv4+UDP encapsulation, the fixed header, the
    worst-case coefficient bytes (one per generation slot) and the symbol
    length prefix.
    """
    n = config.generation_size
    mtu = outer_path_mtu - OUTER_OVERHEAD - HEADER_SIZE - n - 2
    if mtu <= 0:
        raise ConfigError(
            f"outer MTU {outer_path_mtu} leaves no room for inner packets "
            f"with generation size {n}"
        )
    return mtu
