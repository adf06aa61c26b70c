import random
from pathlib import Path

import pytest

from nctunnel.errors import ConfigError, FramingError
from nctunnel.framing import (
    HEADER_SIZE,
    OUTER_OVERHEAD,
    inner_mtu,
    parse,
    serialize,
)
from nctunnel.rlnc import CodecConfig, CodedPacket

FIXTURES = Path(__file__).parent / "fixtures"


def load_golden(name: str) -> bytes:
    text = (FIXTURES / name).read_text()
    hx = "".join(
        line.strip() for line in text.splitlines() if not line.startswith("#")
    )
    return bytes.fromhex(hx)


def random_packet(rng: random.Random) -> CodedPacket:
    n = rng.randint(1, 80)
    k = rng.randint(1, n)
    s = rng.randint(3, 64)
    coeffs = bytes([rng.randrange(256) for _ in range(k - 1)] + [rng.randint(1, 255)])
    return CodedPacket(
        generation_id=rng.randrange(2**32),
        generation_size=n,
        coefficients=coeffs,
        payload=rng.randbytes(s),
        final=rng.random() < 0.5,
    )


class TestGoldens:
    def test_minimal(self):
        raw = load_golden("golden_minimal.hex")
        assert len(raw) == 16
        cp = parse(raw)
        assert cp.generation_id == 0
        assert cp.generation_size == 1
        assert cp.prefix_size == 1
        assert cp.coefficients == b"\x01"
        assert cp.payload == bytes([0x00, 0x01, 0xFF])
        assert cp.final
        assert serialize(cp) == raw

    def test_partial_prefix(self):
        raw = load_golden("golden_partial.hex")
        cp = parse(raw)
        assert cp.generation_id == 7
        assert cp.generation_size == 30
        assert cp.prefix_size == 5
        assert cp.coefficients == bytes([0x0A, 0x00, 0xFF, 0x13, 0x2C])
        assert cp.payload == bytes(range(0x10, 0x20))
        assert not cp.final
        assert serialize(cp) == raw

    def test_full_size(self):
        raw = load_golden("golden_full.hex")
        assert len(raw) == 12 + 30 + 1402 == 1444
        cp = parse(raw)
        assert cp.generation_id == 0x12345678
        assert cp.generation_size == 30
        assert cp.prefix_size == 30
        assert cp.coefficients == bytes(range(1, 31))
        assert cp.payload == bytes((i * 7 + 3) % 256 for i in range(1402))
        assert serialize(cp) == raw


class TestRoundTrip:
    def test_fuzzed_valid_packets(self):
        rng = random.Random(0xF00D)
        for _ in range(1000):
            cp = random_packet(rng)
            again = parse(serialize(cp))
            assert again == cp

    def test_datagram_length_formula(self):
        rng = random.Random(4)
        for _ in range(200):
            cp = random_packet(rng)
            assert len(serialize(cp)) == HEADER_SIZE + cp.prefix_size + len(
                cp.payload
            )


class TestParseErrors:
    def test_truncated_header(self):
        with pytest.raises(FramingError, match="malformed datagram"):
            parse(b"\x01" * 11)

    def test_bad_version(self):
        raw = bytearray(load_golden("golden_minimal.hex"))
        raw[0] = 0x02
        with pytest.raises(FramingError, match="unsupported version"):
            parse(bytes(raw))

    def test_trailing_bytes_rejected(self):
        raw = load_golden("golden_minimal.hex") + b"\x00"
        with pytest.raises(FramingError, match="malformed datagram"):
            parse(raw)

    def test_truncated_payload_rejected(self):
        raw = load_golden("golden_partial.hex")[:-1]
        with pytest.raises(FramingError, match="malformed datagram"):
            parse(raw)

    def test_prefix_exceeding_generation_size_rejected(self):
        cp = CodedPacket(0, 2, bytes([1, 2, 3]), bytes(4))
        with pytest.raises(FramingError, match="malformed datagram"):
            parse(serialize(cp))

    def test_all_zero_coefficients_rejected(self):
        cp = CodedPacket(0, 4, bytes([0, 0]), bytes(4))
        with pytest.raises(FramingError, match="malformed datagram"):
            parse(serialize(cp))

    def test_reserved_flags_ignored_on_decode(self):
        raw = bytearray(load_golden("golden_partial.hex"))
        raw[1] |= 0xFE
        cp = parse(bytes(raw))
        assert not cp.final

    def test_fuzz_never_crashes(self):
        # quick version of the acceptance fuzz: random buffers either parse
        # or raise FramingError, nothing else
        rng = random.Random(99)
        golden = load_golden("golden_partial.hex")
        for _ in range(5000):
            mode = rng.random()
            if mode < 0.4:
                buf = rng.randbytes(rng.randint(0, 64))
            else:
                buf = bytearray(golden)
                for _ in range(rng.randint(1, 4)):
                    buf[rng.randrange(len(buf))] = rng.randrange(256)
                if mode > 0.8:
                    buf = buf[: rng.randint(0, len(buf))]
                buf = bytes(buf)
            try:
                cp = parse(buf)
                # reserved flag bits are dropped on re-encode
                canonical = buf[:1] + bytes([buf[1] & 0x01]) + buf[2:]
                assert serialize(cp) == canonical
            except FramingError as exc:
                assert str(exc) in ("unsupported version", "malformed datagram")


class TestInnerMtu:
    def test_standard_ethernet_n30(self):
        assert inner_mtu(1500, CodecConfig(30, 6, 1402)) == 1428

    def test_standard_ethernet_n60(self):
        assert inner_mtu(1500, CodecConfig(60, 30, 1402)) == 1398

    def test_tiny_outer_mtu_rejected(self):
        with pytest.raises(ConfigError):
            inner_mtu(100, CodecConfig(60, 30, 1402))

    def test_accounts_for_all_layers(self):
        cfg = CodecConfig(8, 2, 64)
        assert inner_mtu(200, cfg) == 200 - OUTER_OVERHEAD - 12 - 8 - 2
