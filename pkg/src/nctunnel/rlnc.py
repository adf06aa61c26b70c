"""Generation-based random linear codec: encoder and streaming decoder.

A generation collects up to n source packets (each stored as a fixed-size
symbol: 2-byte big-endian length prefix, payload, zero padding). Every
emission is a coded packet: a random linear combination of the symbols
currently held, so redundancy can flow before the generation is full. The
coefficient vector covers only the leading k slots ("prefix coding"), which
keeps early emissions short.

The decoder keeps one augmented matrix per generation in reduced
row-echelon form. Each pushed packet either raises the rank by one
(innovative) or reduces to zero (redundant); source packets are released as
soon as their row becomes a unit vector, which under zero loss happens
packet by packet.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import gf256

INNOVATIVE = "innovative"
REDUNDANT = "redundant"
DECODED = "decoded"

MAX_GENERATION_SIZE = 255
MAX_SYSTEM_SIZE = 65535
LENGTH_PREFIX_BYTES = 2


@dataclass(frozen=True)
class CodecConfig:
    """Static codec parameters shared by both ends of one direction.

    generation_size: source packets per generation (n).
    overhead: extra coded packets per full generation (omega).
    symbol_size: bytes per stored symbol, including the length prefix.
    flush_timeout: virtual seconds before a partial generation is sealed.
    """

    generation_size: int
    overhead: int
    symbol_size: int
    flush_timeout: float = 0.05

    def __post_init__(self):
        n, w, s = self.generation_size, self.overhead, self.symbol_size
        if not 1 <= n <= MAX_GENERATION_SIZE:
            raise ValueError(f"generation_size must be 1..255, got {n}")
        if w < 0 or n + w > MAX_SYSTEM_SIZE:
            raise ValueError(f"overhead out of range: {w} (n + overhead <= 65535)")
        if s < LENGTH_PREFIX_BYTES + 1:
            raise ValueError(f"symbol_size must be >= 3, got {s}")
        if self.flush_timeout <= 0:
            raise ValueError("flush_timeout must be positive")

    @property
    def max_packet_size(self) -> int:
        """Largest source packet that fits one symbol."""
        return self.symbol_size - LENGTH_PREFIX_BYTES


@dataclass
class CodedPacket:
    """One emitted equation: coefficients over the leading slots plus the
    combined payload."""

    generation_id: int
    generation_size: int
    coefficients: bytes
    payload: bytes
    final: bool = False

    @property
    def prefix_size(self) -> int:
        return len(self.coefficients)


def emission_schedule(config: CodecConfig) -> list[int]:
    """Coded emissions to send right after each source push.

    Entry i (0-based) is the emission count after push i+1: one
    source-triggered emission, plus any repair emissions scheduled there.
    Repair j of omega lands after push ceil(j*n/omega), spreading the
    overhead across the generation; the counts sum to n + omega.
    """
    n, w = config.generation_size, config.overhead
    counts = [1] * n
    for j in range(1, w + 1):
        counts[math.ceil(j * n / w) - 1] += 1
    return counts


def repair_budget(config: CodecConfig, k: int) -> int:
    """Total repair emissions owed by a generation sealed with k symbols."""
    return math.ceil(config.overhead * k / config.generation_size)


class Generation:
    """Encoder-side block of source symbols awaiting/undergoing emission."""

    def __init__(self, generation_id: int, config: CodecConfig):
        self.generation_id = generation_id
        self.config = config
        self.sealed = False
        self.size = 0
        self._symbols = np.zeros(
            (config.generation_size, config.symbol_size), dtype=np.uint8
        )

    @property
    def declared_size(self) -> int:
        """Generation size as carried on the wire: n while open, k once
        sealed."""
        return self.size if self.sealed else self.config.generation_size

    def push(self, packet: bytes) -> int:
        """Store one source packet; returns its slot index (0-based).

        Seals the generation automatically when it reaches n symbols.
        """
        if self.sealed:
            raise ValueError("generation is sealed")
        if len(packet) > self.config.max_packet_size:
            raise ValueError(
                f"packet of {len(packet)} bytes exceeds inner MTU "
                f"{self.config.max_packet_size}"
            )
        slot = self.size
        row = self._symbols[slot]
        row[0] = len(packet) >> 8
        row[1] = len(packet) & 0xFF
        row[2 : 2 + len(packet)] = np.frombuffer(packet, dtype=np.uint8)
        self.size += 1
        if self.size == self.config.generation_size:
            self.seal()
        return slot

    def seal(self) -> None:
        """Close the generation at its current size (idempotent)."""
        self.sealed = True

    def symbol(self, slot: int) -> bytes:
        return self._symbols[slot].tobytes()

    def emit(self, rng: np.random.Generator, final: bool = False) -> CodedPacket:
        """Draw random coefficients over the held symbols and combine them.

        All-zero draws are redrawn so no emission is wasted.
        """
        if self.size == 0:
            raise ValueError("cannot emit from an empty generation")
        coeffs = rng.integers(0, 256, self.size, dtype=np.uint8)
        while not coeffs.any():
            coeffs = rng.integers(0, 256, self.size, dtype=np.uint8)
        payload = gf256.matvec(coeffs, self._symbols[: self.size])
        return CodedPacket(
            generation_id=self.generation_id,
            generation_size=self.declared_size,
            coefficients=coeffs.tobytes(),
            payload=payload.tobytes(),
            final=final,
        )


@dataclass
class ReleaseRecord:
    """Outcome of one release sweep."""

    packets: list = field(default_factory=list)  # (slot, bytes) pairs
    corrupt_slots: list = field(default_factory=list)


class GenerationDecoder:
    """Streaming Gaussian elimination over one generation's coded packets.

    The matrix [coefficients | payload] is kept in reduced row-echelon form
    with unit pivots, so a new packet is reduced against all existing pivots
    in one pass and existing rows are back-eliminated in one pass.
    """

    def __init__(self, generation_size: int, symbol_size: int):
        if generation_size < 1:
            raise ValueError("generation_size must be >= 1")
        self.alloc_size = generation_size
        self.symbol_size = symbol_size
        self.expected_size = generation_size  # shrinks if a seal is seen
        self.rank = 0
        self.decoded = False
        self.corrupt_slots = 0
        width = generation_size + symbol_size
        self._rows = np.zeros((generation_size, width), dtype=np.uint8)
        self._pivots: list[int] = []
        self._row_of_pivot: dict[int, int] = {}
        self._released = [False] * generation_size

    def push(self, cp: CodedPacket) -> str:
        """Reduce one coded packet into the matrix.

        Returns INNOVATIVE, REDUNDANT, or DECODED (rank reached the
        effective generation size).
        """
        if len(cp.payload) != self.symbol_size:
            raise ValueError(
                f"payload length {len(cp.payload)} does not match symbol "
                f"size {self.symbol_size}"
            )
        k = cp.prefix_size
        if k > self.alloc_size:
            raise ValueError("prefix size exceeds generation size")
        if cp.generation_size < self.expected_size:
            self.expected_size = cp.generation_size
            if self.rank >= self.expected_size:
                self.decoded = True
        if self.decoded:
            return REDUNDANT

        v = np.zeros(self.alloc_size + self.symbol_size, dtype=np.uint8)
        v[:k] = np.frombuffer(cp.coefficients, dtype=np.uint8)
        v[self.alloc_size :] = np.frombuffer(cp.payload, dtype=np.uint8)

        if self.rank:
            pivots = np.array(self._pivots)
            v ^= gf256.matvec(v[pivots], self._rows[: self.rank])

        nonzero = np.nonzero(v[: self.alloc_size])[0]
        if len(nonzero) == 0:
            return REDUNDANT
        pivot = int(nonzero[0])
        lead = int(v[pivot])
        if lead != 1:
            v = gf256.scale(v, gf256.inv(lead))

        if self.rank:
            col = self._rows[: self.rank, pivot]
            if col.any():
                self._rows[: self.rank] ^= gf256.MUL_TABLE[col[:, None], v[None, :]]

        self._rows[self.rank] = v
        self._pivots.append(pivot)
        self._row_of_pivot[pivot] = self.rank
        self.rank += 1
        if self.rank >= self.expected_size:
            self.decoded = True
            return DECODED
        return INNOVATIVE

    def release(self) -> list[tuple[int, bytes]]:
        """Hand out every newly isolated source packet, in slot order.

        A slot is ready once its row is a unit vector. Slots whose length
        prefix is corrupt are dropped and counted, never returned.
        """
        if not self.rank:
            return []
        coeff_counts = np.count_nonzero(
            self._rows[: self.rank, : self.alloc_size], axis=1
        )
        out = []
        for slot in sorted(self._row_of_pivot):
            if self._released[slot]:
                continue
            row = self._row_of_pivot[slot]
            if coeff_counts[row] != 1:
                continue
            self._released[slot] = True
            payload = self._rows[row, self.alloc_size :]
            length = (int(payload[0]) << 8) | int(payload[1])
            if length > self.symbol_size - LENGTH_PREFIX_BYTES:
                self.corrupt_slots += 1
                continue
            out.append(
                (slot, payload[2 : 2 + length].tobytes())
            )
        return out

    @property
    def pending_release(self) -> bool:
        """True while any received-but-unreleased content remains."""
        return any(
            not self._released[slot] for slot in self._row_of_pivot
        )
