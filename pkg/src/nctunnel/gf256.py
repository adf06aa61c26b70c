"""Arithmetic in GF(2^8) with reduction polynomial x^8+x^4+x^3+x^2+1 (0x11D).

Field elements are plain ints in 0..255. Addition is XOR (characteristic 2),
multiplication goes through log/antilog tables built from the primitive
element 2, which generates the full multiplicative group under 0x11D.

Scalar operations use python lists; bulk row operations (`scale`, `matvec`,
`axpy`) go through a full 256x256 product table and numpy, which is what the
codec hot path uses. All tables are built once at import time and never
mutated, so every function here is safe to call concurrently.
"""

import numpy as np

POLY = 0x11D

_EXP = [0] * 510
_LOG = [0] * 256
_x = 1
for _i in range(255):
    _EXP[_i] = _x
    _LOG[_x] = _i
    _x <<= 1
    if _x & 0x100:
        _x ^= POLY
for _i in range(255, 510):
    _EXP[_i] = _EXP[_i - 255]
del _x, _i

# Full product table: MUL_TABLE[a, b] == mul(a, b).
_log_np = np.array(_LOG, dtype=np.int16)
_exp_np = np.array(_EXP, dtype=np.uint8)
MUL_TABLE = _exp_np[_log_np[:, None] + _log_np[None, :]]
MUL_TABLE[0, :] = 0
MUL_TABLE[:, 0] = 0
MUL_TABLE.setflags(write=False)

_INV = [0] + [_EXP[255 - _LOG[a]] for a in range(1, 256)]


def add(a: int, b: int) -> int:
    """Field addition: bitwise XOR. Also subtraction (self-inverse)."""
    return a ^ b


def mul(a: int, b: int) -> int:
    """Field multiplication via log/antilog lookup."""
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def inv(a: int) -> int:
    """Multiplicative inverse of a nonzero element."""
    if a == 0:
        raise ValueError("no inverse of zero")
    return _INV[a]


def axpy(dst: bytes, src: bytes, c: int) -> bytes:
    """Return dst + c*src elementwise (the multiply-accumulate of one row)."""
    if len(dst) != len(src):
        raise ValueError(
            f"axpy length mismatch: dst {len(dst)} vs src {len(src)}"
        )
    d = np.frombuffer(dst, dtype=np.uint8)
    s = np.frombuffer(src, dtype=np.uint8)
    return (d ^ MUL_TABLE[c][s]).tobytes()


def scale(vec: np.ndarray, c: int) -> np.ndarray:
    """Return c*vec for a uint8 array."""
    return MUL_TABLE[c][vec]


def matvec(coeffs: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """XOR-sum of coeffs[i] * rows[i]: one linear combination of rows.

    coeffs has shape (k,), rows (k, width); result (width,). k may be 0.
    """
    if len(coeffs) == 0:
        return np.zeros(rows.shape[1:], dtype=np.uint8)
    return np.bitwise_xor.reduce(MUL_TABLE[coeffs[:, None], rows], axis=0)
