import random

import numpy as np
import pytest

from nctunnel import gf256


def clmul_reduce(a: int, b: int) -> int:
    """Reference multiply: carry-less polynomial product, then reduce by 0x11D.

    Independent of the table path; used as the oracle for every table value.
    """
    r = 0
    for i in range(8):
        if (b >> i) & 1:
            r ^= a << i
    for bit in range(15, 7, -1):
        if (r >> bit) & 1:
            r ^= gf256.POLY << (bit - 8)
    return r


def test_add_examples():
    assert gf256.add(0x57, 0x83) == 0xD4
    assert gf256.add(0x00, 0xAB) == 0xAB
    assert gf256.add(0x5C, 0x5C) == 0x00


def test_mul_examples():
    assert gf256.mul(0x00, 0xFF) == 0x00
    assert gf256.mul(0x01, 0x9C) == 0x9C
    # single shift-and-reduce step: 0x87<<1 = 0x10E, XOR 0x11D = 0x13
    assert clmul_reduce(0x02, 0x87) == 0x13
    assert gf256.mul(0x02, 0x87) == 0x13


def test_mul_agrees_with_clmul_oracle_exhaustively():
    for a in range(256):
        for b in range(256):
            assert gf256.mul(a, b) == clmul_reduce(a, b)


def test_mul_table_matches_scalar_mul():
    expected = np.array(
        [[gf256.mul(a, b) for b in range(256)] for a in range(256)],
        dtype=np.uint8,
    )
    assert np.array_equal(gf256.MUL_TABLE, expected)


def test_commutativity_exhaustive():
    for a in range(256):
        for b in range(a, 256):
            assert gf256.mul(a, b) == gf256.mul(b, a)
            assert gf256.add(a, b) == gf256.add(b, a)


def test_associativity_and_distributivity_sampled():
    rng = random.Random(0xC0DE)
    for _ in range(2000):
        a, b, c = rng.randrange(256), rng.randrange(256), rng.randrange(256)
        assert gf256.mul(gf256.mul(a, b), c) == gf256.mul(a, gf256.mul(b, c))
        assert gf256.add(gf256.add(a, b), c) == gf256.add(a, gf256.add(b, c))
        assert gf256.mul(a, gf256.add(b, c)) == gf256.add(
            gf256.mul(a, b), gf256.mul(a, c)
        )


def test_identity_and_self_inverse_addition():
    for a in range(256):
        assert gf256.add(a, 0) == a
        assert gf256.add(a, a) == 0
        assert gf256.mul(a, 1) == a
        assert gf256.mul(a, 0) == 0


def test_inverse_exists_for_all_nonzero():
    assert gf256.inv(0x01) == 0x01
    for a in range(1, 256):
        assert gf256.mul(a, gf256.inv(a)) == 1


def test_inv_of_two_matches_exhaustive_search():
    found = [b for b in range(1, 256) if gf256.mul(0x02, b) == 1]
    assert found == [gf256.inv(0x02)]


def test_inv_zero_rejected():
    with pytest.raises(ValueError, match="no inverse of zero"):
        gf256.inv(0)


def test_axpy_identity_coefficient():
    assert gf256.axpy(bytes([0, 0]), bytes([0xAA, 0xBB]), 0x01) == bytes(
        [0xAA, 0xBB]
    )


def test_axpy_zero_coefficient_is_noop():
    v = bytes([0x12, 0x34, 0x56])
    assert gf256.axpy(v, bytes([0xFF, 0xFF, 0xFF]), 0x00) == v


def test_axpy_elementwise_via_mul_oracle():
    got = gf256.axpy(bytes([0x57, 0x00]), bytes([0x83, 0x02]), 0x02)
    want = bytes(
        [0x57 ^ clmul_reduce(0x02, 0x83), clmul_reduce(0x02, 0x02)]
    )
    assert got == want


def test_axpy_length_mismatch():
    with pytest.raises(ValueError, match="length mismatch"):
        gf256.axpy(b"\x00", b"\x00\x00", 1)


def test_matvec_matches_scalar_loop():
    rng = random.Random(7)
    for _ in range(50):
        k = rng.randrange(1, 9)
        width = rng.randrange(1, 12)
        coeffs = np.array(
            [rng.randrange(256) for _ in range(k)], dtype=np.uint8
        )
        rows = np.array(
            [[rng.randrange(256) for _ in range(width)] for _ in range(k)],
            dtype=np.uint8,
        )
        want = [0] * width
        for i in range(k):
            for j in range(width):
                want[j] ^= gf256.mul(int(coeffs[i]), int(rows[i][j]))
        assert list(gf256.matvec(coeffs, rows)) == want


def test_matvec_empty_is_zero():
    rows = np.zeros((0, 5), dtype=np.uint8)
    assert list(gf256.matvec(np.zeros(0, dtype=np.uint8), rows)) == [0] * 5
