"""Bit/integer/frame packing conventions, frozen."""

import numpy as np

from shapedtcm.bits import (
    bits_to_int,
    bits_to_poly,
    int_to_bits,
    pack_frames,
    poly_to_bits,
    unpack_frames,
)


def test_int_bits_roundtrip_big_endian():
    assert int_to_bits(6, 4).tolist() == [0, 1, 1, 0]
    assert bits_to_int(np.array([0, 1, 1, 0])) == 6
    rng = np.random.default_rng(1)
    for _ in range(30):
        w = int(rng.integers(1, 90))
        v = sum(int(b) << i for i, b in enumerate(rng.integers(0, 2, size=w)))
        assert bits_to_int(int_to_bits(v, w)) == v
    assert bits_to_int(int_to_bits((1 << 87) - 1, 87)) == (1 << 87) - 1


def test_poly_bits_low_coeff_first():
    assert poly_to_bits(0b1011, 4).tolist() == [1, 1, 0, 1]
    assert bits_to_poly(np.array([1, 1, 0, 1])) == 0b1011


def test_pack_frames_consumes_top_bits_first():
    c = np.array([1, 0, 0, 1, 1, 0], dtype=np.uint8)
    # frame t = (c[L-1-2t] as MSB, c[L-2-2t]); parity end of c comes out last
    assert pack_frames(c, 2).tolist() == [1, 2, 1]
    assert unpack_frames(np.array([1, 2, 1]), 2).tolist() == c.tolist()
    rng = np.random.default_rng(2)
    for k0 in (1, 2, 3):
        bits = rng.integers(0, 2, size=k0 * 11).astype(np.uint8)
        assert np.array_equal(unpack_frames(pack_frames(bits, k0), k0), bits)
