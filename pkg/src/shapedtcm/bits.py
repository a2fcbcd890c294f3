"""Bit-sequence helpers shared by the encoding chain.

Conventions used throughout the package:

* A bit sequence is a numpy uint8 array. Position i of a codeword corresponds
  to the coefficient of x^i in its polynomial representation.
* An integer index packs big-endian into a bit array: bits[0] is the MSB.
* Data frames are read from the TOP of the codeword downward, so the m parity
  positions (the lowest indices) end up in the last m/k0 frames. The first
  bit taken for a frame is the frame's most significant bit.
"""

from __future__ import annotations

import numpy as np


def int_to_bits(value: int, width: int) -> np.ndarray:
    """Big-endian bit array of `value` (bits[0] = MSB)."""
    if value < 0 or value >> width:
        raise ValueError(f"value does not fit in {width} bits")
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)],
                    dtype=np.uint8)


def bits_to_int(bits: np.ndarray) -> int:
    """Inverse of int_to_bits."""
    out = 0
    for b in np.asarray(bits, dtype=np.uint8):
        out = (out << 1) | int(b)
    return out


def bits_to_poly(bits: np.ndarray) -> int:
    """Pack a bit array into an integer with bit i = bits[i] (polynomial order)."""
    out = 0
    for i, b in enumerate(np.asarray(bits, dtype=np.uint8)):
        if b:
            out |= 1 << i
    return out


def poly_to_bits(value: int, width: int) -> np.ndarray:
    """Unpack an integer into `width` bits, bits[i] = coefficient of x^i."""
    return np.array([(value >> i) & 1 for i in range(width)], dtype=np.uint8)


def pack_frames(code_bits: np.ndarray, k0: int) -> np.ndarray:
    """Split a codeword into k0-bit data frames, parity positions last.

    The codeword is consumed from its highest index down; each group of k0
    bits becomes one frame integer with the first consumed bit as MSB.
    With k0 = 2 and two bits per amplitude this makes frame t equal to the
    amplitude symbol it carries, and puts the m parity bits in the final
    m/k0 frames.
    """
    code_bits = np.asarray(code_bits, dtype=np.uint8)
    if code_bits.size % k0:
        raise ValueError(f"codeword length {code_bits.size} not divisible by k0={k0}")
    rev = code_bits[::-1].reshape(-1, k0)
    weights = 1 << np.arange(k0 - 1, -1, -1)
    return (rev * weights).sum(axis=1).astype(np.int64)


def unpack_frames(frames: np.ndarray, k0: int) -> np.ndarray:
    """Inverse of pack_frames."""
    frames = np.asarray(frames, dtype=np.int64)
    shifts = np.arange(k0 - 1, -1, -1)
    bits = ((frames[:, None] >> shifts) & 1).astype(np.uint8)
    return bits.reshape(-1)[::-1].copy()
