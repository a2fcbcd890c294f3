"""Systematic CRC outer code over GF(2).

Bit index i of a codeword is the coefficient of x^i. A degree-m generator
p(x) with p_0 = p_m = 1 maps a message w(x) to

    u(x) = x^m w(x) + (x^m w(x) mod p(x))

so the m parity bits sit in the lowest indices, u_{i+m} = w_i, and p(x)
divides u(x). Words are packed into Python ints for the long division.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bits import bits_to_poly, poly_to_bits


@dataclass(frozen=True)
class CrcSpec:
    """Generator polynomial, coefficient bit i of `coeffs` = coeff of x^i."""

    degree: int
    coeffs: int

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        if not (self.coeffs >> self.degree) & 1 or self.coeffs >> (self.degree + 1):
            raise ValueError(f"coeffs must have degree exactly {self.degree}")
        if not self.coeffs & 1:
            raise ValueError("constant term must be 1")

    @classmethod
    def from_hex(cls, degree: int, coeffs: str) -> "CrcSpec":
        return cls(degree, int(coeffs, 16))


def _poly_mod(value: int, spec: CrcSpec) -> int:
    p, m = spec.coeffs, spec.degree
    while value.bit_length() > m:
        value ^= p << (value.bit_length() - 1 - m)
    return value


def crc_encode(msg_bits: np.ndarray, spec: CrcSpec) -> np.ndarray:
    """Systematic codeword [parity (m bits), message], polynomial bit order."""
    msg_bits = np.asarray(msg_bits, dtype=np.uint8)
    shifted = bits_to_poly(msg_bits) << spec.degree
    rem = _poly_mod(shifted, spec)
    return np.concatenate([poly_to_bits(rem, spec.degree), msg_bits])


def crc_check(code_bits: np.ndarray, spec: CrcSpec) -> bool:
    """True iff p(x) divides the codeword polynomial."""
    code_bits = np.asarray(code_bits, dtype=np.uint8)
    if code_bits.size <= spec.degree:
        return False
    return _poly_mod(bits_to_poly(code_bits), spec) == 0


def crc_strip(code_bits: np.ndarray, spec: CrcSpec) -> np.ndarray:
    """Message bits of a systematic codeword (no divisibility check)."""
    return np.asarray(code_bits, dtype=np.uint8)[spec.degree:]


def parity_sets(spec: CrcSpec, msg_len: int) -> list[np.ndarray]:
    """Message positions feeding each parity bit.

    Parity bit i is the XOR of message bits w_j over j in the returned set
    (linearity of the remainder: column j is x^{m+j} mod p(x)).
    """
    m = spec.degree
    cols = np.zeros((m, msg_len), dtype=np.uint8)
    r = _poly_mod(1 << m, spec)
    for j in range(msg_len):
        for i in range(m):
            cols[i, j] = (r >> i) & 1
        r = _poly_mod(r << 1, spec)
    return [np.flatnonzero(cols[i]) for i in range(m)]


def enumerate_generators(degree: int) -> list[CrcSpec]:
    """All 2^(m-1) degree-m generators with unit constant term, ascending."""
    specs = []
    for mid in range(1 << (degree - 1)):
        coeffs = (1 << degree) | (mid << 1) | 1
        specs.append(CrcSpec(degree, coeffs))
    return specs
