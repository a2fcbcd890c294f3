"""Systematic rate-k0/(k0+1) feedback convolutional codes, tail-biting.

The encoder is the observer canonical realization of a parity-check matrix
H(x) = [h0(x) h1(x) .. h_k0(x)], coefficient bit i = coeff of x^i, h0 of
degree exactly nu with unit constant term. Each frame of k0 input bits u
emits one label l = (u << 1) | y0 where y0 is the parity bit, so the
systematic bits are l >> 1 and the parity bit is the LSB.

State integers pack the register cells LSB-first: bit i of the state is
cell i of the state vector the (A, B) matrices act on.

Tail-biting runs the encoder twice: a zero-state pass to find v_zs, then a
second pass from v_0 = (A^T + I)^-1 v_zs, which ends back in v_0. Frame
counts T for which A^T + I is singular over GF(2) are unsupported and are
rejected with SingularMatrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class UnrealizableSpec(ValueError):
    """Parity polynomials that do not define a systematic feedback encoder."""


class SingularMatrix(ValueError):
    """A^T + I has no GF(2) inverse; this frame count is unsupported."""


@dataclass(frozen=True)
class ConvCodeSpec:
    """k0 input bits/frame, nu memory cells, parity polys h0..h_k0."""

    k0: int
    nu: int
    parity_polys: tuple[int, ...]

    def __post_init__(self):
        if self.k0 < 1 or self.nu < 1:
            raise ValueError("k0 and nu must be >= 1")
        if len(self.parity_polys) != self.k0 + 1:
            raise ValueError(f"need {self.k0 + 1} parity polynomials")
        h0 = self.parity_polys[0]
        if not h0 & 1 or h0.bit_length() != self.nu + 1:
            raise UnrealizableSpec(
                "h0 must have degree exactly nu and a unit constant term"
            )
        if any(h.bit_length() > self.nu + 1 for h in self.parity_polys[1:]):
            raise ValueError("parity polynomial degree exceeds nu")
        object.__setattr__(self, "parity_polys", tuple(self.parity_polys))

    @property
    def n0(self) -> int:
        return self.k0 + 1

    @classmethod
    def from_octal(cls, k0: int, nu: int, polys) -> "ConvCodeSpec":
        return cls(k0, nu, tuple(int(s, 8) for s in polys))


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Single-step state equation v' = A v + B u over GF(2)."""

    A: np.ndarray
    B: np.ndarray


@dataclass(frozen=True, eq=False)
class Trellis:
    """Time-invariant edge tables indexed [state, input]."""

    spec: ConvCodeSpec
    next_state: np.ndarray
    label: np.ndarray

    @property
    def n_states(self) -> int:
        return 1 << self.spec.nu

    @property
    def n_inputs(self) -> int:
        return 1 << self.spec.k0

    @property
    def n_labels(self) -> int:
        return 1 << self.spec.n0

    @staticmethod
    def edge_input(label: int) -> int:
        """Input symbol of an edge; labels carry it in their high bits."""
        return label >> 1


def _state_bits(v: int, nu: int) -> np.ndarray:
    return np.array([(v >> i) & 1 for i in range(nu)], dtype=np.uint8)


def _bits_state(bits: np.ndarray) -> int:
    return int(sum(int(b) << i for i, b in enumerate(bits)))


def _state_matrices(spec: ConvCodeSpec) -> StateSpace:
    # Observer canonical form: cell i-1 feeds from cell i, the parity bit
    # y0 folds back through h0, and inputs enter through h_j adjusted for
    # their direct contribution to y0.
    nu, k0 = spec.nu, spec.k0
    h0 = spec.parity_polys[0]
    A = np.zeros((nu, nu), dtype=np.uint8)
    B = np.zeros((nu, k0), dtype=np.uint8)
    for i in range(1, nu + 1):
        if i < nu:
            A[i - 1, i] = 1
        A[i - 1, 0] ^= (h0 >> i) & 1
        for j in range(k0):
            hj = spec.parity_polys[j + 1]
            B[i - 1, j] = ((hj >> i) & 1) ^ (((h0 >> i) & 1) & (hj & 1))
    return StateSpace(A, B)


def build_trellis(spec: ConvCodeSpec) -> tuple[Trellis, StateSpace]:
    """Enumerate all (state, input) transitions and the matching (A, B).

    The edge tables come from stepping the register realization directly;
    the state equation is then cross-checked against every edge.
    """
    nu, k0 = spec.nu, spec.k0
    S, U = 1 << nu, 1 << k0
    h0 = spec.parity_polys[0]
    nxt = np.zeros((S, U), dtype=np.int64)
    lab = np.zeros((S, U), dtype=np.int64)
    for v in range(S):
        r = [(v >> i) & 1 for i in range(nu)]
        for u in range(U):
            ub = [(u >> j) & 1 for j in range(k0)]
            y0 = r[0]
            for j in range(k0):
                y0 ^= (spec.parity_polys[j + 1] & 1) & ub[j]
            rn = [0] * nu
            for i in range(1, nu + 1):
                t = r[i] if i < nu else 0
                t ^= ((h0 >> i) & 1) & y0
                for j in range(k0):
                    t ^= ((spec.parity_polys[j + 1] >> i) & 1) & ub[j]
                rn[i - 1] = t
            nxt[v, u] = _bits_state(rn)
            lab[v, u] = (u << 1) | y0

    ss = _state_matrices(spec)
    for v in range(S):
        vb = _state_bits(v, nu)
        for u in range(U):
            ub = np.array([(u >> j) & 1 for j in range(k0)], dtype=np.uint8)
            want = (ss.A @ vb + ss.B @ ub) % 2
            if _bits_state(want) != nxt[v, u]:
                raise AssertionError("state equation disagrees with trellis step")
            if lab[v, u] >> 1 != u:
                raise AssertionError("label is not systematic")
    return Trellis(spec, nxt, lab), ss


def _run(start: int, frames: np.ndarray, trellis: Trellis) -> tuple[np.ndarray, int]:
    labels = np.empty(len(frames), dtype=np.int64)
    v = start
    nxt, lab = trellis.next_state, trellis.label
    for t, u in enumerate(frames):
        labels[t] = lab[v, u]
        v = int(nxt[v, u])
    return labels, v


def zero_state_pass(frames: np.ndarray, trellis: Trellis) -> int:
    """Final state after encoding from state 0."""
    return _run(0, np.asarray(frames), trellis)[1]


def gf2_matpow(M: np.ndarray, e: int) -> np.ndarray:
    out = np.eye(M.shape[0], dtype=np.uint8)
    base = M.astype(np.uint8) % 2
    while e:
        if e & 1:
            out = (out @ base) % 2
        base = (base @ base) % 2
        e >>= 1
    return out


def gf2_solve(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unique solution of M x = b over GF(2), or SingularMatrix."""
    n = M.shape[0]
    aug = np.concatenate([M.astype(np.uint8) % 2, (b % 2).reshape(n, 1)], axis=1)
    row = 0
    for col in range(n):
        piv = None
        for i in range(row, n):
            if aug[i, col]:
                piv = i
                break
        if piv is None:
            raise SingularMatrix("matrix is singular over GF(2)")
        aug[[row, piv]] = aug[[piv, row]]
        for i in range(n):
            if i != row and aug[i, col]:
                aug[i] ^= aug[row]
        row += 1
    return aug[:, n].copy()


def frame_count_supported(ss: StateSpace, T: int) -> bool:
    """True iff A^T + I is invertible, i.e. tail-biting works for this T."""
    nu = ss.A.shape[0]
    M = (gf2_matpow(ss.A, T) + np.eye(nu, dtype=np.uint8)) % 2
    try:
        gf2_solve(M, np.zeros(nu, dtype=np.uint8))
    except SingularMatrix:
        return False
    return True


def tail_biting_start(v_zs: int, T: int, ss: StateSpace) -> int:
    """Start state whose second encoding pass returns to itself."""
    nu = ss.A.shape[0]
    M = (gf2_matpow(ss.A, T) + np.eye(nu, dtype=np.uint8)) % 2
    try:
        v0 = gf2_solve(M, _state_bits(v_zs, nu))
    except SingularMatrix:
        near = [t for t in range(max(1, T - 4), T + 5)
                if t != T and frame_count_supported(ss, t)]
        raise SingularMatrix(
            f"frame count {T} unsupported (A^T + I singular); "
            f"nearby supported counts: {near}"
        ) from None
    return _bits_state(v0)


def tb_encode(frames: np.ndarray, trellis: Trellis, ss: StateSpace) -> tuple[np.ndarray, int]:
    """Two-pass tail-biting encoding: (label sequence, start state v0 = vT)."""
    frames = np.asarray(frames)
    v_zs = zero_state_pass(frames, trellis)
    v0 = tail_biting_start(v_zs, len(frames), ss)
    labels, v_end = _run(v0, frames, trellis)
    if v_end != v0:
        raise AssertionError("second pass did not return to its start state")
    return labels, v0
