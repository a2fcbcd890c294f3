"""Exact distribution analysis of the encoder chain.

Three computations, all closed-form:

* state-PMF evolution p_t = C p_{t-1} for a trellis driven by i.i.d. input
  frames, including its convergence to the uniform fixed point;
* the output-label PMF q = D p and its structural consequences (label
  probability depends only on the systematic bits once p is uniform, which
  makes the mapped signal PMF symmetric);
* the exact PMF of each outer-code parity bit given independent but not
  identically distributed message bits, via the XOR bias product
  P(U_i = 0) = 1/2 + 1/2 * prod_j (1 - 2 P(W_j = 1)).

Convention: C[v_next, v] = P(v -> v_next), so columns sum to 1 and PMFs are
column vectors multiplied from the left.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crc import CrcSpec, parity_sets
from .tbcc import Trellis


@dataclass(frozen=True, eq=False)
class TransitionMatrices:
    """C: state -> state, D: state -> label, for one i.i.d. frame PMF."""

    C: np.ndarray
    D: np.ndarray


def _check_pmf(p: np.ndarray, what: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if abs(p.sum() - 1) > 1e-12 or (p < 0).any():
        raise ValueError(f"{what} is not a probability vector")
    return p


def build_transition_matrices(trellis: Trellis, frame_pmf: np.ndarray) -> TransitionMatrices:
    frame_pmf = _check_pmf(frame_pmf, "frame_pmf")
    if len(frame_pmf) != trellis.n_inputs:
        raise ValueError("frame_pmf length must match the trellis input alphabet")
    S, L = trellis.n_states, trellis.n_labels
    C = np.zeros((S, S))
    D = np.zeros((L, S))
    for v in range(S):
        for u in range(trellis.n_inputs):
            C[trellis.next_state[v, u], v] += frame_pmf[u]
            D[trellis.label[v, u], v] += frame_pmf[u]
    assert np.allclose(C.sum(axis=0), 1, atol=1e-12)
    # the parity bit of a label is a function of state cell 0 alone, so each
    # label is emitted by exactly half the states, with one common weight
    for l in range(L):
        nz = D[l][D[l] > 0]
        assert len(nz) == S // 2 and np.ptp(nz) == 0
    return TransitionMatrices(C, D)


def evolve_state_pmf(p0: np.ndarray, tm: TransitionMatrices, steps: int) -> np.ndarray:
    p = _check_pmf(p0, "p0")
    for _ in range(steps):
        p = tm.C @ p
    return p


def output_label_pmf(p: np.ndarray, tm: TransitionMatrices) -> np.ndarray:
    return tm.D @ _check_pmf(p, "p")


def second_eigenvalue_magnitude(tm: TransitionMatrices) -> float:
    """|second-largest eigenvalue| of C; < 1 means geometric mixing."""
    mags = np.sort(np.abs(np.linalg.eigvals(tm.C)))
    return float(mags[-2])


def crc_bit_pmf_exact(spec: CrcSpec, bit_pmfs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact P(U_i = 0) for each parity bit of the systematic outer code.

    bit_pmfs[j] = P(W_j = 1) for message bit j, bits independent. Each
    parity bit XORs a fixed subset of message bits, so its bias is the
    product of the per-bit biases. Also returns how many even- and
    odd-indexed message positions feed each parity bit: the bias shrinks
    exponentially in these counts, so small values flag a degenerate
    polynomial rather than failing silently.
    """
    bit_pmfs = np.asarray(bit_pmfs, dtype=np.float64)
    if ((bit_pmfs < 0) | (bit_pmfs > 1)).any():
        raise ValueError("bit_pmfs entries must be probabilities")
    sets = parity_sets(spec, len(bit_pmfs))
    prob0 = np.empty(spec.degree)
    j_even = np.empty(spec.degree, dtype=np.int64)
    j_odd = np.empty(spec.degree, dtype=np.int64)
    for i, w in enumerate(sets):
        prob0[i] = 0.5 + 0.5 * np.prod(1 - 2 * bit_pmfs[w])
        j_even[i] = int((w % 2 == 0).sum())
        j_odd[i] = int((w % 2 == 1).sum())
    return prob0, j_even, j_odd


def crc_bit_pmf_from_symbols(
    spec: CrcSpec, symbol_pmf: np.ndarray, n_symbols: int, alpha: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact parity-bit PMF for i.i.d. symbols of alpha bits each.

    Message bit alpha*t + r is bit r of symbol t. crc_bit_pmf_exact treats
    the message bits as independent, which they are not across the bits of
    one symbol; here the XOR bias factorizes over symbols instead, using
    each symbol's joint PMF, so the result matches brute-force enumeration
    of symbol sequences. The two agree whenever no parity set touches two
    bits of the same symbol, and differ (slightly) otherwise.
    """
    symbol_pmf = _check_pmf(symbol_pmf, "symbol_pmf")
    if len(symbol_pmf) != 1 << alpha:
        raise ValueError("symbol_pmf length must be 2**alpha")
    a = np.arange(1 << alpha)
    sets = parity_sets(spec, n_symbols * alpha)
    prob0 = np.empty(spec.degree)
    j_even = np.empty(spec.degree, dtype=np.int64)
    j_odd = np.empty(spec.degree, dtype=np.int64)
    for i, w in enumerate(sets):
        members = set(int(j) for j in w)
        bias = 1.0
        for t in range(n_symbols):
            mask = 0
            for r in range(alpha):
                if alpha * t + r in members:
                    mask |= 1 << r
            if mask:
                signs = 1 - 2 * (_popcount(a & mask) & 1)
                bias *= float(symbol_pmf @ signs)
        prob0[i] = 0.5 + 0.5 * bias
        j_even[i] = int((w % 2 == 0).sum())
        j_odd[i] = int((w % 2 == 1).sum())
    return prob0, j_even, j_odd


def _popcount(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    x = x.copy()
    while x.any():
        out += x & 1
        x >>= 1
    return out
