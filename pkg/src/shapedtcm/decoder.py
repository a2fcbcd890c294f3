"""Serial list decoding of the tail-biting trellis, with outer-code gating.

The decoder treats the union of all 2^nu start-state subtrellises as one
search graph and emits complete tail-biting paths in exactly non-decreasing
metric order. It works best-first: a backward Viterbi pass (vectorized over
all terminal states at once) gives the exact cost-to-go from every (stage,
state) to every terminal state, so a prefix's heap priority g + h is the
metric of the best complete path through it. Prefixes therefore never pop
unless they lie on one of the H best paths, which keeps the heap small.

Each frame's branch metric is (x - y)^2 + 2 sigma^2 ln(1/P(x)), natural
log: the per-signal prior enters on the same scale as the Gaussian
exponent, which is what makes the path minimum the MAP word.

Ties are broken deterministically: smaller metric, then smaller start
state, then lexicographically smaller label path.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .bits import int_to_bits, unpack_frames
from .crc import CrcSpec, crc_check, crc_strip
from .modulation import Constellation
from .shaping import NotInCodebook, binary_invert
from .tbcc import Trellis


@dataclass(frozen=True)
class DecoderConfig:
    """list_size = H; shaped_frames splits shaped head from uniform tail.

    prior_mode "per-position" uses the shaped prior on the first
    shaped_frames frames and a uniform prior on the rest; "homogeneous"
    uses the shaped prior everywhere.
    """

    list_size: int
    sigma: float
    prior_mode: str = "per-position"
    shaped_frames: int | None = None
    max_expansions: int = 1_000_000

    def __post_init__(self):
        if self.list_size < 1:
            raise ValueError("list_size must be >= 1")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.prior_mode not in ("per-position", "homogeneous"):
            raise ValueError("prior_mode must be per-position or homogeneous")
        if self.prior_mode == "per-position" and self.shaped_frames is None:
            raise ValueError("per-position priors need shaped_frames")


@dataclass(frozen=True, eq=False)
class Candidate:
    labels: np.ndarray
    start_state: int
    metric: float
    rank: int


@dataclass(frozen=True, eq=False)
class DecodeResult:
    status: str  # ok | list_exhausted | not_in_codebook
    message: np.ndarray | None
    rank: int | None
    metric: float | None
    crc_failures: int


def branch_metric(x: float, y: float, prior: float, sigma: float) -> float:
    if prior <= 0:
        return np.inf
    return (x - y) ** 2 + 2 * sigma**2 * np.log(1 / prior)


def _prior_rows(c: Constellation, cfg: DecoderConfig, T: int) -> np.ndarray:
    rows = np.tile(c.prior, (T, 1))
    if cfg.prior_mode == "per-position":
        rows[cfg.shaped_frames:] = 1 / len(c.prior)
    return rows


def _metric_table(y: np.ndarray, c: Constellation, rows: np.ndarray, sigma: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        penalty = -np.log(rows)
    return (c.points[None, :] - np.asarray(y)[:, None]) ** 2 + 2 * sigma**2 * penalty


def _cost_to_go(bm: np.ndarray, trellis: Trellis) -> np.ndarray:
    """B[t, v, s] = cheapest completion of frames t.. from v ending in s."""
    T = bm.shape[0]
    S = trellis.n_states
    B = np.empty((T + 1, S, S))
    B[T] = np.inf
    np.fill_diagonal(B[T], 0.0)
    for t in range(T - 1, -1, -1):
        # (S, U, S): branch cost of edge (v, u) plus completion from its head
        step = bm[t, trellis.label][:, :, None] + B[t + 1, trellis.next_state, :]
        B[t] = step.min(axis=1)
    return B


def iter_candidates(y: np.ndarray, trellis: Trellis, c: Constellation, cfg: DecoderConfig):
    """Yield tail-biting label paths one at a time, best metric first.

    Serial by construction: nothing beyond the next-best path is computed
    until the caller asks for it, so a decode that accepts rank 1 pays for
    rank 1 only.
    """
    T = len(y)
    bm = _metric_table(y, c, _prior_rows(c, cfg, T), cfg.sigma)
    B = _cost_to_go(bm, trellis)
    S, U = trellis.n_states, trellis.n_inputs
    Bf = B.ravel()
    bml = bm.tolist()
    nxt = trellis.next_state.tolist()
    lab = trellis.label.tolist()
    inf = np.inf

    heap = []
    for s in range(S):
        f = Bf.item(s * S + s)
        if f < inf:
            heap.append((f, s, (), 0, s, 0.0))
    heapq.heapify(heap)

    emitted, pops, floor = 0, 0, -inf
    while heap and emitted < cfg.list_size:
        f, s, labels, t, v, g = heapq.heappop(heap)
        pops += 1
        if pops > cfg.max_expansions:
            raise RuntimeError("expansion budget exhausted; raise max_expansions")
        if t == T:
            assert f >= floor - 1e-12, "list order violated"
            floor = f
            emitted += 1
            yield Candidate(np.array(labels, dtype=np.int64), s, f, emitted)
            continue
        base = ((t + 1) * S) * S + s
        row_l, row_n, bmt = lab[v], nxt[v], bml[t]
        for u in range(U):
            l = row_l[u]
            g2 = g + bmt[l]
            f2 = g2 + Bf.item(base + row_n[u] * S)
            if f2 < inf:
                heapq.heappush(heap, (f2, s, labels + (l,), t + 1, row_n[u], g2))


def list_candidates(
    y: np.ndarray, trellis: Trellis, c: Constellation, cfg: DecoderConfig
) -> list[Candidate]:
    """The H most likely tail-biting label paths, in serial list order."""
    return list(iter_candidates(y, trellis, c, cfg))


def decode_chain_invert(labels: np.ndarray, crc_spec: CrcSpec, mapper) -> np.ndarray:
    """Label path -> message bits: unpack frames, strip parity, unshape."""
    alpha = mapper.dist.bits_per_symbol
    code_bits = unpack_frames(np.asarray(labels) >> 1, alpha)
    amps = binary_invert(crc_strip(code_bits, crc_spec), alpha)
    return int_to_bits(mapper.decode(amps), mapper.k)


def slvd_decode(
    y: np.ndarray,
    trellis: Trellis,
    c: Constellation,
    crc_spec: CrcSpec,
    mapper,
    cfg: DecoderConfig,
) -> DecodeResult:
    """Walk the serial list until a candidate passes the outer code.

    The accepted candidate is inverted to message bits. A candidate whose
    amplitude sequence falls outside the matcher codebook ends the decode
    (the word is CRC-consistent yet untransmittable, so retrying deeper
    list ranks would only mask a miscalibrated codebook).
    """
    crc_failures = 0
    for cand in iter_candidates(y, trellis, c, cfg):
        code_bits = unpack_frames(cand.labels >> 1, mapper.dist.bits_per_symbol)
        if not crc_check(code_bits, crc_spec):
            crc_failures += 1
            continue
        try:
            msg = decode_chain_invert(cand.labels, crc_spec, mapper)
        except NotInCodebook:
            return DecodeResult("not_in_codebook", None, cand.rank, cand.metric, crc_failures)
        return DecodeResult("ok", msg, cand.rank, cand.metric, crc_failures)
    return DecodeResult("list_exhausted", None, None, None, crc_failures)
