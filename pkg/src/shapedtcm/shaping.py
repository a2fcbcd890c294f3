"""Fixed-length distribution matchers for amplitude shaping.

Two invertible matchers map k uniform bits onto length-n sequences over a
small amplitude alphabet:

* ShellMapper: the codebook is the 2^k most probable sequences under the
  target PMF, i.e. the first 2^k sequences when sorted by ascending
  -log2 P(a^n) with lexicographic tie-break. Sequence weights are quantized
  to integers so shells (equal-weight classes) can be counted exactly by
  dynamic programming with arbitrary-precision counts; encode/decode walk
  the DP table, never enumerating the codebook.

* CcdmMapper: constant-composition codebook. The composition is the
  largest-remainder rounding of n*P(a); the codebook is the first
  2^floor(log2 multinomial) sequences of that composition in lexicographic
  order, indexed by exact combinatorial ranking.

Both expose the normalized divergence (1/(n*2^k)) * sum_codebook log2(1/P(a^n))
- k/n in bits per amplitude, computed without enumeration.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np


class NotInCodebook(ValueError):
    """Amplitude sequence falls outside the matcher codebook."""


@dataclass(frozen=True)
class AmplitudeDistribution:
    """Target PMF over the amplitude alphabet {0, .., M-1}.

    The input is validated to sum to 1 within 1% and renormalized exactly;
    published PMFs are often rounded and a non-unit sum would bias every
    -log2 P by the same offset.
    """

    pmf: tuple

    def __init__(self, pmf):
        p = np.asarray(pmf, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise ValueError("pmf must be a 1-D array with at least 2 entries")
        if np.any(p <= 0):
            raise ValueError("pmf entries must be strictly positive")
        s = p.sum()
        if abs(s - 1.0) > 0.01:
            raise ValueError(f"pmf sums to {s:.4f}, expected ~1")
        object.__setattr__(self, "pmf", tuple(p / s))

    @property
    def alphabet_size(self) -> int:
        return len(self.pmf)

    @property
    def bits_per_symbol(self) -> int:
        """alpha such that 2^alpha = alphabet size (binary converter width)."""
        m = self.alphabet_size
        alpha = m.bit_length() - 1
        if 1 << alpha != m:
            raise ValueError(f"alphabet size {m} is not a power of two")
        return alpha

    def neg_log2(self) -> np.ndarray:
        return -np.log2(np.array(self.pmf))

    def entropy(self) -> float:
        p = np.array(self.pmf)
        return float(-(p * np.log2(p)).sum())


class ShellMapper:
    """Shell-mapping distribution matcher (k input bits, n amplitudes)."""

    def __init__(self, dist: AmplitudeDistribution, n: int, k: int,
                 weight_scale: int = 1 << 16):
        if n < 1 or k < 0 or weight_scale < 2:
            raise ValueError("need n >= 1, k >= 0, weight_scale >= 2")
        self.dist = dist
        self.n = n
        self.k = k
        self.weight_scale = weight_scale
        self._logp = dist.neg_log2()
        # integer weight per symbol; ascending -log2 P within quantization
        self.weights = np.array(
            [round(weight_scale * lp) for lp in self._logp], dtype=np.int64)

        if (1 << k) > dist.alphabet_size ** n:
            raise ValueError(
                f"2^{k} exceeds alphabet^n = {dist.alphabet_size}^{n}")

        self._build_tables()
        self._locate_boundary()

    def _build_tables(self):
        """DP over positions: shell counts and true -log2 P totals per weight.

        table t covers sequences of length t (positions are i.i.d. so the
        same table serves prefixes and suffixes). Counts are exact ints.
        """
        m = self.dist.alphabet_size
        w_sym = [int(w) for w in self.weights]
        lp_sym = [float(x) for x in self._logp]

        cur_c = {0: 1}
        cur_l = {0: 0.0}
        self._w = [np.zeros(1, dtype=np.int64)]
        self._c = [[1]]
        self._l = [np.zeros(1)]
        for _ in range(self.n):
            nxt_c: dict = {}
            nxt_l: dict = {}
            for w, cnt in cur_c.items():
                ls = cur_l[w]
                for a in range(m):
                    w2 = w + w_sym[a]
                    if w2 in nxt_c:
                        nxt_c[w2] += cnt
                        nxt_l[w2] += ls + cnt * lp_sym[a]
                    else:
                        nxt_c[w2] = cnt
                        nxt_l[w2] = ls + cnt * lp_sym[a]
            keys = np.fromiter(nxt_c.keys(), dtype=np.int64, count=len(nxt_c))
            order = np.argsort(keys)
            keys = keys[order]
            self._w.append(keys)
            self._c.append([nxt_c[int(w)] for w in keys])
            self._l.append(np.array([nxt_l[int(w)] for w in keys]))
            cur_c, cur_l = nxt_c, nxt_l

    def _count(self, t: int, w: int) -> int:
        ws = self._w[t]
        i = int(np.searchsorted(ws, w))
        if i < ws.size and ws[i] == w:
            return self._c[t][i]
        return 0

    def _count_logsum(self, t: int, w: int):
        ws = self._w[t]
        i = int(np.searchsorted(ws, w))
        if i < ws.size and ws[i] == w:
            return self._c[t][i], float(self._l[t][i])
        return 0, 0.0

    def _locate_boundary(self):
        target = 1 << self.k
        total = sum(self._c[self.n])
        if target > total:
            raise ValueError(f"2^{self.k} exceeds sequence count {total}")
        cum = []
        acc = 0
        for c in self._c[self.n]:
            cum.append(acc)
            acc += c
        self._cum = cum  # exclusive prefix sums, aligned with self._w[n]
        j = 0
        while cum[j] + self._c[self.n][j] < target:
            j += 1
        self._boundary_idx = j
        self.boundary_weight = int(self._w[self.n][j])
        self.partial_count = target - cum[j]  # in (0, shell size]

    @property
    def codebook_boundary(self):
        """(highest shell weight in use, sequences taken from that shell)."""
        return self.boundary_weight, self.partial_count

    def encode(self, index: int) -> np.ndarray:
        """Amplitude sequence whose codebook rank equals `index`."""
        if not 0 <= index < (1 << self.k):
            raise ValueError(f"index out of range [0, 2^{self.k})")
        j = bisect_right(self._cum, index) - 1
        w_rem = int(self._w[self.n][j])
        rank = index - self._cum[j]
        m = self.dist.alphabet_size
        w_sym = self.weights
        out = np.empty(self.n, dtype=np.int64)
        for t in range(self.n, 0, -1):
            for a in range(m):
                c = self._count(t - 1, w_rem - int(w_sym[a]))
                if c == 0:
                    continue
                if rank < c:
                    out[self.n - t] = a
                    w_rem -= int(w_sym[a])
                    break
                rank -= c
            else:
                raise AssertionError("shell walk exhausted symbols")
        return out

    def decode(self, amps: np.ndarray) -> int:
        """Codebook rank of an amplitude sequence; NotInCodebook if outside."""
        amps = np.asarray(amps, dtype=np.int64)
        if amps.shape != (self.n,) or amps.min() < 0 \
                or amps.max() >= self.dist.alphabet_size:
            raise ValueError("bad amplitude sequence")
        w_tot = int(self.weights[amps].sum())
        if w_tot > self.boundary_weight:
            raise NotInCodebook(f"sequence weight {w_tot} beyond boundary")
        ws = self._w[self.n]
        j = int(np.searchsorted(ws, w_tot))
        rank = self._cum[j]
        w_rem = w_tot
        for t in range(self.n, 0, -1):
            a = int(amps[self.n - t])
            for b in range(a):
                rank += self._count(t - 1, w_rem - int(self.weights[b]))
            w_rem -= int(self.weights[a])
        if rank >= (1 << self.k):
            raise NotInCodebook("sequence beyond the partial-shell cut")
        return rank

    def _codebook_log_total(self) -> float:
        """Sum of -log2 P(a^n) over the whole codebook (shell aggregation)."""
        total = 0.0
        for w, ls in zip(self._w[self.n], self._l[self.n]):
            if w >= self.boundary_weight:
                break
            total += float(ls)
        # partial shell: first `partial_count` sequences in lex order
        r = self.partial_count
        w_rem = self.boundary_weight
        prefix_lp = 0.0
        m = self.dist.alphabet_size
        for t in range(self.n, 0, -1):
            if r == 0:
                break
            for a in range(m):
                w2 = w_rem - int(self.weights[a])
                c, ls = self._count_logsum(t - 1, w2)
                if c == 0:
                    continue
                if r >= c:
                    total += ls + c * (prefix_lp + float(self._logp[a]))
                    r -= c
                else:
                    prefix_lp += float(self._logp[a])
                    w_rem = w2
                    break
        assert r == 0
        return total

    def normalized_kl(self) -> float:
        """Divergence from the target product PMF, bits per amplitude."""
        avg = self._codebook_log_total() / (1 << self.k)
        return avg / self.n - self.k / self.n


class CcdmMapper:
    """Constant-composition distribution matcher (exact enumerative coding)."""

    def __init__(self, dist: AmplitudeDistribution, n: int):
        if n < 1:
            raise ValueError("need n >= 1")
        self.dist = dist
        self.n = n
        self.composition = self._quantize_composition()
        self._mc = self._multinomial(self.composition)
        self.k = self._mc.bit_length() - 1  # floor(log2 multinomial)

    def _quantize_composition(self):
        """Largest-remainder rounding of n*P to integers summing to n."""
        raw = np.array(self.dist.pmf) * self.n
        base = np.floor(raw).astype(np.int64)
        short = self.n - int(base.sum())
        rem = raw - base
        # stable: highest remainder first, lower symbol index wins ties
        order = sorted(range(len(rem)), key=lambda a: (-rem[a], a))
        for a in order[:short]:
            base[a] += 1
        return tuple(int(x) for x in base)

    @staticmethod
    def _multinomial(counts) -> int:
        out = math.factorial(sum(counts))
        for c in counts:
            out //= math.factorial(c)
        return out

    def encode(self, index: int) -> np.ndarray:
        """index -> the index-th sequence of the composition in lex order."""
        if not 0 <= index < (1 << self.k):
            raise ValueError(f"index out of range [0, 2^{self.k})")
        counts = list(self.composition)
        mc = self._mc
        remaining = self.n
        out = np.empty(self.n, dtype=np.int64)
        for t in range(self.n):
            for a in range(len(counts)):
                if counts[a] == 0:
                    continue
                c = mc * counts[a] // remaining  # exact: mc scaled to prefix a
                if index < c:
                    out[t] = a
                    mc = c
                    counts[a] -= 1
                    remaining -= 1
                    break
                index -= c
            else:
                raise AssertionError("composition walk exhausted symbols")
        return out

    def decode(self, amps: np.ndarray) -> int:
        """Lexicographic rank within the composition; NotInCodebook if outside."""
        amps = np.asarray(amps, dtype=np.int64)
        if amps.shape != (self.n,):
            raise ValueError("bad amplitude sequence length")
        counts = list(self.composition)
        hist = np.bincount(amps, minlength=len(counts))
        if amps.min() < 0 or list(hist) != counts:
            raise NotInCodebook("composition mismatch")
        mc = self._mc
        remaining = self.n
        rank = 0
        for t in range(self.n):
            a = int(amps[t])
            for b in range(a):
                if counts[b]:
                    rank += mc * counts[b] // remaining
            mc = mc * counts[a] // remaining
            counts[a] -= 1
            remaining -= 1
        if rank >= (1 << self.k):
            raise NotInCodebook("sequence beyond the 2^k lexicographic cut")
        return rank

    def normalized_kl(self) -> float:
        """Closed form: every codeword has the same probability."""
        logp_word = float(np.dot(self.composition, self.dist.neg_log2()))
        return (logp_word - self.k) / self.n


def normalized_kl(mapper) -> float:
    """Normalized divergence of a matcher codebook, bits per amplitude."""
    return mapper.normalized_kl()


def binary_convert(amps: np.ndarray, alpha: int) -> np.ndarray:
    """Amplitude symbols -> flat bit sequence, alpha bits each, LSB first."""
    amps = np.asarray(amps, dtype=np.int64)
    if amps.size and (amps.min() < 0 or amps.max() >> alpha):
        raise ValueError(f"amplitude out of range for alpha={alpha}")
    shifts = np.arange(alpha)
    return ((amps[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)


def binary_invert(bits: np.ndarray, alpha: int) -> np.ndarray:
    """Inverse of binary_convert."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % alpha:
        raise ValueError(f"bit count {bits.size} not divisible by alpha={alpha}")
    groups = bits.reshape(-1, alpha).astype(np.int64)
    return (groups << np.arange(alpha)).sum(axis=1)


def bit_marginals(dist: AmplitudeDistribution, n: int) -> np.ndarray:
    """P(bit = 1) for each of the n*alpha converted bit positions."""
    alpha = dist.bits_per_symbol
    p = np.array(dist.pmf)
    a = np.arange(dist.alphabet_size)
    level = np.array([p[((a >> r) & 1) == 1].sum() for r in range(alpha)])
    return np.tile(level, n)
