"""Set-partition labeled 8-AM with shaped priors and an AWGN channel.

Labels are 3-bit integers l = (systematic bits << 1) | sign bit. The two
systematic bits select the magnitude through a Gray decode (so one level of
the binary partition doubles the subset spacing each time) and the LSB picks
one of +/-x. The sign is deliberately not a direct function of the LSB
alone: within the LSB=0 subset the points alternate sign along the magnitude
axis, which is what makes the subset an equidistant grid of spacing 4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .shaping import AmplitudeDistribution


def _gray_decode(s: int) -> int:
    d = 0
    while s:
        d ^= s
        s >>= 1
    return d


def _subset_min_distance(points: np.ndarray, labels: np.ndarray, fixed_bits: int) -> float:
    best = np.inf
    for residue in range(1 << fixed_bits):
        sub = points[(labels & ((1 << fixed_bits) - 1)) == residue]
        if len(sub) > 1:
            sub = np.sort(sub)
            best = min(best, np.diff(sub).min())
    return float(best)


@dataclass(frozen=True, eq=False)
class Constellation:
    """Equidistant AM points indexed by label, with per-label prior."""

    points: np.ndarray
    prior: np.ndarray
    partition_distances: tuple[float, ...]

    @property
    def n_labels(self) -> int:
        return len(self.points)

    @property
    def symbol_energy(self) -> float:
        return float(self.prior @ self.points**2)


def shaped_8am(dist: AmplitudeDistribution | None = None) -> Constellation:
    """8-AM on {-7..+7} step 2; prior shaped by `dist` or uniform.

    dist assigns probability to the four systematic-bit values; each splits
    evenly between the +x and -x label of its magnitude.
    """
    labels = np.arange(8)
    points = np.empty(8, dtype=np.float64)
    for l in labels:
        mag = 2 * _gray_decode(l >> 1) + 1
        plus = (mag % 4 == 1) ^ (l & 1)
        points[l] = mag if plus else -mag

    if dist is None:
        prior = np.full(8, 1 / 8)
    else:
        if dist.alphabet_size != 4:
            raise ValueError("8-AM needs a 4-symbol magnitude distribution")
        prior = np.array([dist.pmf[l >> 1] / 2 for l in labels])

    deltas = tuple(_subset_min_distance(points, labels, j) for j in range(3))
    assert deltas == (2.0, 4.0, 8.0), "labeling lost the partition property"
    assert sorted(points) == list(range(-7, 8, 2))
    for s in range(4):
        pair = points[[s << 1, (s << 1) | 1]]
        assert pair[0] == -pair[1], "systematic bits must fix the magnitude"
    return Constellation(points, prior, deltas)


def map_labels(labels: np.ndarray, c: Constellation) -> np.ndarray:
    return c.points[np.asarray(labels)]


def unmap_signals(x: np.ndarray, c: Constellation) -> np.ndarray:
    """Exact inverse of map_labels (not a slicer; inputs must be points)."""
    label_of = np.empty(c.n_labels, dtype=np.int64)
    idx = ((np.asarray(x) + 7) / 2).round().astype(np.int64)
    point_idx = ((c.points + 7) / 2).round().astype(np.int64)
    label_of[point_idx] = np.arange(c.n_labels)
    if not np.array_equal(c.points[label_of[idx]], x):
        raise ValueError("inputs are not constellation points")
    return label_of[idx]


def awgn(x: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return x + rng.normal(0.0, sigma, size=np.shape(x))


def snr_to_sigma(snr_db: float, c: Constellation) -> float:
    """Noise std for a target SNR = E[X^2] / sigma^2 in dB."""
    return float(np.sqrt(c.symbol_energy / 10 ** (snr_db / 10)))


def position_priors(dist: AmplitudeDistribution, n_shaped: int, n_uniform: int) -> np.ndarray:
    """Per-frame label priors: n_shaped shaped rows then n_uniform uniform.

    The tail frames carry parity bits of the outer code, which are close to
    fair coin flips, so they get the uniform prior.
    """
    shaped = shaped_8am(dist).prior
    rows = np.empty((n_shaped + n_uniform, 8))
    rows[:n_shaped] = shaped
    rows[n_shaped:] = 1 / 8
    return rows
