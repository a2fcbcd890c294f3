"""Constellation labeling, priors, SNR conversion, channel."""

import numpy as np
import pytest

from shapedtcm.modulation import (
    awgn,
    map_labels,
    position_priors,
    shaped_8am,
    snr_to_sigma,
    unmap_signals,
)
from shapedtcm.shaping import AmplitudeDistribution

PMF_OP = AmplitudeDistribution((0.5742, 0.3188, 0.01642, 0.09048))


def test_labeling_invariants_exhaustively():
    c = shaped_8am()
    pts = c.points
    assert sorted(pts) == list(range(-7, 8, 2))
    assert len(set(pts)) == 8
    # partition spacing doubles per fixed label bit
    assert c.partition_distances == (2.0, 4.0, 8.0)
    for j, want in [(1, 4.0), (2, 8.0)]:
        for residue in range(1 << j):
            sub = np.sort(pts[[l for l in range(8) if l % (1 << j) == residue]])
            assert np.diff(sub).min() == want
    # systematic bits fix the magnitude, LSB flips the sign
    for s in range(4):
        a, b = pts[s << 1], pts[(s << 1) | 1]
        assert a == -b and abs(a) == abs(b)
    # sign is NOT a function of the LSB alone
    lsb0 = pts[[0, 2, 4, 6]]
    assert (lsb0 > 0).any() and (lsb0 < 0).any()


def test_shaped_prior_and_energy():
    c = shaped_8am(PMF_OP)
    assert np.isclose(c.prior.sum(), 1)
    # each magnitude splits its mass evenly over the sign pair
    for s in range(4):
        assert np.isclose(c.prior[s << 1], c.prior[(s << 1) | 1])
        assert np.isclose(c.prior[s << 1] * 2, PMF_OP.pmf[s])
    # prior decreases with energy for this distribution
    order = np.argsort(np.abs(c.points[::2]))
    mags = c.prior[::2][order]
    assert (np.diff(mags) <= 0).all()
    want = sum(PMF_OP.pmf[s] * c.points[s << 1] ** 2 for s in range(4))
    assert np.isclose(c.symbol_energy, want)


def test_map_unmap_roundtrip():
    rng = np.random.default_rng(31)
    c = shaped_8am()
    labels = rng.integers(0, 8, size=500)
    x = map_labels(labels, c)
    assert np.array_equal(unmap_signals(x, c), labels)
    with pytest.raises(ValueError):
        unmap_signals(np.array([2.5]), c)


def test_snr_to_sigma():
    c = shaped_8am()
    assert np.isclose(c.symbol_energy, 21.0)
    assert np.isclose(snr_to_sigma(10 * np.log10(21.0), c), 1.0)
    sigmas = [snr_to_sigma(db, c) for db in range(0, 30, 2)]
    assert all(a > b for a, b in zip(sigmas, sigmas[1:]))
    cs = shaped_8am(PMF_OP)
    assert cs.symbol_energy < c.symbol_energy  # shaping saves energy


def test_awgn_statistics_and_determinism():
    c = shaped_8am()
    x = map_labels(np.tile(np.arange(8), 125_000), c)
    y = awgn(x, 0.7, np.random.default_rng(32))
    z = y - x
    assert abs(z.var() - 0.49) < 0.01 * 0.49
    assert abs(z.mean()) < 3 * 0.7 / np.sqrt(len(z))
    y2 = awgn(x, 0.7, np.random.default_rng(32))
    assert np.array_equal(y, y2)
    tiny = awgn(x[:100], 1e-12, np.random.default_rng(33))
    assert np.abs(tiny - x[:100]).max() < 1e-9
    with pytest.raises(ValueError):
        awgn(x[:2], 0.0, np.random.default_rng(34))


def test_position_priors_layout():
    rows = position_priors(PMF_OP, 64, 3)
    assert rows.shape == (67, 8)
    assert np.allclose(rows.sum(axis=1), 1)
    assert np.allclose(rows[64:], 1 / 8)
    assert np.allclose(rows[0], shaped_8am(PMF_OP).prior)
