"""Random-coding union achievability bound for the shaped AM AWGN channel.

The bound is E[min{1, (M-1) Pr[i(Xbar;Y) >= i(X;Y) | X, Y]}] with X drawn
i.i.d. from the constellation prior and i the per-symbol information
density summed over n uses. The outer expectation is Monte Carlo; the
inner tail is computed exactly for each drawn (X, Y): every symbol
contributes an independent atom distribution over |X| information-density
values, and these are convolved on an integer lattice.

Quantization: atom values are floored to the lattice, and the threshold is
the lattice sum of the transmitted word's own floored atoms, so rounding
cancels systematically instead of biasing the comparison; ties count into
the tail, keeping the estimate on the conservative (upper) side.

The convolution never materializes the full lattice: partial sums that can
no longer reach the threshold even with the best possible remaining atoms
are collapsed into a dead bucket, and sums already certain to reach it are
collapsed into a sure bucket, so only the undecided window is stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modulation import Constellation

LN2 = float(np.log(2.0))


class GridOverflow(RuntimeError):
    """Density grid too narrow or too coarse for this configuration."""


class NotBracketed(ValueError):
    """A curve does not cross the target error rate."""


@dataclass(frozen=True, eq=False)
class RcuConfig:
    n: int
    k: int
    constellation: Constellation
    snr_grid: tuple[float, ...]
    outer_samples: int = 200_000
    min_samples: int = 2_000
    rel_stderr: float = 0.05
    batch: int = 500
    # per-symbol information-density lattice: (min value, max value, bins)
    density_grid: tuple[float, float, int] = (-700.0, 25.0, 1 << 22)
    # per-sample contributions below this are truncated to zero; keep well
    # under rel_stderr * expected value (the saturation side is exact)
    val_floor: float = 1e-9
    # optional (n, |X|) per-position prior rows; default: prior everywhere
    position_priors: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 1 or self.k < 0:
            raise ValueError("need n >= 1 and k >= 0")
        lo, hi, bins = self.density_grid
        if not (lo < hi and bins >= 8):
            raise ValueError("bad density_grid")
        if self.position_priors is not None:
            rows = np.asarray(self.position_priors, dtype=np.float64)
            if rows.shape != (self.n, self.constellation.n_labels):
                raise ValueError("position_priors must be (n, |X|)")
            if not np.allclose(rows.sum(axis=1), 1, atol=1e-9):
                raise ValueError("position_priors rows must sum to 1")
            object.__setattr__(self, "position_priors", rows)

    @property
    def prior_rows(self) -> np.ndarray:
        if self.position_priors is not None:
            return self.position_priors
        return np.tile(self.constellation.prior, (self.n, 1))


@dataclass(frozen=True)
class RcuPoint:
    snr_db: float
    value: float
    stderr: float
    samples: int


def info_density(x: np.ndarray, y: np.ndarray, c: Constellation, sigma: float) -> np.ndarray:
    """i(x; y) = log2 p(y|x)/p(y) in bits, elementwise over x, y."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    ll_x = -((y - x) ** 2) / (2 * sigma**2)
    mix = -((y[..., None] - c.points) ** 2) / (2 * sigma**2) + np.log(c.prior)
    peak = mix.max(axis=-1)
    log_py = peak + np.log(np.exp(mix - peak[..., None]).sum(axis=-1))
    return (ll_x - log_py) / LN2


def _atom_lattice(y: np.ndarray, rows: np.ndarray, c: Constellation, sigma: float,
                  grid: tuple[float, float, int]) -> np.ndarray:
    """Quantized info-density atoms, shape (n, |X|), integer lattice units."""
    lo, hi, bins = grid
    step = (hi - lo) / bins
    ll = -((y[:, None] - c.points[None, :]) ** 2) / (2 * sigma**2)
    with np.errstate(divide="ignore"):
        mix = ll + np.log(rows)
    peak = mix.max(axis=1)
    log_py = peak + np.log(np.exp(mix - peak[:, None]).sum(axis=1))
    vals = (ll - log_py[:, None]) / LN2
    if vals.min() < lo or vals.max() > hi:
        raise GridOverflow(
            f"atom value range [{vals.min():.1f}, {vals.max():.1f}] outside grid [{lo}, {hi}]"
        )
    return np.floor((vals - lo) / step).astype(np.int64)


def _inner_tail(atoms: np.ndarray, rows: np.ndarray, true_labels: np.ndarray,
                max_window: int, stop_hi: float = np.inf,
                stop_lo: float = 0.0) -> float:
    """Pr[sum of independent atoms >= sum of the true word's atoms], exact.

    Early exits: once the sure bucket passes stop_hi the caller's
    min{1, scale * tail} has already saturated, so any value >= stop_hi is
    equivalent; once sure plus all remaining window mass drops below
    stop_lo the tail can never matter and 0 is returned.
    """
    n = atoms.shape[0]
    tau = int(atoms[np.arange(n), true_labels].sum())
    amax = atoms.max(axis=1)
    amin = atoms.min(axis=1)
    suffix_max = np.concatenate([np.cumsum(amax[::-1])[::-1][1:], [0]]).tolist()
    suffix_min = np.concatenate([np.cumsum(amin[::-1])[::-1][1:], [0]]).tolist()
    atoms_l = atoms.tolist()
    amax_l = amax.tolist()
    amin_l = amin.tolist()
    rows_l = rows.tolist()

    w = np.ones(1)
    lo = 0
    dead = 0.0
    sure = 0.0
    for j in range(n):
        lw = len(w)
        dead_line = tau - suffix_max[j]
        sure_line = tau - suffix_min[j]
        new_lo = max(lo + amin_l[j], dead_line)
        new_hi = min(lo + lw - 1 + amax_l[j], sure_line)
        if new_hi - new_lo + 1 > max_window:
            raise GridOverflow("undecided window exceeds the grid bin budget")
        new_w = np.zeros(max(new_hi - new_lo + 1, 1))
        # prefix sums give the chopped-off mass in O(1) per atom; only
        # needed when this step actually trims against either line
        chopping = new_lo > lo + amin_l[j] or new_hi < lo + lw - 1 + amax_l[j]
        cw = np.concatenate(([0.0], np.cumsum(w))) if chopping else None
        arow = atoms_l[j]
        for a, p in enumerate(rows_l[j]):
            if p == 0.0:
                continue
            start = lo + arow[a]  # lattice position of w[0] + atom
            cut_lo = min(max(new_lo - start, 0), lw)
            cut_hi = min(max(start + lw - (new_hi + 1), 0), lw - cut_lo)
            if cut_lo:
                dead += p * cw.item(cut_lo)
            if cut_hi:
                sure += p * (cw.item(lw) - cw.item(lw - cut_hi))
            if cut_lo + cut_hi < lw:
                off = start + cut_lo - new_lo
                new_w[off:off + lw - cut_lo - cut_hi] += p * w[cut_lo:lw - cut_hi]
        w, lo = new_w, new_lo
        if sure >= stop_hi:
            return min(sure, 1.0)
        if sure + float(w.sum()) < stop_lo:
            return 0.0
    tail = sure + float(w[max(tau - lo, 0):].sum())
    return min(max(tail, 0.0), 1.0)


def rcu_bound(cfg: RcuConfig, snr_db: float, seed: int = 0) -> RcuPoint:
    """Monte Carlo outer loop with adaptive stopping on relative stderr.

    A fixed seed makes the per-sample draws (labels and unit noise) identical
    across SNR points, so curves computed point by point share randomness.
    """
    c = cfg.constellation
    rows = cfg.prior_rows
    es = float(np.mean(rows @ c.points**2))
    sigma = float(np.sqrt(es / 10 ** (snr_db / 10)))
    scale = float((1 << cfg.k) - 1)
    if scale == 0:
        return RcuPoint(snr_db, 0.0, 0.0, 0)
    rng = np.random.default_rng(seed)
    cum_rows = rows.cumsum(axis=1)

    total = 0.0
    total_sq = 0.0
    count = 0
    while count < cfg.outer_samples:
        m = min(cfg.batch, cfg.outer_samples - count)
        unif = rng.random((m, cfg.n))
        labels = (unif[:, :, None] > cum_rows[None, :, :]).sum(axis=2)
        noise = rng.standard_normal((m, cfg.n))
        x = c.points[labels]
        ys = x + sigma * noise
        for i in range(m):
            atoms = _atom_lattice(ys[i], rows, c, sigma, cfg.density_grid)
            tail = _inner_tail(atoms, rows, labels[i], cfg.density_grid[2],
                               stop_hi=1.0 / scale, stop_lo=cfg.val_floor / scale)
            val = min(1.0, scale * tail)
            total += val
            total_sq += val * val
            count += 1
        if count >= cfg.min_samples:
            mean = total / count
            var = max(total_sq / count - mean * mean, 0.0)
            se = np.sqrt(var / count)
            if mean > 0 and se < cfg.rel_stderr * mean:
                break
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    return RcuPoint(snr_db, mean, float(np.sqrt(var / count)), count)


def rcu_curve(cfg: RcuConfig, seed: int = 0) -> list[RcuPoint]:
    points = [rcu_bound(cfg, s, seed) for s in cfg.snr_grid]
    ordered = sorted(points, key=lambda p: p.snr_db)
    for a, b in zip(ordered, ordered[1:]):
        slack = 3 * np.hypot(a.stderr, b.stderr)  # Monte Carlo wiggle room
        assert b.value <= a.value + slack, "bound should not increase with SNR"
    return points


def _crossing_snr(points: list[tuple[float, float]], target: float) -> float:
    """SNR where a decreasing (snr, prob) curve crosses target, log-linear."""
    pts = sorted((float(s), float(v)) for s, v in points)
    for (s0, v0), (s1, v1) in zip(pts, pts[1:]):
        if v0 >= target >= v1 and v0 > 0 and v1 > 0:
            if v0 == v1:
                return s0
            t = (np.log(v0) - np.log(target)) / (np.log(v0) - np.log(v1))
            return s0 + t * (s1 - s0)
    raise NotBracketed(f"curve does not cross {target}")


def rcu_gap(fer_points, rcu_points, target_fer: float) -> float:
    """SNR(measured FER = target) minus SNR(RCU = target), in dB."""
    return _crossing_snr(fer_points, target_fer) - _crossing_snr(rcu_points, target_fer)
