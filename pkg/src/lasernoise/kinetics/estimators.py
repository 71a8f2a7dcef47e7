"""Stationary estimators over simulated trajectories.

Errors come from batch means: each trajectory's post-burn-in record is cut into
contiguous batches, the statistic is evaluated per batch, and the spread of the
batch values gives the standard error.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import StatisticalPowerError
from .trajectory import Trajectory


@dataclass(frozen=True)
class EnsembleEstimate:
    value: float
    stderr: float
    segments: int
    effective_samples: float

    def within(self, target: float, n_se: float = 3.0) -> bool:
        return abs(self.value - target) <= n_se * self.stderr

    def as_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "segments": self.segments,
                "effective_samples": self.effective_samples}


def _batch_estimate(values: np.ndarray, samples_per_batch: float, spread_var: float | None) -> EnsembleEstimate:
    nb = values.size
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(nb)) if nb > 1 else math.inf
    if spread_var is not None and se > 0:
        ess = spread_var / se ** 2
    else:
        ess = nb * samples_per_batch
    return EnsembleEstimate(mean, se, nb, float(ess))


def _as_list(trajectories) -> list[Trajectory]:
    return [trajectories] if isinstance(trajectories, Trajectory) else list(trajectories)


def _post_burn_in(traj: Trajectory, burn_in: float, min_samples: int):
    start = int(math.ceil(burn_in / traj.sample_dt))
    big = np.asarray(traj.n_cap[start:], dtype=float)
    small = np.asarray(traj.n[start:], dtype=float)
    if small.size < min_samples:
        raise StatisticalPowerError(
            f"only {small.size} samples after burn-in {burn_in:g} (need {min_samples})")
    return big, small


def estimate_moments(trajectories, burn_in: float, batches: int = 32,
                     min_samples: int = 100) -> dict[str, EnsembleEstimate]:
    """Means, variances and covariance of N and n with batch-mean errors."""
    records = [_post_burn_in(t, burn_in, min_samples) for t in _as_list(trajectories)]
    big_all = np.concatenate([r[0] for r in records])
    small_all = np.concatenate([r[1] for r in records])
    m_big, m_small = big_all.mean(), small_all.mean()
    stats = {k: [] for k in ("n_cap_mean", "n_mean", "n_cap_var", "n_var", "cov")}
    per_batch = []
    for big, small in records:
        for idx in np.array_split(np.arange(small.size), batches):
            b, s = big[idx], small[idx]
            per_batch.append(idx.size)
            stats["n_cap_mean"].append(b.mean())
            stats["n_mean"].append(s.mean())
            stats["n_cap_var"].append(np.mean((b - m_big) ** 2))
            stats["n_var"].append(np.mean((s - m_small) ** 2))
            stats["cov"].append(np.mean((b - m_big) * (s - m_small)))
    size = float(np.mean(per_batch))
    spreads = {"n_cap_mean": big_all.var(), "n_mean": small_all.var()}
    return {k: _batch_estimate(np.asarray(v), size, spreads.get(k)) for k, v in stats.items()}


def stationary_histogram(trajectories) -> np.ndarray:
    """Time-weighted (N, n) occupancy of jump trajectories, normalised."""
    occ = sum(t.occupancy for t in _as_list(trajectories))
    return occ / occ.sum()


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    shape = tuple(max(a, b) for a, b in zip(p.shape, q.shape))
    pp = np.zeros(shape)
    qq = np.zeros(shape)
    pp[tuple(slice(0, s) for s in p.shape)] = p
    qq[tuple(slice(0, s) for s in q.shape)] = q
    return 0.5 * float(np.abs(pp - qq).sum())


# ------------------------------------------------------------ counting

def _counts(trajectories, burn_in: float, corrected: bool = False):
    """Per-bin emission counts after burn-in.

    With ``corrected`` each bin also gets the change of N + n across it, so a
    window sum equals pumped minus non-lasing-lost excitations.  The two
    streams differ by bounded terms and share the same long-window Fano
    factor, but the corrected one lacks the intracavity boundary noise.
    """
    out = []
    for t in _as_list(trajectories):
        start = int(math.ceil(burn_in / t.sample_dt))
        c = np.asarray(t.emissions, dtype=float)
        if corrected:
            stock = np.asarray(t.n_cap, dtype=float) + np.asarray(t.n, dtype=float)
            c = c + np.diff(stock[: c.size + 1])
        out.append((c[start:], t.sample_dt))
    dts = {dt for _, dt in out}
    if len(dts) != 1:
        raise ValueError("trajectories must share sample_dt")
    return [c for c, _ in out], dts.pop()


def _window_sums(counts: np.ndarray, width: int) -> np.ndarray:
    csum = np.concatenate(([0.0], np.cumsum(counts)))
    return csum[width:] - csum[:-width]


def _check_power(records, width: int, max_fraction: float, min_windows: int) -> int:
    longest = max(c.size for c in records)
    disjoint = sum(c.size // width for c in records)
    if width > max_fraction * longest:
        raise StatisticalPowerError(
            f"window of {width} bins exceeds {max_fraction:g} of the usable record")
    if disjoint < min_windows:
        raise StatisticalPowerError(f"only {disjoint} disjoint windows (< {min_windows})")
    return disjoint


def _fano_blocks(records, width: int, n_blocks: int):
    """Per-block Fano values (centred on the global mean) and block weights.

    Windows are assigned to blocks by start bin, so different widths share
    block boundaries.
    """
    sums = [_window_sums(c, width) for c in records]
    mu = np.concatenate(sums).mean()
    if mu <= 0:
        raise StatisticalPowerError("no emissions recorded")
    per_traj = max(1, int(math.ceil(n_blocks / len(sums))))
    vals, weights = [], []
    for c, s in zip(records, sums):
        edges = np.linspace(0, c.size, per_traj + 1).astype(int)
        dev = (s - mu) ** 2
        for a, b in zip(edges[:-1], edges[1:]):
            chunk = dev[a:min(b, dev.size)]
            if chunk.size:
                vals.append(chunk.mean() / mu)
                weights.append(chunk.size)
    return np.asarray(vals), np.asarray(weights, dtype=float)


def _summarise(vals: np.ndarray, weights: np.ndarray, disjoint: int) -> EnsembleEstimate:
    value = float(np.sum(vals * weights) / weights.sum())
    se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else math.inf
    return EnsembleEstimate(value, se, int(vals.size), float(disjoint))


def output_fano(trajectories, window: float, burn_in: float = 0.0, batches: int = 20,
                max_fraction: float = 0.1, min_windows: int = 30,
                corrected: bool = False) -> EnsembleEstimate:
    """Fano factor Var/Mean of emitted counts in windows of length ``window``.

    All overlapping windows enter the point estimate, centred on the global
    mean.  The error comes from contiguous blocks of at least three windows.
    """
    records, dt = _counts(trajectories, burn_in, corrected)
    width = max(1, int(round(window / dt)))
    disjoint = _check_power(records, width, max_fraction, min_windows)
    vals, weights = _fano_blocks(records, width, max(2, min(batches, disjoint // 3)))
    return _summarise(vals, weights, disjoint)


def fano_extrapolated(trajectories, short: float, long: float, burn_in: float = 0.0,
                      batches: int = 20, max_fraction: float = 0.1,
                      min_windows: int = 30, corrected: bool = True) -> EnsembleEstimate:
    """Large-window Fano factor from two windows, removing the 1/T approach.

    Beyond the correlation time F(T) = F_inf + b/T, so
    F_inf = (T2 F(T2) - T1 F(T1)) / (T2 - T1), evaluated block by block.
    """
    records, dt = _counts(trajectories, burn_in, corrected)
    w1 = max(1, int(round(short / dt)))
    w2 = max(1, int(round(long / dt)))
    if w2 <= w1:
        raise ValueError("long window must exceed the short one")
    disjoint = _check_power(records, w2, max_fraction, min_windows)
    n_blocks = max(2, min(batches, disjoint // 3))
    f1, weights = _fano_blocks(records, w1, n_blocks)
    f2, _ = _fano_blocks(records, w2, n_blocks)
    vals = (w2 * f2 - w1 * f1) / (w2 - w1)
    return _summarise(vals, weights, disjoint)


@dataclass(frozen=True)
class FanoCurve:
    windows: np.ndarray
    estimates: list[EnsembleEstimate]            # raw emission counts
    corrected: list[EnsembleEstimate]            # boundary-corrected counts
    plateau: EnsembleEstimate
    plateau_window: float


def fano_curve(trajectories, windows=None, burn_in: float = 0.0, batches: int = 20,
               max_fraction: float = 0.1, points: int = 16, corrected: bool = True) -> FanoCurve:
    """F(T) on a log grid and the T -> infinity plateau.

    The plateau is the first window whose estimate agrees with every larger
    window within two combined standard errors.  It is read from the
    boundary-corrected counts unless ``corrected`` is False.
    """
    records, dt = _counts(trajectories, burn_in)
    if windows is None:
        longest = max(c.size for c in records)
        disjoint_bins = sum(c.size for c in records) // 30
        top = max(1, min(int(max_fraction * longest), disjoint_bins))
        while sum(c.size // top for c in records) < 30 and top > 1:
            top -= 1
        windows = np.unique(np.round(np.geomspace(1, top, points))) * dt
    windows = np.asarray(windows, dtype=float)
    if windows.size < 3:
        raise StatisticalPowerError("need at least three windows for a plateau")
    est = [output_fano(trajectories, w, burn_in, batches, max_fraction) for w in windows]
    corr = [output_fano(trajectories, w, burn_in, batches, max_fraction, corrected=True)
            for w in windows]
    source = corr if corrected else est
    chosen = len(source) - 1
    for i, e in enumerate(source[:-1]):
        later = source[i + 1:]
        if all(abs(e.value - f.value) <= 2.0 * math.hypot(e.stderr, f.stderr) for f in later):
            chosen = i
            break
    return FanoCurve(windows, est, corr, source[chosen], windows[chosen])


@dataclass(frozen=True)
class TwoTimeEstimate:
    lags: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    delta_weight: float       # mean emission rate: weight of the same-time delta
    same_bin: float           # raw Var(count)/dt, contains delta and smooth parts


def estimate_two_time(trajectories, lags, burn_in: float = 0.0, batches: int = 20,
                      coherence_rate: float | None = None) -> TwoTimeEstimate:
    """Smooth part of <dI(t) dI(t+lag)> from binned emission counts.

    ``lags`` are rounded to whole bins (>= 1 bin).  Each lagged covariance of the
    count rate is normalised by the number of overlapping pairs; the delta term
    is reported separately.
    """
    records, dt = _counts(trajectories, burn_in)
    if coherence_rate is not None and dt > 0.1 / coherence_rate:
        warnings.warn(f"bin width {dt:g} is coarse against 1/{coherence_rate:g}", stacklevel=2)
    shifts = np.maximum(1, np.round(np.asarray(lags, dtype=float) / dt).astype(int))
    rate_all = np.concatenate(records) / dt
    mean = rate_all.mean()
    table = []
    for c in records:
        # every chunk must be longer than the largest shift
        per_traj = max(1, min(int(math.ceil(batches / len(records))), c.size // (2 * shifts.max())))
        x = c / dt - mean
        for chunk in np.array_split(x, per_traj):
            row = []
            for s in shifts:
                row.append(np.dot(chunk[:-s], chunk[s:]) / (chunk.size - s) if chunk.size > s else np.nan)
            table.append(row)
    table = np.asarray(table)
    vals = np.nanmean(table, axis=0)
    ses = np.nanstd(table, axis=0, ddof=1) / np.sqrt(np.sum(~np.isnan(table), axis=0))
    same = float(np.var(rate_all) * dt)
    return TwoTimeEstimate(shifts * dt, vals, ses, float(mean), same)
