"""Micro-canonical multimode photon statistics.

N photons are spread over M modes with every composition equally likely.
The single-mode marginal counts the compositions of the remaining photons
over the other M - 1 modes.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .errors import ParameterError, SizeError
from .model import DeviceParams, OperatingPoint, fluctuation_rates

EXACT_LIMIT = 10_000         # M + N up to which rational arithmetic is used
SUPPORT_LIMIT = 10_000_000   # largest support held in memory
GEOMETRIC_TAIL = 1e-15


@dataclass(frozen=True)
class PhotonDistribution:
    support: np.ndarray
    probabilities: np.ndarray
    mode_count: int
    total_photons: int
    exact: tuple[Fraction, ...] | None = None
    kind: str = "microcanonical"

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.probabilities))

    @property
    def variance(self) -> float:
        m = self.mean
        return float(np.dot((self.support - m) ** 2, self.probabilities))

    def exact_mean(self) -> Fraction:
        if self.exact is None:
            raise ValueError("no exact probabilities held")
        return sum((k * p for k, p in enumerate(self.exact)), Fraction(0))


@dataclass(frozen=True)
class EffectiveModes:
    modes: int
    photons: int
    modes_raw: float
    photons_raw: float
    overdamped: bool


def _check_counts(m: int, n: int) -> None:
    if int(m) != m or int(n) != n:
        raise ParameterError("M and N must be integers")
    if m < 1 or n < 0:
        raise ParameterError(f"need M >= 1 and N >= 0, got M={m}, N={n}")


def microcanonical_pmf(m: int, n: int, exact: bool | None = None) -> PhotonDistribution:
    """Occupation pmf of one mode, p(k) = C(N-k+M-2, M-2) / C(N+M-1, M-1).

    ``exact=None`` picks rational arithmetic when M + N <= EXACT_LIMIT and
    log-gamma evaluation otherwise.
    """
    _check_counts(m, n)
    m, n = int(m), int(n)
    support = np.arange(n + 1)
    if exact is None:
        exact = m + n <= EXACT_LIMIT
    if exact and m + n > EXACT_LIMIT:
        raise SizeError(f"M + N = {m + n} exceeds {EXACT_LIMIT} for exact arithmetic; "
                        "use exact=False or geometric_approx_pmf")
    if n + 1 > SUPPORT_LIMIT:
        raise SizeError(f"N = {n} is too large to tabulate; use geometric_approx_pmf")
    if m == 1:
        probs = np.zeros(n + 1)
        probs[n] = 1.0
        fr = tuple(Fraction(int(k == n)) for k in range(n + 1)) if exact else None
        return PhotonDistribution(support, probs, 1, n, fr)
    if exact:
        total = math.comb(n + m - 1, m - 1)
        fr = tuple(Fraction(math.comb(n - k + m - 2, m - 2), total) for k in range(n + 1))
        return PhotonDistribution(support, np.array([float(f) for f in fr]), m, n, fr)
    rest = n - support
    logw = gammaln(rest + m - 1) - gammaln(rest + 1) - gammaln(m - 1)
    w = np.exp(logw - logw.max())
    return PhotonDistribution(support, w / w.sum(), m, n, None)


def geometric_approx_pmf(m: int, n: int, tail: float = GEOMETRIC_TAIL) -> PhotonDistribution:
    """Thermal single-mode pmf with mean N/M, truncated where the tail drops below ``tail``."""
    _check_counts(m, n)
    if m < 2 or n < 1:
        raise ParameterError("geometric approximation needs M >= 2 and N >= 1")
    ratio = n / (n + m)                      # (1 + M/N)^-1
    k_max = int(math.ceil(math.log(tail) / math.log(ratio)))
    if k_max + 1 > SUPPORT_LIMIT:
        raise SizeError(f"geometric support of {k_max + 1} points is too large")
    support = np.arange(k_max + 1)
    probs = (m / (n + m)) * ratio ** support
    return PhotonDistribution(support, probs / probs.sum(), int(m), int(n), None, "geometric")


def effective_modes(params: DeviceParams, op: OperatingPoint) -> EffectiveModes:
    """M = gamma_n / Gamma_N and N = 2 kappa n_bar / Gamma_N, rounded to integers >= 1."""
    rates = fluctuation_rates(params, op)
    if not rates.overdamped:
        warnings.warn("operating point is not over-damped; the mode picture is heuristic",
                      stacklevel=2)
    m_raw = rates.gamma_n / rates.gamma_cap_n
    n_raw = 2.0 * params.kappa * op.n_bar / rates.gamma_cap_n
    return EffectiveModes(max(1, round(m_raw)), max(1, round(n_raw)), m_raw, n_raw,
                          rates.overdamped)


def sample_composition(m: int, n: int, seed: int, size: int | None = None) -> np.ndarray:
    """Uniform composition(s) of N into M parts by stars and bars.

    Bar positions are a uniform (M-1)-subset of N+M-1 slots.  Returns shape
    (M,) or (size, M).
    """
    _check_counts(m, n)
    rng = np.random.default_rng(seed)
    count = 1 if size is None else int(size)
    slots = n + m - 1
    out = np.empty((count, m), dtype=np.int64)
    for i in range(count):
        bars = np.sort(rng.choice(slots, size=m - 1, replace=False))
        edges = np.concatenate(([-1], bars, [slots]))
        out[i] = np.diff(edges) - 1
    return out[0] if size is None else out


def pmf_table(m: int, n: int) -> list[tuple[int, float, float | None]]:
    exact = microcanonical_pmf(m, n)
    geo = geometric_approx_pmf(m, n) if m >= 2 and n >= 1 else None
    rows = []
    for k, p in zip(exact.support, exact.probabilities):
        g = None
        if geo is not None and k < geo.probabilities.size:
            g = float(geo.probabilities[k])
        rows.append((int(k), float(p), g))
    return rows


def pmf_csv(m: int, n: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "p_exact", "p_geometric"])
    for k, p, g in pmf_table(m, n):
        w.writerow([k, repr(p), "" if g is None else repr(g)])
    return buf.getvalue()


def total_variation(p: PhotonDistribution, q: PhotonDistribution) -> float:
    size = max(p.probabilities.size, q.probabilities.size)
    a = np.zeros(size)
    b = np.zeros(size)
    a[:p.probabilities.size] = p.probabilities
    b[:q.probabilities.size] = q.probabilities
    return 0.5 * float(np.abs(a - b).sum())
