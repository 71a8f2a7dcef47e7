"""Truncated chemical master equation for (N, n): stationary law and counting noise.

The state space is the box 0 <= N <= n_cap_max, 0 <= n <= n_max; jumps that
would leave the box are dropped.  Only Poisson pumping is Markovian here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..model import DeviceParams
from .channels import DELTAS, EMITTING_CHANNEL, channel_rates


@dataclass(frozen=True)
class MasterSolution:
    probabilities: np.ndarray  # shape (n_cap_max+1, n_max+1)
    tail_mass: float

    def marginal_n(self) -> np.ndarray:
        return self.probabilities.sum(axis=0)

    def marginal_n_cap(self) -> np.ndarray:
        return self.probabilities.sum(axis=1)

    def moments(self) -> dict[str, float]:
        p = self.probabilities
        big = np.arange(p.shape[0])[:, None]
        small = np.arange(p.shape[1])[None, :]
        m_big, m_small = (p * big).sum(), (p * small).sum()
        return {
            "n_cap_mean": m_big,
            "n_mean": m_small,
            "n_cap_var": (p * (big - m_big) ** 2).sum(),
            "n_var": (p * (small - m_small) ** 2).sum(),
            "cov": (p * (big - m_big) * (small - m_small)).sum(),
        }


def _generator(params: DeviceParams, n_cap_max: int, n_max: int):
    shape = (n_cap_max + 1, n_max + 1)
    big, small = np.meshgrid(np.arange(shape[0]), np.arange(shape[1]), indexing="ij")
    big, small = big.ravel(), small.ravel()
    rates = channel_rates(params, big, small)
    size = big.size
    rows, cols, vals = [], [], []
    emit = None
    for k, (d_big, d_small) in enumerate(DELTAS):
        tb, ts = big + d_big, small + d_small
        ok = (tb >= 0) & (tb <= n_cap_max) & (ts >= 0) & (ts <= n_max) & (rates[k] > 0)
        src = np.flatnonzero(ok)
        dst = tb[ok] * shape[1] + ts[ok]
        rows.append(dst), cols.append(src), vals.append(rates[k][ok])
        if k == EMITTING_CHANNEL:
            emit = sp.csr_matrix((rates[k][ok], (dst, src)), shape=(size, size))
    gain = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(size, size))
    out = np.asarray(gain.sum(axis=0)).ravel()
    q = (gain - sp.diags(out)).tocsc()
    return q, emit, shape


def _solve_with_normalisation(q, rhs, weights):
    """Solve Q x = rhs subject to weights . x = target, replacing one row."""
    size = q.shape[0]
    a = q.tolil()
    a[size - 1, :] = weights
    return spla.spsolve(a.tocsc(), rhs)


def stationary_distribution(params: DeviceParams, n_cap_max: int = 60, n_max: int = 60) -> MasterSolution:
    q, _, shape = _generator(params, n_cap_max, n_max)
    rhs = np.zeros(q.shape[0])
    rhs[-1] = 1.0
    p = _solve_with_normalisation(q, rhs, np.ones(q.shape[0]))
    p = np.clip(p, 0.0, None).reshape(shape)
    p /= p.sum()
    tail = p[-1, :].sum() + p[:, -1].sum()
    return MasterSolution(p, float(tail))


def counting_fano(params: DeviceParams, n_cap_max: int = 60, n_max: int = 60) -> float:
    """Long-time Fano factor of the emitted photon count.

    F = 1 + 2 (1^T W z) / J with J = 1^T W p and z = integral_0^inf exp(Q t)(W p - J p) dt,
    where W holds the emitting transitions.
    """
    q, emit, shape = _generator(params, n_cap_max, n_max)
    sol = stationary_distribution(params, n_cap_max, n_max)
    p = sol.probabilities.ravel()
    wp = emit @ p
    flux = wp.sum()
    y = wp - flux * p
    # Q z = -y with 1^T z = 0
    rhs = -y.copy()
    rhs[-1] = 0.0
    z = _solve_with_normalisation(q, rhs, np.ones(q.shape[0]))
    return float(1.0 + 2.0 * (emit @ z).sum() / flux)
