"""Closed-form and linear-response noise of the single-mode laser.

Two families live here.  The ``*_approx`` functions evaluate the printed
small-beta formulas.  The ``*_exact`` functions solve the linearised Langevin
problem dx/dt = A x + q with white noise <q q^T> = D and output
I = 2 kappa n + q_I, where <q_n q_I> = -2 kappa n and <q_I q_I> = 2 kappa n.

Spectra are two-sided: S_II(0) = integral over all lags of <dI(t) dI(t+s)>,
normalised by the shot-noise level 2 kappa n.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import RootNotFoundError, StabilityError
from .model import (DeviceParams, LaserType, OperatingPoint, Regime,
                    at_or_above_transparency, classify_device, classify_regime, derived_scales,
                    drift_matrix, fluctuation_rates)


class DiffusionModel(enum.Enum):
    """Noise conventions for (q_N, q_n).

    PAPER_EQ2 takes the printed correlations verbatim.  KINETIC sums the jump
    rates of every channel.  CORRECTED is PAPER_EQ2 with the (beta/tau)(n+1)N
    entry of <q_N q_N> read as the non-lasing loss (1-beta)N/tau; it treats
    stimulated emission as noiseless and is the convention that reproduces the
    small-beta photon-number and low-frequency formulas.
    """

    PAPER_EQ2 = "paper"
    KINETIC = "kinetic"
    CORRECTED = "corrected"


@dataclass(frozen=True)
class NoiseThreshold:
    n_delta: float
    residual: float
    bracket: tuple[float, float]


@dataclass(frozen=True)
class SqueezingThreshold:
    n_sq: float            # printed closed form
    approx_beta: float
    approx_pump: float
    beta_small: bool
    n_sq_root: float       # exact root of lfn_approx(n, sigma=0) = 1


@dataclass(frozen=True)
class NoiseReport:
    n_bar: float
    pnf_ratio: float
    pnf_exact_variance: float
    lfn_ratio: float
    lfn_exact_ratio: float
    n_delta: float
    n_sq: float
    regime: Regime | None
    dominance_ratio: float | None
    device: LaserType
    diffusion: DiffusionModel
    sigma: float


def to_db(ratio):
    return 10.0 * np.log10(ratio)


# ---------------------------------------------------------------- diffusion

def diffusion_matrix(params: DeviceParams, n_cap: float, n: float,
                     diffusion: DiffusionModel, sigma: float | None = None) -> np.ndarray:
    """Symmetric 2x2 noise matrix for (q_N, q_n) at state (N, n).

    Includes the cavity-loss contribution 2 kappa n in the (n, n) entry.
    """
    s = params.sigma if sigma is None else sigma
    g = params.beta / params.tau
    absorb = 2.0 * g * params.n_cap_t * n
    spont = g * n_cap
    if diffusion is DiffusionModel.PAPER_EQ2:
        exchange = absorb + spont
        d_nn_cap = s * params.pump + g * (n + 1.0) * n_cap + exchange
    elif diffusion is DiffusionModel.CORRECTED:
        exchange = absorb + spont
        d_nn_cap = s * params.pump + (1.0 - params.beta) * n_cap / params.tau + exchange
    else:
        exchange = absorb + spont + 2.0 * g * n_cap * n
        d_nn_cap = s * params.pump + (1.0 - params.beta) * n_cap / params.tau + exchange
    d_nn = 2.0 * params.kappa * n + exchange
    return np.array([[d_nn_cap, -exchange], [-exchange, d_nn]])


def output_cross(op: OperatingPoint, params: DeviceParams) -> np.ndarray:
    """<q q_I> for q = (q_N, q_n)."""
    return np.array([0.0, -2.0 * params.kappa * op.n_bar])


def _check_stable(a: np.ndarray) -> None:
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if not (tr < 0 and det > 0):
        raise StabilityError(f"drift matrix not stable (trace={tr:g}, det={det:g})")


def _inverse(a: np.ndarray) -> np.ndarray:
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    return np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / det


def lyapunov_2x2(a: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Solve A S + S A^T + D = 0 in closed form for a stable 2x2 A."""
    _check_stable(a)
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    b = a - tr * np.eye(2)
    s = -(det * d + b @ d @ b.T) / (2.0 * tr * det)
    return 0.5 * (s + s.T)


def expm_2x2(a: np.ndarray, t) -> np.ndarray:
    """exp(A t) for an array of times; returns shape (len(t), 2, 2)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = 0.5 * (a[0, 0] + a[1, 1])
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    q = np.sqrt(complex(s * s - det))
    qt = q * t
    up, down = np.exp((s + q) * t), np.exp((s - q) * t)
    ch = 0.5 * (up + down)
    # e^{st} sinh(qt)/q, with a series where q t is tiny
    with np.errstate(invalid="ignore", divide="ignore"):
        sh = np.where(np.abs(qt) > 1e-6, (up - down) / (2.0 * (q if q != 0 else 1.0)),
                      t * np.exp(s * t) * (1 + qt ** 2 / 6))
    shifted = a - s * np.eye(2)
    out = ch[:, None, None] * np.eye(2) + sh[:, None, None] * shifted
    return out.real


def _linear_problem(params: DeviceParams, op: OperatingPoint, diffusion: DiffusionModel,
                    sigma: float | None):
    a = drift_matrix(params, op.n_bar)
    _check_stable(a)
    d = diffusion_matrix(params, op.n_cap_bar, op.n_bar, diffusion, sigma)
    return a, d


# ---------------------------------------------------------- photon number

def pnf_approx(params: DeviceParams, n_bar: float) -> float:
    """Small-beta estimate of <dn^2>/n_bar^2."""
    return 1.0 / (1.0 + _noise_threshold_lhs(params, n_bar))


def _noise_threshold_lhs(params: DeviceParams, n) -> float:
    n_t, _, _ = derived_scales(params)
    b, kt = params.beta, params.kappa_tau
    h = n_t + 0.5
    num = 2.0 * b * n ** 3 * (2.0 * b * n + 1.0)
    den = h * (4.0 * b * (kt + 1.0) * n ** 2 + n + 2.0 * kt * h)
    return num / den


def covariance(params: DeviceParams, op: OperatingPoint,
               diffusion: DiffusionModel = DiffusionModel.KINETIC,
               sigma: float | None = None) -> np.ndarray:
    """Stationary covariance of (dN, dn) in the linear approximation."""
    a, d = _linear_problem(params, op, diffusion, sigma)
    return lyapunov_2x2(a, d)


def pnf_exact(params: DeviceParams, op: OperatingPoint,
              diffusion: DiffusionModel = DiffusionModel.KINETIC,
              sigma: float | None = None) -> float:
    """Linear-response photon-number variance <dn^2>."""
    return float(covariance(params, op, diffusion, sigma)[1, 1])


def noise_threshold(params: DeviceParams, rtol: float = 1e-10) -> NoiseThreshold:
    """Photon number where the fluctuations fall to half the thermal level."""
    _, _, n_th = derived_scales(params)
    lo = 1.0
    hi = 1e4 * max(n_th, params.kappa_tau * n_th, 1.0)

    def f(n):
        return _noise_threshold_lhs(params, n) - 1.0

    if f(lo) > 0:
        lo = 0.0  # lhs(0) = 0
    if not f(hi) > 0:
        raise RootNotFoundError(
            f"no sign change on [{lo:g}, {hi:g}]: f(lo)={f(lo):g}, f(hi)={f(hi):g}")
    root = bisect(f, lo, hi, xtol=1e-300, rtol=rtol, maxiter=2000)
    return NoiseThreshold(root, abs(f(root)), (lo, hi))


# ---------------------------------------------------------- low frequency

def lfn_approx(params: DeviceParams, n_bar: float, sigma: float | None = None) -> float:
    """Small-beta estimate of S_II(0)/L_SN."""
    s = params.sigma if sigma is None else sigma
    n_t, _, _ = derived_scales(params)
    b, h = params.beta, n_t + 0.5
    den = (2.0 * b * n_bar ** 2 + h) ** 2
    base = h * (4.0 * b * n_bar ** 3 + 2.0 * n_bar ** 2 + h) / den
    pump = (4.0 * b ** 2 * n_bar ** 4 + 4.0 * b * h * n_bar ** 3) / den
    return base + s * pump


def lfn_exact(params: DeviceParams, op: OperatingPoint, sigma: float | None = None,
              diffusion: DiffusionModel = DiffusionModel.KINETIC) -> float:
    """Zero-frequency output noise normalised to shot noise, linear response."""
    return spectrum(params, op, 0.0, sigma, diffusion)


def spectrum(params: DeviceParams, op: OperatingPoint, omega, sigma: float | None = None,
             diffusion: DiffusionModel = DiffusionModel.KINETIC):
    """S_II(omega)/L_SN with response G = (i omega - A)^-1."""
    a, d = _linear_problem(params, op, diffusion, sigma)
    k, n_bar = params.kappa, op.n_bar
    c = output_cross(op, params)
    shot = 2.0 * k * n_bar
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(w < 0):
        raise ValueError("omega must be >= 0")
    out = np.empty_like(w)
    for i, wi in enumerate(w):
        g_row = np.linalg.inv(1j * wi * np.eye(2) - a)[1]
        photon = 4.0 * k * k * np.real(g_row @ d @ g_row.conj())
        cross = 2.0 * 2.0 * k * np.real(g_row @ c)
        out[i] = (photon + cross + shot) / shot
    return float(out[0]) if np.ndim(omega) == 0 else out


def squeezing_threshold(params: DeviceParams) -> SqueezingThreshold:
    n_t, j_th, _ = derived_scales(params)
    h = n_t + 0.5
    b = params.beta
    n_sq = (h + math.sqrt(h * h + h)) / (2.0 * b)
    # lfn_approx(n, 0) = 1 reduces to 2 b^2 n^2 - 2 h b n + (2 b h - h) = 0
    root = (h + math.sqrt(h * h + 2.0 * h - 4.0 * b * h)) / (2.0 * b)
    return SqueezingThreshold(n_sq, h / b, j_th / (2.0 * params.kappa), b <= 1e-2, root)


# ---------------------------------------------------------- two-time

def two_time_correlation_approx(params: DeviceParams, op: OperatingPoint, lag) -> dict:
    """Bunching/anti-bunching estimate for over-damped dynamics at ~50% efficiency.

    Returns the delta weight and the two smooth terms separately.
    """
    rates = fluctuation_rates(params, op)
    regime = classify_regime(rates)
    if not rates.overdamped or regime.regime is Regime.RELAXATION_OSCILLATIONS:
        warnings.warn("operating point is not over-damped; the two-exponential form is unreliable",
                      stacklevel=2)
    lag = np.asarray(lag, dtype=float)
    amp = 4.0 * params.kappa ** 2 * op.n_bar ** 2
    g_big, g_small = rates.gamma_n, rates.gamma_cap_n
    bunching = amp * np.exp(-g_big * lag)
    anti = -amp * g_small / g_big * np.exp(-g_small * lag)
    return {"delta": 2.0 * params.kappa * op.n_bar, "bunching": bunching,
            "antibunching": anti, "smooth": bunching + anti}


def two_time_correlation_approx_integral(params: DeviceParams, op: OperatingPoint) -> float:
    """Closed-form integral of the smooth approximate correlation over lag >= 0."""
    rates = fluctuation_rates(params, op)
    amp = 4.0 * params.kappa ** 2 * op.n_bar ** 2
    return amp / rates.gamma_n - amp * (rates.gamma_cap_n / rates.gamma_n) / rates.gamma_cap_n


def two_time_correlation_exact(params: DeviceParams, op: OperatingPoint, lag,
                               sigma: float | None = None,
                               diffusion: DiffusionModel = DiffusionModel.KINETIC):
    """Smooth part of <dI(t) dI(t+lag)> for lag > 0 (the delta weight is 2 kappa n_bar)."""
    a, d = _linear_problem(params, op, diffusion, sigma)
    sig = lyapunov_2x2(a, d)
    c = output_cross(op, params)
    k = params.kappa
    prop = expm_2x2(a, np.abs(np.asarray(lag, dtype=float)))
    smooth = 4.0 * k * k * (prop @ sig)[:, 1, 1] + 2.0 * k * (prop @ c)[:, 1]
    return float(smooth[0]) if np.ndim(lag) == 0 else smooth


def two_time_integral(params: DeviceParams, op: OperatingPoint, sigma: float | None = None,
                      diffusion: DiffusionModel = DiffusionModel.KINETIC) -> float:
    """Closed-form integral of the smooth correlation over all lags (both signs)."""
    a, d = _linear_problem(params, op, diffusion, sigma)
    sig = lyapunov_2x2(a, d)
    neg_inv = -_inverse(a)
    c = output_cross(op, params)
    k = params.kappa
    one_sided = 4.0 * k * k * (neg_inv @ sig)[1, 1] + 2.0 * k * (neg_inv @ c)[1]
    return 2.0 * one_sided


# ---------------------------------------------------------- report

def noise_report(params: DeviceParams, op: OperatingPoint,
                 diffusion: DiffusionModel = DiffusionModel.KINETIC,
                 dominance_factor: float = 1.0, sigma: float | None = None) -> NoiseReport:
    s = params.sigma if sigma is None else sigma
    if at_or_above_transparency(op):
        reg = classify_regime(fluctuation_rates(params, op), dominance_factor)
        regime, ratio = reg.regime, reg.dominance_ratio
    else:
        regime, ratio = None, None
    var = pnf_exact(params, op, diffusion, s)
    return NoiseReport(
        n_bar=op.n_bar,
        pnf_ratio=pnf_approx(params, op.n_bar),
        pnf_exact_variance=var,
        lfn_ratio=lfn_approx(params, op.n_bar, s),
        lfn_exact_ratio=lfn_exact(params, op, s, diffusion),
        n_delta=noise_threshold(params).n_delta,
        n_sq=squeezing_threshold(params).n_sq,
        regime=regime,
        dominance_ratio=ratio,
        device=classify_device(params).laser_type,
        diffusion=diffusion,
        sigma=s,
    )
