"""Euler-Maruyama integration of the rate equations with state-dependent white noise.

Per step the (q_N, q_n) increment has covariance dt * D(N, n) without the
cavity term; the cavity loss is a separate stream xi with variance 2 kappa n dt
that leaves the cavity (n -= xi) and enters the output (I dt = 2 kappa n dt + xi),
which gives <q_n q_I> = -2 kappa n exactly.
"""
from __future__ import annotations

import math

import numba
import numpy as np

from ..errors import ConfigurationError, DiffusionModelError
from ..model import DeviceParams, drift_matrix, stationary_state
from ..noise import DiffusionModel
from .rng import stream
from .trajectory import Trajectory

CHUNK_STEPS = 1 << 18
_MODEL_CODE = {DiffusionModel.PAPER_EQ2: 0, DiffusionModel.KINETIC: 1, DiffusionModel.CORRECTED: 2}


@numba.njit(cache=True)
def _noise_factors(model, sigma, pump, beta, tau, n_cap_t, big, small):
    """Cholesky factors (l11, l21, l22) of D minus the cavity term."""
    g = beta / tau
    absorb = 2.0 * g * n_cap_t * small
    spont = g * big
    if model == 0:
        exchange = absorb + spont
        d_big = sigma * pump + g * (small + 1.0) * big + exchange
    elif model == 2:
        exchange = absorb + spont
        d_big = sigma * pump + (1.0 - beta) * big / tau + exchange
    else:
        exchange = absorb + spont + 2.0 * g * big * small
        d_big = sigma * pump + (1.0 - beta) * big / tau + exchange
    if d_big <= 0.0:
        return 0.0, 0.0, math.sqrt(exchange) if exchange > 0.0 else 0.0, True
    l11 = math.sqrt(d_big)
    l21 = -exchange / l11
    rest = exchange - l21 * l21
    ok = rest >= -1e-12 * (exchange + 1.0)
    return l11, l21, math.sqrt(rest) if rest > 0.0 else 0.0, ok


@numba.njit(cache=True)
def _run_chunk(state, consts, model, dt, noise_scale, normals, n_steps, steps_per_sample,
               samples_big, samples_small, emitted, counters):
    # state: N, n, output accumulated in the current sample interval
    # counters: step index, next sample index, boundary hits, bad covariance flag
    pump, beta, tau, n_cap_t, kappa, sigma = consts[0], consts[1], consts[2], consts[3], consts[4], consts[5]
    g = beta / tau
    big, small, acc = state[0], state[1], state[2]
    step, sidx, hits = counters[0], counters[1], counters[2]
    sq = math.sqrt(dt) * noise_scale
    for i in range(n_steps):
        l11, l21, l22, ok = _noise_factors(model, sigma, pump, beta, tau, n_cap_t, big, small)
        if not ok:
            counters[3] = 1
            state[3], state[4] = big, small
            break
        z1 = normals[3 * i]
        z2 = normals[3 * i + 1]
        z3 = normals[3 * i + 2]
        q_big = sq * l11 * z1
        q_small = sq * (l21 * z1 + l22 * z2)
        xi = sq * math.sqrt(2.0 * kappa * small) * z3
        d_big = pump - big / tau - 2.0 * g * (big - n_cap_t) * small
        d_small = 2.0 * (g * (big - n_cap_t) - kappa) * small + g * big
        acc += 2.0 * kappa * small * dt + xi
        big = big + d_big * dt + q_big
        small = small + d_small * dt + q_small - xi
        if big < 0.0:
            big = -big
            hits += 1
        if small < 0.0:
            small = -small
            hits += 1
        step += 1
        if step % steps_per_sample == 0:
            emitted[sidx - 1] = acc
            acc = 0.0
            samples_big[sidx] = big
            samples_small[sidx] = small
            sidx += 1
    state[0], state[1], state[2] = big, small, acc
    counters[0], counters[1], counters[2] = step, sidx, hits


def max_stable_step(params: DeviceParams) -> float:
    """One tenth of the fastest linear time scale at the stationary point."""
    op = stationary_state(params)
    a = drift_matrix(params, op.n_bar)
    fastest = max(abs(a[0, 0]), abs(a[1, 1]), math.sqrt(abs(a[0, 1] * a[1, 0])))
    return 0.1 / fastest


def langevin_run(params: DeviceParams, dt: float, t_end: float, seed: int,
                 sample_dt: float | None = None, sigma: float | None = None,
                 diffusion: DiffusionModel = DiffusionModel.KINETIC, index: int = 0,
                 initial: tuple[float, float] | None = None, noise_scale: float = 1.0,
                 check_step: bool = True) -> Trajectory:
    """Integrate one path on [0, t_end]; samples every ``sample_dt`` (a multiple of dt).

    ``noise_scale`` multiplies all noise amplitudes (0 gives the deterministic
    rate equations).  Paths whose reflecting-floor hits exceed 1e-6 of the
    steps are marked ``settings['valid'] = False``.
    """
    s = params.sigma if sigma is None else sigma
    p = params.with_pump(params.pump, s)
    if dt <= 0 or t_end <= 0:
        raise ConfigurationError("dt and t_end must be positive")
    if check_step and dt > max_stable_step(p):
        raise ConfigurationError(
            f"dt={dt:g} exceeds one tenth of the fastest time scale ({max_stable_step(p):g})")
    sample_dt = dt if sample_dt is None else sample_dt
    per = int(round(sample_dt / dt))
    if per < 1 or not math.isclose(per * dt, sample_dt, rel_tol=1e-9):
        raise ConfigurationError("sample_dt must be an integer multiple of dt")
    n_samples = int(round(t_end / sample_dt))
    total_steps = n_samples * per
    if initial is None:
        op = stationary_state(p)
        initial = (op.n_cap_bar, op.n_bar)
    samples_big = np.empty(n_samples + 1)
    samples_small = np.empty(n_samples + 1)
    samples_big[0], samples_small[0] = initial
    emitted = np.zeros(n_samples)
    state = np.array([initial[0], initial[1], 0.0, 0.0, 0.0])
    counters = np.array([0, 1, 0, 0], dtype=np.int64)
    consts = np.array([p.pump, p.beta, p.tau, p.n_cap_t, p.kappa, s])
    gen = stream(seed, index)
    model = _MODEL_CODE[diffusion]
    done = 0
    while done < total_steps:
        k = min(CHUNK_STEPS, total_steps - done)
        normals = gen.standard_normal(3 * k)
        _run_chunk(state, consts, model, float(dt), float(noise_scale), normals, k, per,
                   samples_big, samples_small, emitted, counters)
        if counters[3]:
            raise DiffusionModelError(
                f"noise covariance not positive semidefinite at N={state[3]:g}, n={state[4]:g}")
        done += k
    hits = int(counters[2])
    return Trajectory(
        params=p, method="langevin", seed=int(seed), index=int(index), sample_dt=float(sample_dt),
        t_end=float(n_samples * sample_dt), n_cap=samples_big, n=samples_small, emissions=emitted,
        settings={"dt": dt, "diffusion": diffusion.value, "sigma": s, "noise_scale": noise_scale,
                  "initial": [float(x) for x in initial], "valid": hits <= 1e-6 * total_steps},
        initial=tuple(initial), final=(float(state[0]), float(state[1])),
        boundary_hits=hits, steps=total_steps,
    )
