"""Exact stochastic simulation of the six-channel jump process.

The event loop is compiled with numba and consumes pre-drawn uniforms from a
Philox stream, so a run is a deterministic function of (params, seed, index,
settings).  Regular pumping places pump events at exact multiples of 1/j and
races them against the exponential clock of the remaining channels.
"""
from __future__ import annotations

import math

import numba
import numpy as np

from ..model import stationary_state
from .channels import JumpProcess, PumpMode
from .rng import stream
from .trajectory import Trajectory

CHUNK = 1 << 21


@numba.njit(cache=True)
def _run_chunk(ints, floats, consts, regular, t_end, sample_dt, uniforms,
               samples_big, samples_small, emissions, occupancy, occ_start, counts, max_events):
    # ints: N, n, next sample index, events, truncated
    # floats: t, next pump time, overflow occupancy time
    big, small, sidx, events = ints[0], ints[1], ints[2], ints[3]
    t, next_pump = floats[0], floats[1]
    pump, loss_c, g, n_cap_t, kappa = consts[0], consts[1], consts[2], consts[3], consts[4]
    n_samples = samples_big.size
    n_bins = emissions.size
    occ_big, occ_small = occupancy.shape[0], occupancy.shape[1]
    used = 0
    n_u = uniforms.size
    done = False
    while used + 2 <= n_u:
        r0 = 0.0 if regular else pump
        r1 = loss_c * big
        r2 = g * big
        r3 = 2.0 * g * big * small
        r4 = 2.0 * g * n_cap_t * small
        r5 = 2.0 * kappa * small
        total = r0 + r1 + r2 + r3 + r4 + r5
        u1 = uniforms[used]
        u2 = uniforms[used + 1]
        used += 2
        if total > 0.0:
            t_new = t - math.log(1.0 - u1) / total
        else:
            t_new = math.inf
        pump_event = False
        if regular and next_pump <= t_new:
            t_new = next_pump
            pump_event = True
        if t_new > t_end:
            t_new = t_end
            done = True
        while sidx < n_samples and sidx * sample_dt < t_new:
            samples_big[sidx] = big
            samples_small[sidx] = small
            sidx += 1
        lo = t if t > occ_start else occ_start
        if t_new > lo:
            if big < occ_big and small < occ_small:
                occupancy[big, small] += t_new - lo
            else:
                floats[2] += t_new - lo
        t = t_new
        if done:
            if sidx < n_samples:
                samples_big[sidx] = big
                samples_small[sidx] = small
                sidx += 1
            break
        if pump_event:
            ch = 0
            next_pump += 1.0 / pump
        else:
            x = u2 * total
            if x < r0:
                ch = 0
            elif x < r0 + r1:
                ch = 1
            elif x < r0 + r1 + r2:
                ch = 2
            elif x < r0 + r1 + r2 + r3:
                ch = 3
            elif x < r0 + r1 + r2 + r3 + r4:
                ch = 4
            else:
                ch = 5
            if ch == 5 and r5 == 0.0:
                # x == total after rounding: fall back to the last live channel
                if r4 > 0.0:
                    ch = 4
                elif r3 > 0.0:
                    ch = 3
                elif r2 > 0.0:
                    ch = 2
                elif r1 > 0.0:
                    ch = 1
                else:
                    ch = 0
        if ch == 0:
            big += 1
        elif ch == 1:
            big -= 1
        elif ch == 2 or ch == 3:
            big -= 1
            small += 1
        elif ch == 4:
            big += 1
            small -= 1
        else:
            small -= 1
            b = int(t / sample_dt)
            if b < n_bins:
                emissions[b] += 1
        counts[ch] += 1
        events += 1
        if events >= max_events:
            ints[4] = 1
            done = True
            break
    ints[0], ints[1], ints[2], ints[3] = big, small, sidx, events
    floats[0], floats[1] = t, next_pump
    return used, done


def gillespie_run(process: JumpProcess, t_end: float, seed: int, sample_dt: float,
                  index: int = 0, initial: tuple[int, int] | None = None,
                  occupancy_start: float = 0.0, occupancy_shape: tuple[int, int] = (256, 256),
                  max_events: int = 10 ** 10) -> Trajectory:
    """Simulate one trajectory on [0, t_end].

    Starts at the rounded stationary point unless ``initial`` is given.  The
    time-weighted occupancy of each (N, n) after ``occupancy_start`` is
    accumulated exactly; states outside ``occupancy_shape`` go to an overflow.
    When ``max_events`` is hit the trajectory stops early with ``truncated``.
    """
    if t_end <= 0 or sample_dt <= 0:
        raise ValueError("t_end and sample_dt must be positive")
    p = process.params
    regular = process.pump_mode is PumpMode.REGULAR
    if initial is None:
        op = stationary_state(p)
        initial = (int(round(op.n_cap_bar)), int(round(op.n_bar)))
    n_bins = int(math.ceil(t_end / sample_dt - 1e-12))
    samples_big = np.zeros(n_bins + 1, dtype=np.int64)
    samples_small = np.zeros(n_bins + 1, dtype=np.int64)
    emissions = np.zeros(n_bins, dtype=np.int64)
    occupancy = np.zeros(occupancy_shape)
    counts = np.zeros(6, dtype=np.int64)
    ints = np.array([initial[0], initial[1], 0, 0, 0], dtype=np.int64)
    first_pump = 1.0 / p.pump if p.pump > 0 else math.inf
    floats = np.array([0.0, first_pump, 0.0])
    consts = np.array([p.pump, (1.0 - p.beta) / p.tau, p.beta / p.tau, p.n_cap_t, p.kappa])
    gen = stream(seed, index)
    done = False
    while not done:
        uniforms = gen.random(CHUNK)
        _, done = _run_chunk(ints, floats, consts, regular, float(t_end), float(sample_dt),
                             uniforms, samples_big, samples_small, emissions, occupancy,
                             float(occupancy_start), counts, int(max_events))
    truncated = bool(ints[4])
    n_kept = int(ints[2])
    if truncated:
        t_stop = floats[0]
        n_bins = int(t_stop / sample_dt)
        n_kept = min(n_kept, n_bins + 1)
        emissions = emissions[:n_bins]
    return Trajectory(
        params=p, method="gillespie", seed=int(seed), index=int(index),
        sample_dt=float(sample_dt), t_end=float(floats[0]) if truncated else float(t_end),
        n_cap=samples_big[:n_kept], n=samples_small[:n_kept], emissions=emissions,
        settings={"pump_mode": process.pump_mode.value, "max_events": int(max_events),
                  "initial": list(initial), "occupancy_start": occupancy_start},
        occupancy=occupancy, occupancy_start=float(occupancy_start),
        occupancy_overflow=float(floats[2]), channel_counts=counts,
        initial=tuple(initial), final=(int(ints[0]), int(ints[1])),
        events=int(ints[3]), truncated=truncated,
    )
