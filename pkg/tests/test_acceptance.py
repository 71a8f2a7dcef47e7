"""Acceptance criteria, one test each.

Every test appends a line ``ACCEPTANCE <n> PASS|FAIL <detail>`` to the shared
log (printed in the terminal summary) before asserting.  Run directly with
``python tests/test_acceptance.py``.
"""
import itertools
import math
import sys
import time

import numpy as np
import pytest
from scipy.integrate import quad

from lasernoise.figures import half_efficiency_device
from lasernoise.kinetics.channels import build_jump_process
from lasernoise.kinetics.estimators import (estimate_moments, fano_curve, stationary_histogram,
                                            total_variation)
from lasernoise.kinetics.gillespie import gillespie_run
from lasernoise.kinetics.master import stationary_distribution
from lasernoise.kinetics.trajectory import Trajectory
from lasernoise.model import DeviceParams, derived_scales, operating_point_at, preset_for_beta, \
    classify_device, LaserType, stationary_state
from lasernoise.multimode import geometric_approx_pmf, microcanonical_pmf
from lasernoise.multimode import total_variation as pmf_tv
from lasernoise.noise import (DiffusionModel, lfn_approx, lfn_exact, noise_threshold, pnf_approx,
                              pnf_exact, squeezing_threshold, to_db,
                              two_time_correlation_approx_integral,
                              two_time_correlation_exact, two_time_integral)

PAPER_KT = 1e4 / 3
N_T = 1.5


def record(log, number, ok, detail):
    line = f"ACCEPTANCE {number} {'PASS' if ok else 'FAIL'} {detail}"
    log.append(line)
    print(line)
    return ok


def paper_device(beta, kappa_tau=PAPER_KT):
    return DeviceParams.from_scales(beta, kappa_tau, N_T)


# ------------------------------------------------------------ analytic

def test_01_threshold_asymptotics(acceptance_log):
    worst_j = worst_n = 0.0
    for beta in (1e-6, 1e-4, 1e-2):
        p = paper_device(beta)
        _, j_th, n_th = derived_scales(p)
        worst_j = max(worst_j, abs(j_th / (4 * p.kappa / beta) - 1))
        worst_n = max(worst_n, abs(n_th * math.sqrt(beta) - 1))
    # at n_T = 3/2 the j_th deviation is exactly beta, so beta = 1e-2 sits on the
    # inclusive bound; allow float rounding only
    ok = worst_j <= 0.01 * (1 + 1e-12) and worst_n <= 0.05
    assert record(acceptance_log, 1, ok,
                  f"max |j_th/(4k/b)-1|={worst_j:.6g} (<=1e-2), max |n_th*sqrt(b)-1|={worst_n:.3g} (<=5e-2)")


def test_02_squeezing_threshold(acceptance_log):
    p = paper_device(1e-3)
    sq = squeezing_threshold(p)
    printed_err = abs(lfn_approx(p, sq.n_sq, 0.0) - 1)
    root_err = abs(lfn_approx(p, sq.n_sq_root, 0.0) - 1)
    far_printed = far_root = 0.0
    for beta in (1e-8, 1e-6, 1e-4, 1e-2):
        q = paper_device(beta)
        s = squeezing_threshold(q)
        target = (N_T + 0.5) / beta
        far_printed = max(far_printed, abs(s.n_sq / target - 1))
        far_root = max(far_root, abs(s.n_sq_root / target - 1))
    ok = printed_err <= 1e-6 and far_printed <= 0.02
    assert record(acceptance_log, 2, ok,
                  f"closed form: |lfn(n_sq,0)-1|={printed_err:.3g}, max |n_sq/((nT+1/2)/b)-1|="
                  f"{far_printed:.3f}; exact root: {root_err:.1e}, {far_root:.3f} (need 1e-6, 0.02)")


def test_03_figure_four(acceptance_log):
    beta = 1e-3
    p = paper_device(beta)
    _, _, n_th = derived_scales(p)
    sq = squeezing_threshold(p)
    grid = np.geomspace(N_T * 1.001, 1e3 * sq.n_sq, 20001)
    peaks = {s: grid[np.argmax([lfn_approx(p, n, s) for n in grid])] for s in (1, .25, .0625, 0)}
    peak_err = max(abs(v / n_th - 1) for v in peaks.values())
    asym = {s: abs(to_db(lfn_approx(p, 100 * sq.n_sq, s)) - to_db(s)) for s in (0.25, 0.0625)}
    beyond = lambda start: np.array([lfn_approx(p, n, 0.0) for n in np.geomspace(start, 1e3 * start, 4000)])
    tail = beyond(sq.n_sq)
    tail_root = beyond(sq.n_sq_root)
    mono = bool(np.all(tail < 1) and np.all(np.diff(tail) < 0))
    mono_root = bool(np.all(tail_root[1:] < 1) and np.all(np.diff(tail_root) < 0))
    ok = peak_err <= 0.2 and max(asym.values()) <= 0.5 and mono
    assert record(acceptance_log, 3, ok,
                  f"peak/n_th-1 max {peak_err:.3f} (<=0.2); asymptote dB off: "
                  f"s=0.25 {asym[0.25]:.2f}, s=0.0625 {asym[0.0625]:.2f} (<=0.5); "
                  f"squeezed+monotone beyond closed-form n_sq: {mono}, beyond exact root: {mono_root}")


def test_04_figure_five(acceptance_log):
    inv = np.geomspace(10, 1e8, 701)
    n_d = np.empty_like(inv)
    n_s = np.empty_like(inv)
    n_th = np.empty_like(inv)
    for i, x in enumerate(inv):
        p = paper_device(1 / x)
        n_th[i] = derived_scales(p)[2]
        n_d[i] = noise_threshold(p).n_delta
        n_s[i] = squeezing_threshold(p).n_sq
    ordered = bool(np.all(n_d >= n_th * (1 - 1e-12)))
    sign = np.sign(n_d - n_s)
    idx = np.flatnonzero(sign[:-1] != sign[1:])
    crossings = [1 / math.sqrt(inv[i] * inv[i + 1]) for i in idx]
    ok = ordered and len(crossings) > 0 and all(3e-4 <= b <= 3e-3 for b in crossings)
    assert record(acceptance_log, 4, ok,
                  f"n_delta >= n_th everywhere: {ordered}; crossing beta* = "
                  f"{', '.join(f'{b:.3g}' for b in crossings) or 'none'} (in [3e-4, 3e-3])")


def test_05_coexistence(acceptance_log):
    p = paper_device(1e-2)
    sq = squeezing_threshold(p)
    grid = np.geomspace(sq.n_sq, 100 * sq.n_sq, 4000)[1:]
    both = [n for n in grid if lfn_approx(p, n, 0.0) < 1 and pnf_approx(p, n) > 0.5]
    ok = bool(both)
    detail = (f"window n in [{both[0]:.4g}, {both[-1]:.4g}] (n_sq={sq.n_sq:.4g})" if ok
              else "no n above n_sq with lfn<1 and pnf>1/2")
    assert record(acceptance_log, 5, ok, detail)


def test_06_noise_threshold_types(acceptance_log):
    meso = preset_for_beta(1e-6)
    micro = preset_for_beta(1e-2)
    assert classify_device(meso).laser_type is LaserType.MESOSCOPIC
    assert classify_device(micro).laser_type is LaserType.MICROSCOPIC
    out = {}
    residual = 0.0
    for name, p, approx in [
        ("meso", meso, lambda p: 2 * p.kappa_tau * (derived_scales(p)[0] + 0.5)),
        ("micro", micro, lambda p: p.kappa_tau / 2 * derived_scales(p)[2]),
    ]:
        nd = noise_threshold(p)
        residual = max(residual, nd.residual)
        ratio = nd.n_delta / approx(p)
        out[name] = max(ratio, 1 / ratio)
    n_t = derived_scales(micro)[0]
    limit = math.sqrt(micro.kappa_tau * (n_t + 0.5) / micro.beta)
    limit_factor = noise_threshold(micro).n_delta / limit
    ok = residual < 1e-8 and out["meso"] <= 2 and out["micro"] <= 2
    assert record(acceptance_log, 6, ok,
                  f"residual {residual:.1e}; factor off: mesoscopic {out['meso']:.3f}, "
                  f"microscopic {out['micro']:.1f} (<=2); large-n limit sqrt(kt(nT+1/2)/b) "
                  f"gives {limit_factor:.3f}")


def test_07_exact_vs_approx(acceptance_log):
    results = {}
    for model in DiffusionModel:
        worst_p = worst_l = 0.0
        for beta in (1e-4, 1e-2):
            p = paper_device(beta)
            for n in np.geomspace(10 * N_T, 1e4, 60):
                q, op = operating_point_at(p, n)
                ex_p = pnf_exact(q, op, model, 1.0) / n ** 2
                worst_p = max(worst_p, abs(pnf_approx(q, n) / ex_p - 1))
                for s in (0.0, 1.0):
                    worst_l = max(worst_l, abs(lfn_approx(q, n, s) / lfn_exact(q, op, s, model) - 1))
        results[model] = (worst_p, worst_l)
    passing = [m.value for m, (a, b) in results.items() if a <= 0.15 and b <= 0.10]
    detail = "; ".join(f"{m.value}: pnf {a:.3f} lfn {b:.3f}" for m, (a, b) in results.items())
    assert record(acceptance_log, 7, bool(passing),
                  f"{detail} (need 0.15/0.10); matching: {', '.join(passing) or 'none'}")


# ------------------------------------------------------------ stochastic

TOY = DeviceParams(beta=0.5, tau=2.0, n_cap_t=2.0, kappa=1.0, pump=6.0, sigma=1.0)
TOY_BURN_IN = 50.0


@pytest.fixture(scope="module")
def toy_runs():
    proc = build_jump_process(TOY)
    runs, events, index = [], 0, 0
    start = time.perf_counter()
    while events < 1e7:
        t = gillespie_run(proc, 1e5, seed=20240601, sample_dt=0.1, index=index,
                          occupancy_start=TOY_BURN_IN, occupancy_shape=(61, 61))
        runs.append(t)
        events += t.events
        index += 1
    return runs, events, time.perf_counter() - start


def test_08_master_equation_oracle(acceptance_log, toy_runs):
    runs, events, wall = toy_runs
    exact = stationary_distribution(TOY, 60, 60)
    tv = total_variation(stationary_histogram(runs), exact.probabilities)
    sim = estimate_moments(runs, TOY_BURN_IN)
    ref = exact.moments()
    z = {k: (sim[k].value - ref[k]) / sim[k].stderr
         for k in ("n_cap_mean", "n_mean", "n_cap_var", "n_var")}
    ok = events >= 1e7 and tv < 0.02 and all(abs(v) <= 3 for v in z.values())
    zs = ", ".join(f"{k} {v:+.2f}" for k, v in z.items())
    assert record(acceptance_log, 8, ok,
                  f"{events:.3g} events in {wall:.1f}s, TV={tv:.4f} (<0.02), z-scores: {zs} (|z|<=3)")


def poisson_stream(rate, bins, dt, seed):
    rng = np.random.default_rng(seed)
    zeros = np.zeros(bins + 1, dtype=np.int64)
    return Trajectory(params=TOY, method="gillespie", seed=seed, index=0, sample_dt=dt,
                      t_end=bins * dt, n_cap=zeros, n=zeros, emissions=rng.poisson(rate * dt, bins))


def test_09_counting_statistics(acceptance_log, toy_runs):
    runs, _, _ = toy_runs
    curve = fano_curve(runs, burn_in=TOY_BURN_IN)
    target = lfn_exact(TOY, stationary_state(TOY), 1.0, DiffusionModel.KINETIC)
    rel = abs(curve.plateau.value / target - 1)
    poisson = fano_curve(poisson_stream(5.0, 1_000_000, 0.1, seed=77))
    z_p = (poisson.plateau.value - 1) / poisson.plateau.stderr
    ok = rel <= 0.10 and abs(z_p) <= 3
    assert record(acceptance_log, 9, ok,
                  f"plateau F={curve.plateau.value:.3f}+-{curve.plateau.stderr:.3f} at T="
                  f"{curve.plateau_window:g} vs lfn_exact(kinetic)={target:.3f}: {rel:.3f} (<=0.10); "
                  f"Poisson self-test F={poisson.plateau.value:.4f} z={z_p:+.2f}")


def test_10_pump_noise_squeezing(acceptance_log):
    base = DeviceParams.from_scales(1e-2, 50.0, N_T)
    j = 3 * derived_scales(base)[1]
    out = {}
    for sigma in (0.0, 1.0):
        p = base.with_pump(j, sigma)
        proc = build_jump_process(p)
        runs = [gillespie_run(proc, 2e4, seed=910, sample_dt=0.5, index=i) for i in range(2)]
        out[sigma] = fano_curve(runs, burn_in=100.0).plateau
    reg, poi = out[0.0], out[1.0]
    ok = reg.value + 3 * reg.stderr < 1 and poi.value >= 1 - 3 * poi.stderr
    assert record(acceptance_log, 10, ok,
                  f"regular F={reg.value:.3f}+-{reg.stderr:.3f} (upper 3SE {reg.value + 3 * reg.stderr:.3f} < 1); "
                  f"Poisson F={poi.value:.3f}+-{poi.stderr:.3f} (>= 1 - 3SE)")


# ------------------------------------------------------------ structure

def test_11_two_time_structure(acceptance_log):
    p, op = half_efficiency_device(5.0, 10.0, N_T)
    shot = 2 * p.kappa * op.n_bar
    worst = 0.0
    for model, sigma in itertools.product(DiffusionModel, (0.0, 0.5, 1.0)):
        closed = two_time_integral(p, op, sigma, model)
        want = (lfn_exact(p, op, sigma, model) - 1) * shot
        one_sided, _ = quad(lambda t: two_time_correlation_exact(p, op, t, sigma, model),
                            0, np.inf, epsabs=1e-12 * shot, epsrel=1e-11, limit=500)
        worst = max(worst, abs(closed - want) / shot, abs(2 * one_sided - want) / shot)
    smooth = np.array([two_time_correlation_exact(p, op, t, 0.0) for t in np.geomspace(1e-4, 1e3, 3000)])
    positive_first = smooth[0] > 0
    negative_later = bool(np.any(smooth < 0))
    cancel = abs(two_time_correlation_approx_integral(p, op)) / (4 * p.kappa ** 2 * op.n_bar ** 2)
    ok = worst <= 1e-10 and positive_first and negative_later and cancel <= 1e-12
    assert record(acceptance_log, 11, ok,
                  f"identity error {worst:.1e} of 2kn (<=1e-10); small-lag positive {positive_first}, "
                  f"negative region {negative_later}; printed-form integral {cancel:.1e} (cancels)")


def enumerate_mode(m, n):
    from collections import Counter
    from fractions import Fraction
    counts = Counter(c[0] for c in itertools.product(range(n + 1), repeat=m) if sum(c) == n)
    total = sum(counts.values())
    return [Fraction(counts[k], total) for k in range(n + 1)]


def test_12_multimode(acceptance_log):
    mismatches = [(m, n) for m in range(1, 9) for n in range(0, 9)
                  if list(microcanonical_pmf(m, n, exact=True).exact) != enumerate_mode(m, n)]
    uniform = [float(x) for x in microcanonical_pmf(2, 2).exact] == [1 / 3] * 3
    tv = pmf_tv(microcanonical_pmf(100, 100), geometric_approx_pmf(100, 100))
    ok = not mismatches and uniform and tv < 0.02
    assert record(acceptance_log, 12, ok,
                  f"enumeration mismatches for M,N<=8: {len(mismatches)}; M=N=2 uniform {uniform}; "
                  f"TV(M=N=100)={tv:.4f} (<0.02)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
