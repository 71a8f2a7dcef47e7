"""Compare Gillespie runs on the toy device against the truncated master equation.

Prints total variation, moment z-scores and the counting Fano factor against
both the master-equation value and the linear theory.
"""
import argparse
import time

from lasernoise.kinetics.channels import build_jump_process
from lasernoise.kinetics.estimators import (estimate_moments, fano_curve, stationary_histogram,
                                            total_variation)
from lasernoise.kinetics.gillespie import gillespie_run
from lasernoise.kinetics.master import counting_fano, stationary_distribution
from lasernoise.model import DeviceParams, stationary_state
from lasernoise.noise import DiffusionModel, lfn_exact

TOY = DeviceParams(beta=0.5, tau=2.0, n_cap_t=2.0, kappa=1.0, pump=6.0, sigma=1.0)


def run(events: float, seed: int, burn_in: float = 50.0):
    proc = build_jump_process(TOY)
    runs, done, i = [], 0, 0
    start = time.perf_counter()
    while done < events:
        t = gillespie_run(proc, 1e5, seed, 0.1, index=i, occupancy_start=burn_in,
                          occupancy_shape=(61, 61))
        runs.append(t)
        done += t.events
        i += 1
    wall = time.perf_counter() - start
    exact = stationary_distribution(TOY, 60, 60)
    print(f"{done:.3g} events in {wall:.1f} s over {len(runs)} trajectories")
    print(f"total variation vs master equation: {total_variation(stationary_histogram(runs), exact.probabilities):.4f}")
    ref = exact.moments()
    for key, est in estimate_moments(runs, burn_in).items():
        print(f"  {key:10s} sim {est.value:9.4f} +- {est.stderr:.4f}   master {ref[key]:9.4f}   "
              f"z {(est.value - ref[key]) / est.stderr:+.2f}")
    curve = fano_curve(runs, burn_in=burn_in)
    print("F(T), raw and boundary-corrected counts:")
    for w, e, c in zip(curve.windows, curve.estimates, curve.corrected):
        print(f"  T={w:8.2f}  raw {e.value:.4f}+-{e.stderr:.4f}  corrected {c.value:.4f}+-{c.stderr:.4f}")
    print(f"plateau {curve.plateau.value:.4f} +- {curve.plateau.stderr:.4f} at T={curve.plateau_window:g}")
    print(f"master-equation counting Fano: {counting_fano(TOY):.4f}")
    op = stationary_state(TOY)
    for model in DiffusionModel:
        print(f"linear theory ({model.value}): {lfn_exact(TOY, op, 1.0, model):.4f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--events", type=float, default=1e7)
    ap.add_argument("--seed", type=int, default=20240601)
    a = ap.parse_args()
    run(a.events, a.seed)
