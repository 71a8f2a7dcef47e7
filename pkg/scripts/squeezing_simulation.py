"""Counting statistics of a reduced-scale device under regular and Poisson pumping.

Sweeps the pump over multiples of threshold and prints the simulated Fano
plateau next to the linear-theory low-frequency noise for each pump mode.
"""
import argparse

from lasernoise.kinetics.channels import build_jump_process
from lasernoise.kinetics.estimators import fano_curve
from lasernoise.kinetics.gillespie import gillespie_run
from lasernoise.model import DeviceParams, derived_scales, stationary_state
from lasernoise.noise import DiffusionModel, lfn_exact

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", type=float, default=1e-2)
    ap.add_argument("--kappa-tau", type=float, default=50.0)
    ap.add_argument("--n-t", type=float, default=1.5)
    ap.add_argument("--ratios", type=float, nargs="+", default=[1.5, 2.0, 3.0, 5.0])
    ap.add_argument("--t-end", type=float, default=2e4)
    ap.add_argument("--ensemble", type=int, default=2)
    ap.add_argument("--seed", type=int, default=910)
    a = ap.parse_args()
    base = DeviceParams.from_scales(a.beta, a.kappa_tau, a.n_t)
    j_th = derived_scales(base)[1]
    print("j/j_th  sigma  n_bar      F_sim           lfn_kinetic  lfn_corrected")
    for ratio in a.ratios:
        for sigma in (0.0, 1.0):
            p = base.with_pump(ratio * j_th, sigma)
            proc = build_jump_process(p)
            runs = [gillespie_run(proc, a.t_end, a.seed, 0.5, index=i) for i in range(a.ensemble)]
            plateau = fano_curve(runs, burn_in=100.0).plateau
            op = stationary_state(p)
            print(f"{ratio:6.2f}  {sigma:4.1f}  {op.n_bar:8.2f}  {plateau.value:.3f}+-{plateau.stderr:.3f}"
                  f"   {lfn_exact(p, op, sigma, DiffusionModel.KINETIC):.3f}"
                  f"        {lfn_exact(p, op, sigma, DiffusionModel.CORRECTED):.3f}")
