"""Command-line front end.

Every output embeds the tool version and the resolved configuration, either
as the ``config`` key of a JSON document or as a ``# {...}`` first line of a
CSV file.  Exit codes: 0 ok, 2 validation, 3 numerical, 4 statistical power.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, _mapping, _number, _reject_unknown, load_config
from .errors import ConfigurationError, LaserNoiseError
from .figures import FIGURES, FigureJob, generate
from .model import (at_or_above_transparency, classify_device, classify_regime, derived_scales,
                    electrical_current, fluctuation_rates)
from .multimode import effective_modes, pmf_table
from .noise import noise_report, noise_threshold, squeezing_threshold
from .sweep import run_sweep, spec_from_config

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_POWER = 0, 2, 3, 4


# ------------------------------------------------------------ output helpers

def _plain(value):
    """JSON-safe copy: numpy scalars unwrapped, NaN/inf mapped to None, enums to values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if hasattr(value, "value") and not isinstance(value, (int, float, str)):
        return value.value
    return value


def _header(cfg: dict, meta: dict | None = None) -> dict:
    out = {"version": __version__, "config": cfg}
    if meta:
        out["meta"] = meta
    return _plain(out)


def _cell(v):
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return "" if v is None else str(v)


def csv_text(columns, rows, header: dict) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def json_text(result, header: dict) -> str:
    return json.dumps({**header, "result": _plain(result)}, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _table(pairs) -> str:
    width = max(len(k) for k, _ in pairs)
    lines = []
    for k, v in pairs:
        v = _plain(v)
        text = f"{v:.6g}" if isinstance(v, float) else str(v)
        lines.append(f"{k:<{width}}  {text}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------ commands

def steady_report(cfg: RunConfig) -> dict:
    params, op = cfg.point()
    n_t, j_th, n_th = derived_scales(params)
    rep = {"params": params.as_dict(), "n_t": n_t, "j_th": j_th, "n_th": n_th,
           "pump": params.pump, "n_bar": op.n_bar, "n_cap_bar": op.n_cap_bar,
           "quantum_efficiency": op.quantum_efficiency, "can_lase": params.can_lase}
    dev = classify_device(params)
    rep["device"] = {"laser_type": dev.laser_type.value, "inverse_beta": dev.inverse_beta,
                     "lower_boundary": dev.lower_boundary, "upper_boundary": dev.upper_boundary,
                     "on_boundary": dev.on_boundary, "note": dev.note}
    if params.volume is not None:
        rep["threshold_current_A"] = electrical_current(j_th)
        rep["pump_current_A"] = electrical_current(params.pump)
    if at_or_above_transparency(op):
        rates = fluctuation_rates(params, op)
        reg = classify_regime(rates, cfg.dominance_factor)
        rep["rates"] = {"gamma_cap_n": rates.gamma_cap_n, "gamma_n": rates.gamma_n,
                        "omega_r": rates.omega_r, "r": rates.r, "overdamped": rates.overdamped}
        rep["regime"] = {"regime": reg.regime.value, "dominance_ratio": reg.dominance_ratio,
                         "dominance_factor": reg.dominance_factor}
    else:
        rep["rates"] = None
        rep["regime"] = None
    if op.n_bar > 0:
        nr = noise_report(params, op, cfg.diffusion, cfg.dominance_factor, cfg.sigma)
        rep["noise"] = {"pnf_ratio": nr.pnf_ratio, "pnf_exact_ratio": nr.pnf_exact_variance / op.n_bar ** 2,
                        "lfn_ratio": nr.lfn_ratio, "lfn_exact_ratio": nr.lfn_exact_ratio,
                        "n_delta": nr.n_delta, "n_sq": nr.n_sq, "sigma": nr.sigma,
                        "diffusion": nr.diffusion.value}
    else:
        rep["noise"] = None
    return rep


def _flatten(d: dict, prefix: str = "") -> list[tuple[str, object]]:
    out = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out += _flatten(v, key + ".")
        else:
            out.append((key, v))
    return out


def cmd_steady(cfg: RunConfig, args) -> int:
    rep = steady_report(cfg)
    header = _header(cfg.resolved())
    pairs = _flatten(rep)
    sys.stderr.write(_table(pairs))
    if args.format == "csv":
        _emit(csv_text([k for k, _ in pairs], [[_plain(v) for _, v in pairs]], header), args.out)
    else:
        _emit(json_text(rep, header), args.out)
    return EXIT_OK


def cmd_thresholds(cfg: RunConfig, args) -> int:
    if cfg.params is None:
        raise ConfigurationError("device: required for this command")
    p = cfg.params
    n_t, j_th, n_th = derived_scales(p)
    nd = noise_threshold(p)
    sq = squeezing_threshold(p)
    dev = classify_device(p)
    rep = {"n_t": n_t, "j_th": j_th, "n_th": n_th, "n_delta": nd.n_delta,
           "n_delta_residual": nd.residual, "n_sq": sq.n_sq, "n_sq_root": sq.n_sq_root, "n_sq_small_beta": sq.approx_beta,
           "n_sq_from_pump": sq.approx_pump, "laser_type": dev.laser_type.value,
           "threshold_current_A": electrical_current(j_th) if p.volume is not None else None}
    header = _header(cfg.resolved())
    sys.stderr.write(_table(list(rep.items())))
    if args.format == "csv":
        _emit(csv_text(list(rep), [list(rep.values())], header), args.out)
    else:
        _emit(json_text(rep, header), args.out)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    if "sweep" not in cfg.raw:
        raise ConfigurationError("sweep: required for this command")
    spec = spec_from_config(cfg.raw["sweep"], cfg.diffusion, cfg.dominance_factor, cfg.params,
                            cfg.sigma)
    rows = run_sweep(spec, workers=args.workers)
    header = _header(cfg.resolved())
    if args.format == "json":
        _emit(json_text(rows, header), args.out)
    else:
        _emit(csv_text(spec.columns, [[r[c] for c in spec.columns] for r in rows], header), args.out)
    return EXIT_OK


def _figure_job(cfg: RunConfig, args) -> FigureJob:
    obj = dict(_mapping(cfg.raw.get("figure", {}), "figure"))
    _reject_unknown(obj, {"id", "resolution", "kappa_tau", "n_t", "betas", "sigmas", "mode_ratio"},
                    "figure")
    if args.id is not None:
        obj["id"] = args.id
    if "id" not in obj:
        raise ConfigurationError("figure.id: required (or pass --id)")
    kw = {}
    for key in ("resolution",):
        if key in obj:
            kw[key] = int(_number(obj[key], f"figure.{key}", positive=True))
    for key in ("kappa_tau", "n_t", "mode_ratio"):
        if key in obj:
            kw[key] = _number(obj[key], f"figure.{key}", positive=True)
    for key in ("betas", "sigmas"):
        if key in obj:
            kw[key] = tuple(_number(v, f"figure.{key}") for v in obj[key])
    return FigureJob(int(obj["id"]), diffusion=cfg.diffusion,
                     dominance_factor=cfg.dominance_factor, **kw)


def cmd_figure(cfg: RunConfig, args) -> int:
    job = _figure_job(cfg, args)
    tables = generate(job)
    resolved = cfg.resolved()
    resolved["figure"] = {k: v for k, v in job.resolved().items()
                          if k not in ("diffusion", "dominance_factor")}
    out_dir = Path(args.out or "figures")
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, t in tables.items():
        header = _header(resolved, t.meta)
        if args.format == "json":
            text = json_text([dict(zip(t.columns, r)) for r in t.rows], header)
            (out_dir / f"{name}.json").write_text(text)
        else:
            (out_dir / f"{name}.csv").write_text(csv_text(t.columns, t.rows, header))
        sys.stderr.write(f"wrote {out_dir / name}.{args.format} ({len(t.rows)} rows)\n")
    return EXIT_OK


def cmd_multimode(cfg: RunConfig, args) -> int:
    resolved = cfg.resolved()
    meta = None
    if args.modes is not None or args.photons is not None:
        if args.modes is None or args.photons is None:
            raise ConfigurationError("multimode: give both --modes and --photons")
        m, n = args.modes, args.photons
    elif "multimode" in cfg.raw:
        obj = _mapping(cfg.raw["multimode"], "multimode")
        _reject_unknown(obj, {"modes", "photons"}, "multimode")
        m, n = obj.get("modes"), obj.get("photons")
        if not isinstance(m, int) or not isinstance(n, int):
            raise ConfigurationError("multimode.modes/photons: integers required")
    else:
        params, op = cfg.point()
        em = effective_modes(params, op)
        m, n = em.modes, em.photons
        meta = {"modes_raw": em.modes_raw, "photons_raw": em.photons_raw,
                "overdamped": em.overdamped}
    resolved["multimode"] = {"modes": m, "photons": n}
    rows = pmf_table(m, n)
    header = _header(resolved, meta)
    if args.format == "json":
        _emit(json_text([{"n": k, "p_exact": p, "p_geometric": g} for k, p, g in rows], header),
              args.out)
    else:
        _emit(csv_text(("n", "p_exact", "p_geometric"), rows, header), args.out)
    return EXIT_OK


SIM_KEYS = {"method", "t_end", "sample_dt", "dt", "ensemble", "burn_in", "windows", "lags",
            "workers", "max_events", "occupancy_shape"}


def _simulate_one(args):
    from .kinetics.channels import build_jump_process
    from .kinetics.gillespie import gillespie_run
    from .kinetics.langevin import langevin_run
    params, sim, seed, index, diffusion, sigma = args
    if sim["method"] == "gillespie":
        proc = build_jump_process(params)
        shape = tuple(sim.get("occupancy_shape", (256, 256)))
        return gillespie_run(proc, sim["t_end"], seed, sim["sample_dt"], index=index,
                             occupancy_start=sim["burn_in"], occupancy_shape=shape,
                             max_events=int(sim.get("max_events", 10 ** 10)))
    return langevin_run(params, sim["dt"], sim["t_end"], seed, sample_dt=sim["sample_dt"],
                        sigma=sigma, diffusion=diffusion, index=index)


def _simulate_settings(cfg: RunConfig) -> dict:
    sim = dict(_mapping(cfg.raw.get("simulate", {}), "simulate"))
    _reject_unknown(sim, SIM_KEYS, "simulate")
    method = sim.get("method", "gillespie")
    if method not in ("gillespie", "langevin"):
        raise ConfigurationError(f"simulate.method: expected gillespie or langevin, got {method!r}")
    sim["method"] = method
    if "t_end" not in sim:
        raise ConfigurationError("simulate.t_end: required")
    sim["t_end"] = _number(sim["t_end"], "simulate.t_end", positive=True)
    sim["sample_dt"] = _number(sim.get("sample_dt", sim["t_end"] / 1e5), "simulate.sample_dt",
                               positive=True)
    if method == "langevin":
        if "dt" not in sim:
            raise ConfigurationError("simulate.dt: required for the langevin method")
        sim["dt"] = _number(sim["dt"], "simulate.dt", positive=True)
    sim["burn_in"] = _number(sim.get("burn_in", 0.0), "simulate.burn_in", minimum=0.0)
    ens = sim.get("ensemble", 1)
    if isinstance(ens, bool) or not isinstance(ens, int) or ens < 1:
        raise ConfigurationError("simulate.ensemble: positive integer required")
    sim["ensemble"] = ens
    sim["workers"] = int(sim.get("workers", 1))
    return sim


def cmd_simulate(cfg: RunConfig, args) -> int:
    from .kinetics.channels import PumpMode
    from .kinetics.estimators import estimate_moments, estimate_two_time, fano_curve
    if cfg.seed is None:
        raise ConfigurationError("seed: required for simulate (config seed or --seed)")
    sim = _simulate_settings(cfg)
    params, op = cfg.point()
    if sim["method"] == "gillespie":
        PumpMode.for_sigma(cfg.sigma)
    out_dir = Path(args.out or "simulation")
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(params, sim, cfg.seed, i, cfg.diffusion, cfg.sigma) for i in range(sim["ensemble"])]
    start = time.perf_counter()
    workers = max(args.workers, sim["workers"])
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trajs = list(pool.map(_simulate_one, tasks))
    else:
        trajs = [_simulate_one(t) for t in tasks]
    wall = time.perf_counter() - start
    files = []
    for t in trajs:
        path = out_dir / f"trajectory_{t.index:04d}.csv"
        t.dump(path)
        files.append(path.name)
    report = {"method": sim["method"], "wall_clock_s": wall, "files": files,
              "events": [t.events for t in trajs], "steps": [t.steps for t in trajs],
              "valid": [t.settings.get("valid", True) for t in trajs],
              "truncated": [t.truncated for t in trajs],
              "n_bar_linear": op.n_bar, "n_cap_bar_linear": op.n_cap_bar}
    moments = estimate_moments(trajs, sim["burn_in"])
    report["moments"] = {k: v.as_dict() for k, v in moments.items()}
    curve = fano_curve(trajs, sim.get("windows"), sim["burn_in"])
    report["fano"] = {"windows": curve.windows,
                      "raw": [e.as_dict() for e in curve.estimates],
                      "corrected": [e.as_dict() for e in curve.corrected],
                      "plateau": curve.plateau.as_dict(), "plateau_window": curve.plateau_window}
    lags = sim.get("lags")
    if lags is None:
        lags = list(np.arange(1, 21) * sim["sample_dt"])
    tt = estimate_two_time(trajs, lags, sim["burn_in"])
    report["two_time"] = {"lags": tt.lags, "values": tt.values, "stderr": tt.stderr,
                          "delta_weight": tt.delta_weight}
    text = json_text(report, _header({**cfg.resolved(), "simulate": sim}))
    (out_dir / "report.json").write_text(text)
    sys.stderr.write(f"wrote {len(files)} trajectories and report.json to {out_dir}\n")
    return EXIT_OK


COMMANDS = {"steady": cmd_steady, "sweep": cmd_sweep, "figure": cmd_figure,
            "simulate": cmd_simulate, "multimode": cmd_multimode, "thresholds": cmd_thresholds}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", help="output file (directory for figure/simulate)")
    common.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    common.add_argument("--diffusion", choices=["paper", "kinetic", "corrected"])
    common.add_argument("--dominance-factor", type=float, dest="dominance_factor")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--workers", type=int, default=1, help="worker processes")
    parser = argparse.ArgumentParser(prog="lasernoise", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("steady", parents=[common], help="operating point and classifications")
    sub.add_parser("thresholds", parents=[common], help="laser, noise and squeezing thresholds")
    sub.add_parser("sweep", parents=[common], help="grid sweep of the analytic model")
    fig = sub.add_parser("figure", parents=[common], help="figure data as CSV")
    fig.add_argument("--id", type=int, choices=FIGURES)
    sub.add_parser("simulate", parents=[common], help="stochastic trajectories and estimators")
    mm = sub.add_parser("multimode", parents=[common], help="micro-canonical mode statistics")
    mm.add_argument("--modes", type=int)
    mm.add_argument("--photons", type=int)
    return parser


_DEFAULT_FORMAT = {"steady": "json", "thresholds": "json", "sweep": "csv", "figure": "csv",
                   "simulate": "json", "multimode": "csv"}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.format = args.format or _DEFAULT_FORMAT[args.command]
    try:
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise ConfigurationError("--seed: expected an unsigned 64-bit integer")
        cfg = load_config(args.config, seed=args.seed, diffusion=args.diffusion,
                          dominance_factor=args.dominance_factor)
        return COMMANDS[args.command](cfg, args)
    except LaserNoiseError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    except (ArithmeticError, FloatingPointError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
