"""Parameter sweeps over the analytic model.

A sweep is the Cartesian product of its axes (first axis slowest) times the
sigma list.  Rows come back in that order whatever the worker count.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import ConfigurationError, _mapping, _number, _reject_unknown
from .errors import LaserNoiseError
from .model import (DeviceParams, at_or_above_transparency, classify_device, classify_regime, derived_scales,
                    fluctuation_rates, operating_point_at, stationary_state)
from .noise import (DiffusionModel, lfn_approx, lfn_exact, noise_threshold, pnf_approx,
                    pnf_exact, squeezing_threshold)

DEVICE_AXES = ("beta", "kappa_tau", "n_t", "kappa")
POINT_AXES = ("n_bar", "pump", "pump_over_threshold")
AXIS_NAMES = DEVICE_AXES + POINT_AXES
OUTPUT_GROUPS = {
    "pnf": ("pnf_approx", "pnf_exact"),
    "lfn": ("lfn_approx", "lfn_exact"),
    "thresholds": ("j_th", "n_th", "n_delta", "n_sq"),
    "regime": ("regime",),
    "device": ("device",),
}
BASE_COLUMNS = ("sigma", "n_bar", "n_cap_bar", "gamma_cap_n", "gamma_n", "omega_r", "r")
DEFAULTS = {"kappa": 1.0, "n_t": 1.5, "kappa_tau": 1e4 / 3}


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    points: int
    scale: str = "log"

    def grid(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.points)
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[Axis, ...]
    fixed: dict = field(default_factory=dict)
    outputs: tuple[str, ...] = tuple(OUTPUT_GROUPS)
    diffusion: DiffusionModel = DiffusionModel.KINETIC
    sigmas: tuple[float, ...] = (1.0,)
    dominance_factor: float = 1.0

    def __post_init__(self):
        if not self.axes:
            raise ConfigurationError("sweep.axes: at least one axis is required")
        names = [a.name for a in self.axes]
        for i, a in enumerate(self.axes):
            path = f"sweep.axes[{i}]"
            if a.name not in AXIS_NAMES:
                raise ConfigurationError(f"{path}.name: unknown axis {a.name!r}")
            if names.count(a.name) > 1:
                raise ConfigurationError(f"{path}.name: duplicate axis {a.name!r}")
            if a.name in self.fixed:
                raise ConfigurationError(f"{path}.name: {a.name!r} is also fixed")
            if a.scale not in ("log", "linear"):
                raise ConfigurationError(f"{path}.scale: expected 'log' or 'linear'")
            if int(a.points) != a.points or a.points < 1:
                raise ConfigurationError(f"{path}.points: must be a positive integer")
            if a.scale == "log" and not (a.lo > 0 and a.hi > 0):
                raise ConfigurationError(f"{path}: log axis bounds must be > 0")
            if a.name in ("beta", "kappa_tau", "kappa") and not a.lo > 0:
                raise ConfigurationError(f"{path}.lo: {a.name} must be > 0")
        for key in self.fixed:
            if key not in AXIS_NAMES:
                raise ConfigurationError(f"sweep.fixed.{key}: unknown parameter")
        point = [k for k in POINT_AXES if k in names or k in self.fixed]
        if len(point) != 1:
            raise ConfigurationError(
                f"sweep: exactly one of {', '.join(POINT_AXES)} must be an axis or fixed")
        if "beta" not in names and "beta" not in self.fixed:
            raise ConfigurationError("sweep: beta must be an axis or fixed")
        for o in self.outputs:
            if o not in OUTPUT_GROUPS:
                raise ConfigurationError(f"sweep.outputs: unknown output {o!r}")
        if not self.sigmas or any(not 0.0 <= s <= 1.0 for s in self.sigmas):
            raise ConfigurationError("sweep.sigmas: nonempty list of values in [0, 1]")

    @property
    def columns(self) -> tuple[str, ...]:
        axes = tuple(a.name for a in self.axes)
        cols = axes + tuple(c for c in BASE_COLUMNS if c not in axes)
        for group in OUTPUT_GROUPS:
            if group in self.outputs:
                cols += OUTPUT_GROUPS[group]
        return cols

    def points(self):
        grids = [a.grid() for a in self.axes]
        for combo in itertools.product(*grids):
            values = dict(self.fixed)
            values.update({a.name: float(v) for a, v in zip(self.axes, combo)})
            for s in self.sigmas:
                yield values, float(s)


def spec_from_config(obj: dict, diffusion: DiffusionModel, dominance_factor: float,
                     device: DeviceParams | None = None, sigma: float = 1.0) -> SweepSpec:
    """Build a spec; device parameters not swept or fixed are taken from ``device``,
    and ``sigma`` is the default for a missing sigma list."""
    obj = _mapping(obj, "sweep")
    _reject_unknown(obj, {"axes", "fixed", "outputs", "sigmas"}, "sweep")
    raw_axes = obj.get("axes")
    if not isinstance(raw_axes, list):
        raise ConfigurationError("sweep.axes: expected a list")
    axes = []
    for i, a in enumerate(raw_axes):
        path = f"sweep.axes[{i}]"
        a = _mapping(a, path)
        _reject_unknown(a, {"name", "lo", "hi", "points", "scale"}, path)
        for key in ("name", "lo", "hi", "points"):
            if key not in a:
                raise ConfigurationError(f"{path}.{key}: required")
        axes.append(Axis(str(a["name"]), _number(a["lo"], f"{path}.lo"),
                         _number(a["hi"], f"{path}.hi"), a["points"], a.get("scale", "log")))
    fixed = {k: _number(v, f"sweep.fixed.{k}") for k, v in _mapping(obj.get("fixed", {}), "sweep.fixed").items()}
    if device is not None:
        inherited = {"beta": device.beta, "kappa_tau": device.kappa_tau,
                     "n_t": derived_scales(device)[0], "kappa": device.kappa}
        swept = {a.name for a in axes}
        fixed = {**{k: v for k, v in inherited.items() if k not in swept}, **fixed}
    outputs = tuple(obj.get("outputs", tuple(OUTPUT_GROUPS)))
    sigmas = tuple(_number(s, "sweep.sigmas") for s in obj.get("sigmas", [sigma]))
    return SweepSpec(tuple(axes), fixed, outputs, diffusion, sigmas, dominance_factor)


def resolve_point(values: dict, sigma: float):
    v = {**DEFAULTS, **values}
    params = DeviceParams.from_scales(v["beta"], v["kappa_tau"], v["n_t"], kappa=v["kappa"],
                                      sigma=sigma)
    if "n_bar" in v:
        return operating_point_at(params, v["n_bar"])
    pump = v["pump"] if "pump" in v else v["pump_over_threshold"] * derived_scales(params)[1]
    p = params.with_pump(pump, sigma)
    return p, stationary_state(p)


def evaluate_point(values: dict, sigma: float, outputs, diffusion: DiffusionModel,
                   dominance_factor: float = 1.0) -> dict:
    """One sweep row.  Quantities undefined at the point are NaN (numbers) or '' (labels)."""
    params, op = resolve_point(values, sigma)
    row = {"sigma": sigma, "n_bar": op.n_bar, "n_cap_bar": op.n_cap_bar}
    rates = None
    if at_or_above_transparency(op):
        rates = fluctuation_rates(params, op)
    for name in ("gamma_cap_n", "gamma_n", "omega_r", "r"):
        row[name] = getattr(rates, name) if rates else math.nan

    def guarded(fn):
        try:
            return fn()
        except (LaserNoiseError, ZeroDivisionError):
            return math.nan

    if "pnf" in outputs:
        row["pnf_approx"] = pnf_approx(params, op.n_bar) if op.n_bar > 0 else math.nan
        row["pnf_exact"] = guarded(lambda: pnf_exact(params, op, diffusion, sigma) / op.n_bar ** 2)
    if "lfn" in outputs:
        row["lfn_approx"] = lfn_approx(params, op.n_bar, sigma) if op.n_bar > 0 else math.nan
        row["lfn_exact"] = guarded(lambda: lfn_exact(params, op, sigma, diffusion))
    if "thresholds" in outputs:
        _, row["j_th"], row["n_th"] = derived_scales(params)
        row["n_delta"] = guarded(lambda: noise_threshold(params).n_delta)
        row["n_sq"] = squeezing_threshold(params).n_sq
    if "regime" in outputs:
        row["regime"] = classify_regime(rates, dominance_factor).regime.value if rates else ""
    if "device" in outputs:
        row["device"] = classify_device(params).laser_type.value
    return row


def _task(args):
    values, sigma, outputs, diffusion, factor = args
    return evaluate_point(values, sigma, outputs, diffusion, factor)


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[dict]:
    """Evaluate every grid point; rows follow the axis order."""
    tasks = [(v, s, spec.outputs, spec.diffusion, spec.dominance_factor) for v, s in spec.points()]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        rows = [_task(t) for t in tasks]
    out = []
    for (values, _), row in zip(spec.points(), rows):
        full = {a.name: values[a.name] for a in spec.axes}
        full.update(row)
        out.append({c: full[c] for c in spec.columns})
    return out
