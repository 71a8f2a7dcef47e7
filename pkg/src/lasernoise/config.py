"""JSON run configuration: parsing, validation and device/operating-point resolution.

Errors name the offending field by its dotted path so the CLI can report it.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigurationError, LaserNoiseError
from .model import (DeviceParams, OperatingPoint, derived_scales, material_preset,
                    operating_point_at, preset_for_beta, rate_from_current, stationary_state)
from .noise import DiffusionModel

SCHEMA_VERSION = 1

DEVICE_FORMS = {
    "scales": {"beta", "kappa_tau", "n_t", "kappa"},
    "raw": {"beta", "tau", "n_cap_t", "kappa"},
    "preset_beta": {"preset_beta", "kappa"},
    "volume": {"volume", "kappa"},
}
POINT_KEYS = ("pump", "pump_over_threshold", "n_bar", "current")
TOP_KEYS = {"schema_version", "device", "operating_point", "sigma", "diffusion",
            "dominance_factor", "seed", "sweep", "figure", "simulate", "multimode"}


def _number(value, path: str, positive: bool = False, minimum: float | None = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigurationError(f"{path}: expected a finite number, got {value!r}")
    if positive and value <= 0:
        raise ConfigurationError(f"{path}: must be > 0, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigurationError(f"{path}: must be >= {minimum}, got {value!r}")
    return float(value)


def _mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigurationError(f"{path}: expected an object")
    return value


def _reject_unknown(obj: dict, allowed, path: str) -> None:
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ConfigurationError(f"{path}.{extra[0]}: unknown field")


def device_from_config(dev: dict, path: str = "device") -> DeviceParams:
    dev = _mapping(dev, path)
    keys = set(dev)
    form = None
    for name, allowed in DEVICE_FORMS.items():
        required = allowed - {"kappa"}
        if required <= keys and keys <= allowed:
            form = name
            break
    if form is None:
        raise ConfigurationError(
            f"{path}: expected one of {{beta, kappa_tau, n_t}}, {{beta, tau, n_cap_t}}, "
            f"{{preset_beta}} or {{volume}} (plus optional kappa); got {sorted(keys)}")
    vals = {k: _number(v, f"{path}.{k}") for k, v in dev.items()}
    try:
        if form == "scales":
            return DeviceParams.from_scales(vals["beta"], vals["kappa_tau"], vals["n_t"],
                                            kappa=vals.get("kappa", 1.0))
        if form == "raw":
            return DeviceParams(beta=vals["beta"], tau=vals["tau"], n_cap_t=vals["n_cap_t"],
                                kappa=vals.get("kappa", 1.0))
        if form == "preset_beta":
            return preset_for_beta(vals["preset_beta"], **({"kappa": vals["kappa"]} if "kappa" in vals else {}))
        return material_preset(vals["volume"], **({"kappa": vals["kappa"]} if "kappa" in vals else {}))
    except LaserNoiseError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc


def point_from_config(params: DeviceParams, point: dict | None, sigma: float,
                      path: str = "operating_point") -> tuple[DeviceParams, OperatingPoint]:
    """Resolve exactly one of pump / pump_over_threshold / n_bar / current (amperes)."""
    if point is None:
        p = params.with_pump(params.pump, sigma)
        return p, stationary_state(p)
    point = _mapping(point, path)
    _reject_unknown(point, POINT_KEYS, path)
    given = [k for k in POINT_KEYS if k in point]
    if len(given) != 1:
        raise ConfigurationError(f"{path}: give exactly one of {', '.join(POINT_KEYS)}")
    key = given[0]
    value = _number(point[key], f"{path}.{key}", minimum=0.0)
    if key == "n_bar":
        return operating_point_at(params.with_pump(0.0, sigma), value)
    if key == "pump":
        pump = value
    elif key == "current":
        pump = rate_from_current(value)
    else:
        pump = value * derived_scales(params)[1]
    p = params.with_pump(pump, sigma)
    return p, stationary_state(p)


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    params: DeviceParams | None
    sigma: float
    diffusion: DiffusionModel
    dominance_factor: float
    seed: int | None

    def resolved(self) -> dict:
        """The configuration as a plain dict with CLI overrides applied."""
        out = copy.deepcopy(self.raw)
        out["schema_version"] = SCHEMA_VERSION
        out["sigma"] = self.sigma
        out["diffusion"] = self.diffusion.value
        out["dominance_factor"] = self.dominance_factor
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    def point(self) -> tuple[DeviceParams, OperatingPoint]:
        if self.params is None:
            raise ConfigurationError("device: required for this command")
        return point_from_config(self.params, self.raw.get("operating_point"), self.sigma)


def parse_config(raw: dict, seed: int | None = None, diffusion: str | None = None,
                 dominance_factor: float | None = None) -> RunConfig:
    raw = _mapping(raw, "config")
    _reject_unknown(raw, TOP_KEYS, "config")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigurationError(f"config.schema_version: unsupported version {version!r}")
    params = device_from_config(raw["device"]) if "device" in raw else None
    sigma = _number(raw.get("sigma", 1.0), "config.sigma", minimum=0.0)
    if sigma > 1.0:
        raise ConfigurationError(f"config.sigma: must be <= 1, got {sigma!r}")
    name = diffusion if diffusion is not None else raw.get("diffusion", "kinetic")
    try:
        model = DiffusionModel(name)
    except ValueError:
        raise ConfigurationError(
            f"config.diffusion: unknown model {name!r}; choose from "
            f"{', '.join(m.value for m in DiffusionModel)}") from None
    factor = dominance_factor if dominance_factor is not None else raw.get("dominance_factor", 1.0)
    factor = _number(factor, "config.dominance_factor", positive=True)
    s = seed if seed is not None else raw.get("seed")
    if s is not None:
        if isinstance(s, bool) or not isinstance(s, int) or not 0 <= s < 2 ** 64:
            raise ConfigurationError(f"config.seed: expected an unsigned 64-bit integer, got {s!r}")
    return RunConfig(raw, params, sigma, model, factor, s)


def load_config(path: str | Path | None, **overrides) -> RunConfig:
    if path is None:
        return parse_config({}, **overrides)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"config: cannot read {path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_config(raw, **overrides)
