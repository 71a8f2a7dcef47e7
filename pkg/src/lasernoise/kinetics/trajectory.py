"""Sampled paths of (N, n) with per-bin output photon counts, plus CSV dump/load."""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..model import DeviceParams

FORMAT_VERSION = 1
COLUMNS = ("t", "N", "n", "emission_count_bin")


@dataclass
class Trajectory:
    params: DeviceParams
    method: str
    seed: int
    index: int
    sample_dt: float
    t_end: float
    n_cap: np.ndarray
    n: np.ndarray
    emissions: np.ndarray          # counts emitted in [k dt, (k+1) dt)
    settings: dict = field(default_factory=dict)
    occupancy: np.ndarray | None = None   # time spent in (N, n) after occupancy_start
    occupancy_start: float = 0.0
    occupancy_overflow: float = 0.0
    channel_counts: np.ndarray | None = None
    initial: tuple = (0, 0)
    final: tuple = (0, 0)
    events: int = 0
    truncated: bool = False
    boundary_hits: int = 0
    steps: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n.size) * self.sample_dt

    @property
    def total_emissions(self):
        return self.emissions.sum()

    def header(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "method": self.method,
            "seed": self.seed,
            "index": self.index,
            "sample_dt": self.sample_dt,
            "t_end": self.t_end,
            "params": self.params.as_dict(),
            "settings": self.settings,
            "events": self.events,
            "truncated": self.truncated,
            "boundary_hits": self.boundary_hits,
        }

    def dump(self, path: str | Path) -> None:
        """Write a CSV with a one-line JSON header comment."""
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.header(), sort_keys=True) + "\n")
        buf.write(",".join(COLUMNS) + "\n")
        counts = np.append(self.emissions, 0)[: self.n.size]
        fmt = "{:.17g},{},{},{}\n" if self.method == "gillespie" else "{:.17g},{!r},{!r},{!r}\n"
        for t, a, b, c in zip(self.times.tolist(), self.n_cap.tolist(), self.n.tolist(), counts.tolist()):
            buf.write(fmt.format(t, a, b, c))
        Path(path).write_text(buf.getvalue())


def load_trajectory(path: str | Path) -> Trajectory:
    text = Path(path).read_text().splitlines()
    header = json.loads(text[0][2:])
    if text[1].split(",") != list(COLUMNS):
        raise ValueError(f"unexpected columns in {path}: {text[1]}")
    data = np.loadtxt(text[2:], delimiter=",", ndmin=2)
    integral = header["method"] == "gillespie"
    cast = (lambda a: a.astype(np.int64)) if integral else (lambda a: a)
    n_bins = int(np.ceil(header["t_end"] / header["sample_dt"] - 1e-12))
    params = DeviceParams(**header["params"])
    return Trajectory(
        params=params, method=header["method"], seed=header["seed"], index=header["index"],
        sample_dt=header["sample_dt"], t_end=header["t_end"],
        n_cap=cast(data[:, 1]), n=cast(data[:, 2]), emissions=cast(data[:n_bins, 3]),
        settings=header["settings"], events=header["events"], truncated=header["truncated"],
        boundary_hits=header["boundary_hits"],
    )
