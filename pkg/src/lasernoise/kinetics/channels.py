"""Jump-channel decomposition of the rate equations."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..errors import UnsupportedPumpError
from ..model import DeviceParams, rate_equations


class PumpMode(enum.Enum):
    POISSON = "poisson"   # sigma = 1
    REGULAR = "regular"   # sigma = 0, one excitation every 1/j

    @classmethod
    def for_sigma(cls, sigma: float) -> "PumpMode":
        if sigma == 1.0:
            return cls.POISSON
        if sigma == 0.0:
            return cls.REGULAR
        raise UnsupportedPumpError(
            f"sigma={sigma} has no jump-process realisation; use the Langevin integrator")


CHANNEL_NAMES = ("pump", "carrier_loss", "spontaneous", "stimulated", "absorption", "cavity")
PUMP, CARRIER_LOSS, SPONTANEOUS, STIMULATED, ABSORPTION, CAVITY = range(6)
EMITTING_CHANNEL = CAVITY

# (dN, dn) per channel
DELTAS = np.array([[1, 0], [-1, 0], [-1, 1], [-1, 1], [1, -1], [0, -1]], dtype=np.int64)


def channel_rates(params: DeviceParams, n_cap, n) -> np.ndarray:
    """Rates of all six channels; broadcasts over arrays of states."""
    n_cap = np.asarray(n_cap, dtype=float)
    n = np.asarray(n, dtype=float)
    g = params.beta / params.tau
    return np.stack(np.broadcast_arrays(
        np.full_like(n_cap * n, params.pump),
        (1.0 - params.beta) * n_cap / params.tau,
        g * n_cap,
        2.0 * g * n_cap * n,
        2.0 * g * params.n_cap_t * n,
        2.0 * params.kappa * n,
    ))


@dataclass(frozen=True)
class JumpProcess:
    params: DeviceParams
    pump_mode: PumpMode
    deltas: np.ndarray = DELTAS
    names: tuple[str, ...] = CHANNEL_NAMES
    emitting: int = EMITTING_CHANNEL

    def rates(self, n_cap, n) -> np.ndarray:
        return channel_rates(self.params, n_cap, n)

    def drift(self, n_cap, n) -> np.ndarray:
        """Sum of delta x rate; equals the deterministic rate equations."""
        return np.tensordot(self.deltas.T.astype(float), self.rates(n_cap, n), axes=1)


def build_jump_process(params: DeviceParams, pump_mode: PumpMode | None = None,
                       check_states: int = 100, seed: int = 0) -> JumpProcess:
    """Channel table for ``params``; pump mode defaults from sigma."""
    mode = PumpMode.for_sigma(params.sigma) if pump_mode is None else pump_mode
    if PumpMode.for_sigma(params.sigma) is not mode:
        raise UnsupportedPumpError(f"pump mode {mode.value} requires sigma="
                                   f"{1.0 if mode is PumpMode.POISSON else 0.0}")
    proc = JumpProcess(params, mode)
    rng = np.random.default_rng(seed)
    states = rng.integers(0, max(10, int(3 * params.n_cap_t) + 10), size=(check_states, 2))
    got = proc.drift(states[:, 0], states[:, 1])
    want = np.array(rate_equations(params, states[:, 0].astype(float), states[:, 1].astype(float)))
    scale = np.abs(want) + np.abs(proc.rates(states[:, 0], states[:, 1])).sum(axis=0) + 1e-300
    if np.max(np.abs(got - want) / scale) > 1e-12:
        raise AssertionError("channel drift does not reproduce the rate equations")
    return proc
