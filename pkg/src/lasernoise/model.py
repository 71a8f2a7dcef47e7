"""Single-mode laser photon-number rate-equation model.

Device constants, stationary operating point, the linearised fluctuation
rates and the two classifications (dominant time scale, device size).

All functions are pure; the dataclasses are frozen.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BelowTransparencyError, ParameterError

ELEMENTARY_CHARGE = 1.602176634e-19  # C

# semiconductor material scales per unit active volume (cm^3)
BETA_TIMES_VOLUME = 1e-14
TRANSPARENCY_DENSITY = 1e18
MATERIAL_LIFETIME = 3e-9
DEFAULT_CAVITY_LOSS = 1e12
# the size classes are order-of-magnitude statements; flag devices this close to an edge
NEAR_BOUNDARY_FACTOR = 3.0


@dataclass(frozen=True)
class DeviceParams:
    """Device constants plus pump settings.

    ``n_cap_t`` is the excitation number at transparency N_T and ``pump`` the
    injection rate j (excitations per unit time).  Counts are carried as reals.
    """

    beta: float
    tau: float
    n_cap_t: float
    kappa: float
    pump: float = 0.0
    sigma: float = 1.0
    volume: float | None = None

    def __post_init__(self):
        checks = [
            (0.0 < self.beta <= 1.0, "beta", "0 < beta <= 1"),
            (self.tau > 0.0, "tau", "tau > 0"),
            (self.n_cap_t >= 0.0, "n_cap_t", "N_T >= 0"),
            (self.kappa > 0.0, "kappa", "kappa > 0"),
            (self.pump >= 0.0, "pump", "j >= 0"),
            (0.0 <= self.sigma <= 1.0, "sigma", "0 <= sigma <= 1"),
        ]
        for ok, name, rule in checks:
            value = getattr(self, name)
            if not ok or not math.isfinite(value):
                raise ParameterError(f"{name}={value!r} violates {rule}")
        if self.volume is not None and not self.volume > 0.0:
            raise ParameterError(f"volume={self.volume!r} must be positive")

    @classmethod
    def from_scales(cls, beta: float, kappa_tau: float, n_t: float,
                    kappa: float = 1.0, pump: float = 0.0, sigma: float = 1.0) -> "DeviceParams":
        """Build from the dimensionless scales (beta, kappa*tau, n_T)."""
        if kappa_tau <= 0 or n_t < 0:
            raise ParameterError("kappa_tau must be > 0 and n_t >= 0")
        tau = kappa_tau / kappa
        return cls(beta=beta, tau=tau, n_cap_t=2.0 * kappa_tau * n_t / beta,
                   kappa=kappa, pump=pump, sigma=sigma)

    def with_pump(self, pump: float, sigma: float | None = None) -> "DeviceParams":
        return replace(self, pump=pump, sigma=self.sigma if sigma is None else sigma)

    @property
    def kappa_tau(self) -> float:
        return self.kappa * self.tau

    @property
    def max_gain(self) -> float:
        return self.beta * self.n_cap_t / self.tau

    @property
    def can_lase(self) -> bool:
        """Cavity loss below the maximal gain (reported, not enforced)."""
        return self.kappa < self.max_gain

    def as_dict(self) -> dict:
        return {"beta": self.beta, "tau": self.tau, "n_cap_t": self.n_cap_t,
                "kappa": self.kappa, "pump": self.pump, "sigma": self.sigma,
                "volume": self.volume}


@dataclass(frozen=True)
class OperatingPoint:
    n_bar: float
    n_cap_bar: float
    n_t: float
    j_th: float
    n_th: float
    quantum_efficiency: float


@dataclass(frozen=True)
class FluctuationRates:
    gamma_cap_n: float
    gamma_n: float
    omega_r: float
    r: float
    drift: np.ndarray = field(repr=False)

    @property
    def overdamped(self) -> bool:
        """Real drift eigenvalues: no relaxation oscillation."""
        half_diff = 0.5 * (self.gamma_cap_n - self.gamma_n)
        return half_diff ** 2 >= self.omega_r ** 2


class Regime(enum.Enum):
    RELAXATION_OSCILLATIONS = "RelaxationOscillations"
    OPTICAL_RELAXATION = "OpticalRelaxation"
    ADIABATIC_HOLE_BURNING = "AdiabaticHoleBurning"
    MIXED = "Mixed"


@dataclass(frozen=True)
class RegimeResult:
    regime: Regime
    dominance_ratio: float
    dominance_factor: float


class LaserType(enum.Enum):
    MACROSCOPIC = "Macroscopic"
    MESOSCOPIC = "Mesoscopic"
    MICROSCOPIC = "Microscopic"


@dataclass(frozen=True)
class DeviceClass:
    laser_type: LaserType
    inverse_beta: float
    lower_boundary: float
    upper_boundary: float
    on_boundary: bool
    note: str = "boundary values are assigned to the larger device class"


def derived_scales(params: DeviceParams) -> tuple[float, float, float]:
    """Return (n_T, j_th, n_th)."""
    b, k = params.beta, params.kappa
    n_t = b * params.n_cap_t / (2.0 * k * params.tau)
    j_th = 2.0 * k * (1.0 - b) / b * (n_t + 0.5)
    n_th = math.sqrt(1.0 / 16.0 + j_th / (4.0 * k)) - 0.25
    return n_t, j_th, n_th


def photon_number(params: DeviceParams, pump: float | None = None) -> float:
    """Stationary mean photon number for pump rate ``pump`` (default params.pump).

    Positive root of n^2 + b n - j/(4 kappa) = 0, b = (j_th - j)/(2 kappa) + 1/2,
    evaluated without cancellation on either side of threshold.
    """
    j = params.pump if pump is None else pump
    if j < 0:
        raise ParameterError("pump must be >= 0")
    _, j_th, _ = derived_scales(params)
    b = (j_th - j) / (2.0 * params.kappa) + 0.5
    c = j / (4.0 * params.kappa)
    disc = math.sqrt(b * b + 4.0 * c)
    if b > 0:
        return 2.0 * c / (b + disc)
    return 0.5 * (disc - b)


def pump_for_photon_number(params: DeviceParams, n_bar: float) -> float:
    """Inverse of :func:`photon_number`: j = j_th * 2n/(2n+1) + 2 kappa n."""
    if n_bar < 0:
        raise ParameterError("n_bar must be >= 0")
    _, j_th, _ = derived_scales(params)
    return j_th * 2.0 * n_bar / (2.0 * n_bar + 1.0) + 2.0 * params.kappa * n_bar


def excitation_number(params: DeviceParams, n_bar: float) -> float:
    """Stationary N for a given photon number (photon balance).

    Written as (2 kappa tau / beta)(n_T + 1/2) * 2n/(2n+1), which equals the
    pinned form and stays finite for N_T = 0.
    """
    n_t, _, _ = derived_scales(params)
    return 2.0 * params.kappa_tau / params.beta * (n_t + 0.5) * 2.0 * n_bar / (2.0 * n_bar + 1.0)


def stationary_state(params: DeviceParams) -> OperatingPoint:
    n_t, j_th, n_th = derived_scales(params)
    n_bar = photon_number(params)
    if n_bar == 0.0:
        # photon balance is degenerate; use pump balance
        n_cap_bar = params.pump * params.tau
    else:
        n_cap_bar = excitation_number(params, n_bar)
    qe = 2.0 * params.kappa * n_bar / params.pump if params.pump > 0 else 0.0
    return OperatingPoint(n_bar=n_bar, n_cap_bar=n_cap_bar, n_t=n_t,
                          j_th=j_th, n_th=n_th, quantum_efficiency=qe)


def operating_point_at(params: DeviceParams, n_bar: float) -> tuple[DeviceParams, OperatingPoint]:
    """Re-pump ``params`` so that the stationary photon number is ``n_bar``."""
    p = params.with_pump(pump_for_photon_number(params, n_bar))
    op = stationary_state(p)
    return p, replace(op, n_bar=float(n_bar))


def rate_equations(params: DeviceParams, n_cap: float, n: float) -> tuple[float, float]:
    """Deterministic right-hand side (dN/dt, dn/dt)."""
    g = params.beta / params.tau
    dn_cap = params.pump - n_cap / params.tau - 2.0 * g * (n_cap - params.n_cap_t) * n
    dn = 2.0 * (g * (n_cap - params.n_cap_t) - params.kappa) * n + g * n_cap
    return dn_cap, dn


def drift_matrix(params: DeviceParams, n_bar: float) -> np.ndarray:
    """Jacobian of the rate equations at the stationary point with photon number n_bar.

    Valid on both sides of transparency; the (N, n) entry changes sign there.
    """
    g = params.beta / params.tau
    n_cap = excitation_number(params, n_bar)
    n_t, _, _ = derived_scales(params)
    gamma_cap_n = (1.0 + 2.0 * params.beta * n_bar) / params.tau
    gamma_n = 2.0 * params.kappa * (n_t + 0.5) / (n_bar + 0.5)
    return np.array([[-gamma_cap_n, -2.0 * g * (n_cap - params.n_cap_t)],
                     [g * (2.0 * n_bar + 1.0), -gamma_n]])


def at_or_above_transparency(op: OperatingPoint) -> bool:
    # n_T is recomputed from N_T, so allow round-off at transparency itself
    return op.n_bar >= op.n_t * (1.0 - 1e-12)


def fluctuation_rates(params: DeviceParams, op: OperatingPoint) -> FluctuationRates:
    n_t, n_bar = op.n_t, op.n_bar
    if not at_or_above_transparency(op):
        raise BelowTransparencyError(
            f"n_bar={n_bar:g} is below transparency n_T={n_t:g}; omega_R is imaginary")
    excess = max(0.0, n_bar - n_t)
    k, b, tau = params.kappa, params.beta, params.tau
    kt = k * tau
    gamma_cap_n = (1.0 + 2.0 * b * n_bar) / tau
    gamma_n = 2.0 * k * (n_t + 0.5) / (n_bar + 0.5)
    omega_r = 2.0 * k * math.sqrt(b * excess / kt)
    r = math.sqrt(kt / b * excess / (n_bar + 0.5) ** 2)
    # omega_R / r written without the division so that n_bar = n_T stays finite
    coupling_in = 2.0 * b * (n_bar + 0.5) / tau
    drift = np.array([[-gamma_cap_n, -r * omega_r],
                      [coupling_in, -gamma_n]])
    drift.setflags(write=False)
    return FluctuationRates(gamma_cap_n, gamma_n, omega_r, r, drift)


def classify_regime(rates: FluctuationRates, dominance_factor: float = 1.0) -> RegimeResult:
    """Pick the time scale that exceeds ``dominance_factor`` times the sum of the others."""
    scales = {
        Regime.RELAXATION_OSCILLATIONS: rates.omega_r,
        Regime.OPTICAL_RELAXATION: rates.gamma_n,
        Regime.ADIABATIC_HOLE_BURNING: rates.gamma_cap_n,
    }
    top = max(scales, key=scales.get)
    rest = sum(v for key, v in scales.items() if key is not top)
    ratio = scales[top] / rest if rest > 0 else math.inf
    regime = top if ratio >= dominance_factor else Regime.MIXED
    return RegimeResult(regime, ratio, dominance_factor)


def device_boundaries(params: DeviceParams) -> tuple[float, float]:
    """Return the (mesoscopic, macroscopic) lower bounds on 1/beta."""
    n_t, _, _ = derived_scales(params)
    kt = params.kappa_tau
    return 4.0 * kt * (n_t + 0.5), 2.0 * (2.0 * kt) ** 2 * (n_t + 0.5)


def classify_device(params: DeviceParams) -> DeviceClass:
    lower, upper = device_boundaries(params)
    inv = 1.0 / params.beta
    if inv >= upper:
        kind = LaserType.MACROSCOPIC
    elif inv >= lower:
        kind = LaserType.MESOSCOPIC
    else:
        kind = LaserType.MICROSCOPIC
    on_boundary = math.isclose(inv, upper, rel_tol=1e-12) or math.isclose(inv, lower, rel_tol=1e-12)
    note = DeviceClass.note
    for name, edge in (("microscopic/mesoscopic", lower), ("mesoscopic/macroscopic", upper)):
        factor = max(inv, edge) / min(inv, edge)
        if factor <= NEAR_BOUNDARY_FACTOR:
            note = f"within a factor {factor:.2g} of the {name} boundary; {note}"
    return DeviceClass(kind, inv, lower, upper, on_boundary, note)


def electrical_current(rate: float) -> float:
    """Convert an excitation rate (1/s) to a current in amperes."""
    if rate < 0:
        raise ParameterError("rate must be >= 0")
    return rate * ELEMENTARY_CHARGE


def rate_from_current(current: float) -> float:
    if current < 0:
        raise ParameterError("current must be >= 0")
    return current / ELEMENTARY_CHARGE


def material_preset(volume: float, kappa: float = DEFAULT_CAVITY_LOSS,
                    pump: float = 0.0, sigma: float = 1.0) -> DeviceParams:
    """Typical semiconductor scales for an active volume in cm^3."""
    if not volume > 0:
        raise ParameterError(f"volume={volume!r} must be positive")
    return DeviceParams(beta=BETA_TIMES_VOLUME / volume,
                        tau=MATERIAL_LIFETIME,
                        n_cap_t=TRANSPARENCY_DENSITY * volume,
                        kappa=kappa, pump=pump, sigma=sigma, volume=volume)


def preset_for_beta(beta: float, kappa: float = DEFAULT_CAVITY_LOSS, **kwargs) -> DeviceParams:
    """Material preset addressed by its spontaneous emission factor."""
    return material_preset(BETA_TIMES_VOLUME / beta, kappa=kappa, **kwargs)
