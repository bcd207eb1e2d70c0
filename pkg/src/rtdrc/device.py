"""Resonant-tunnelling diode current-voltage model.

The diode current is the sum of a tunnelling term and a resonant term:

    I(V) = I_t(V) + I_r(V)
    I_t(V) = a * ln((1 + exp(alpha + eta*V)) / (1 + exp(alpha - eta*V)))
               * (pi/2 + arctan((c - n1*V) / d))
    I_r(V) = h * (exp(gamma*V) - 1)

with alpha = q*(b - c)/(kB*T), eta = q*n1/(kB*T), gamma = q*n2/(kB*T).
The curve has two positive-differential-resistance branches separated by
a negative-differential-resistance (NDR) region roughly in V = 1..3 V.

All current functions are pure, accept scalars or numpy arrays, and are
safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# CODATA 2018 exact values.
ELECTRON_CHARGE = 1.602176634e-19  # C
BOLTZMANN_CONSTANT = 1.380649e-23  # J/K

# Keys accepted in flat key-value parameter files.
PARAM_KEYS = ("a", "b", "c", "d", "n1", "n2", "h", "temperature")


@dataclass(frozen=True)
class DeviceParams:
    """Fitted parameters of the diode current law.

    a, h are current scales (A); b, c, d are voltage parameters (V);
    n1, n2 are dimensionless; temperature is in kelvin.
    """

    a: float = 0.0039
    b: float = 5.0
    c: float = 0.0874
    d: float = 0.0073
    n1: float = 0.0352
    n2: float = 0.0031
    h: float = 0.0367
    temperature: float = 300.0

    def __post_init__(self) -> None:
        if not self.temperature > 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if self.d == 0:
            raise ValueError("d must be nonzero (divides the arctan argument)")

    @property
    def q_over_kT(self) -> float:
        """Inverse thermal voltage q/(kB*T) in 1/V, derived from temperature."""
        return ELECTRON_CHARGE / (BOLTZMANN_CONSTANT * self.temperature)

    def to_dict(self) -> dict[str, float]:
        """Flat mapping with the eight stored parameters (SI units)."""
        return {key: float(getattr(self, key)) for key in PARAM_KEYS}

    @classmethod
    def from_dict(cls, mapping: dict) -> "DeviceParams":
        """Build parameters from a flat mapping; unknown keys are rejected."""
        unknown = set(mapping) - set(PARAM_KEYS)
        if unknown:
            raise ValueError(f"unknown device parameter keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in mapping.items()})


@dataclass(frozen=True)
class DerivedParams:
    """Exponent coefficients derived from DeviceParams and temperature."""

    alpha: float  # dimensionless
    eta: float    # 1/V
    gamma: float  # 1/V


def default_params() -> DeviceParams:
    """Operating-point parameters with the gain-boosted b = 5.0 V."""
    return DeviceParams()


def reference_params() -> DeviceParams:
    """Parameters with the original fitted b = 0.5 V."""
    return DeviceParams(b=0.5)


def derive(params: DeviceParams) -> DerivedParams:
    """Compute alpha = q(b-c)/(kB T), eta = q n1/(kB T), gamma = q n2/(kB T)."""
    q_kt = params.q_over_kT
    return DerivedParams(
        alpha=q_kt * (params.b - params.c),
        eta=q_kt * params.n1,
        gamma=q_kt * params.n2,
    )


def _softplus(x):
    # ln(1 + e^x) without evaluating e^x; exact for large |x|.
    return np.logaddexp(0.0, x)


def tunnel_current(v, params: DeviceParams):
    """Tunnelling current I_t(V) in amperes.

    The log ratio ln((1+e^(alpha+eta*V))/(1+e^(alpha-eta*V))) is evaluated
    as softplus(alpha + eta*V) - softplus(alpha - eta*V), which stays
    finite for the large alpha (about 190 at b = 5 V) this model runs at.

    Accepts a scalar or array voltage; returns the matching shape.
    """
    varr = np.asarray(v, dtype=np.float64)
    der = derive(params)
    log_ratio = _softplus(der.alpha + der.eta * varr) - _softplus(der.alpha - der.eta * varr)
    gate = np.pi / 2 + np.arctan((params.c - params.n1 * varr) / params.d)
    out = params.a * log_ratio * gate
    return out if out.ndim else float(out)


def resonant_current(v, params: DeviceParams):
    """Resonant current I_r(V) = h*(exp(gamma*V) - 1) in amperes.

    Uses expm1 so I_r(0) is exactly zero. No clamping is applied: an
    exponent beyond float range propagates as inf with a warning rather
    than saturating silently (gamma ~ 0.12 1/V, so this needs |V| in the
    thousands of volts).
    """
    varr = np.asarray(v, dtype=np.float64)
    gamma = derive(params).gamma
    out = params.h * np.expm1(gamma * varr)
    return out if out.ndim else float(out)


def total_current(v, params: DeviceParams):
    """Total diode current I(V) = I_t(V) + I_r(V) in amperes."""
    out = np.asarray(tunnel_current(v, params)) + np.asarray(resonant_current(v, params))
    return out if out.ndim else float(out)


def differential_conductance(v, params: DeviceParams, dv: float = 1e-4):
    """Central-difference dI/dV in siemens; negative values flag NDR.

    dv must be positive (default 1e-4 V); the truncation error is O(dv^2).
    """
    if not dv > 0:
        raise ValueError(f"dv must be positive, got {dv}")
    hi = np.asarray(total_current(np.asarray(v, dtype=np.float64) + dv, params))
    lo = np.asarray(total_current(np.asarray(v, dtype=np.float64) - dv, params))
    out = (hi - lo) / (2.0 * dv)
    return out if out.ndim else float(out)


def save_params(params: DeviceParams, path) -> None:
    """Write parameters to a flat key-value file (keys a..h, temperature)."""
    from . import config

    config.write_kv(path, params.to_dict())


def load_params(path) -> DeviceParams:
    """Read parameters from a flat key-value file written by save_params."""
    from . import config

    return DeviceParams.from_dict(config.read_kv(path))
