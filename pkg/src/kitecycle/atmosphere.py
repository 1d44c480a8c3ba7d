"""Altitude profiles of wind speed, air density and derived quantities.

Wind speed follows the logarithmic wind law of the neutral atmospheric
boundary layer; air density follows the isothermal barometric formula.
Both are steady: profiles vary with altitude but not with time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, ValidationError

__all__ = ["Environment", "WindState", "wind_state_at"]


@dataclass(frozen=True)
class Environment:
    """Site parameters of the wind and density profiles.

    Attributes:
        v_w_ref: Wind speed [m/s] measured at the reference altitude.
        z_ref: Reference altitude [m] of the wind measurement.
        z0: Aerodynamic roughness length [m].
        rho0: Air density [kg/m^3] at sea level.
        H_rho: Scale height [m] of the density decay.
    """

    v_w_ref: float
    z_ref: float
    z0: float
    rho0: float = 1.225
    H_rho: float = 8550.0

    def __post_init__(self):
        if not self.z_ref > self.z0 > 0.0:
            raise ValidationError(
                f"requires z_ref > z0 > 0, got z_ref={self.z_ref}, z0={self.z0}"
            )
        if self.v_w_ref < 0.0:
            raise ValidationError(f"reference wind speed must be >= 0, got {self.v_w_ref}")
        if self.rho0 <= 0.0:
            raise ValidationError(f"sea-level density must be > 0, got {self.rho0}")
        if self.H_rho <= 0.0:
            raise ValidationError(f"density scale height must be > 0, got {self.H_rho}")

    def wind_speed(self, z: float) -> float:
        """Wind speed [m/s] at altitude ``z`` by the logarithmic wind law."""
        if z < self.z0:
            raise DomainError(
                f"altitude {z} m is below the roughness length {self.z0} m; "
                "the log wind law is undefined there"
            )
        return self.v_w_ref * math.log(z / self.z0) / math.log(self.z_ref / self.z0)

    def density(self, z: float) -> float:
        """Air density [kg/m^3] at altitude ``z`` (isothermal barometric decay)."""
        return self.rho0 * math.exp(-z / self.H_rho)


@dataclass(frozen=True)
class WindState:
    """Local flow conditions at one altitude.

    ``q`` (dynamic pressure) and ``P_w`` (wind power density) are derived
    from ``v_w`` and ``rho`` on construction, so the identities
    q = rho*v_w^2/2 and P_w = rho*v_w^3/2 hold exactly.
    """

    v_w: float
    rho: float
    q: float = field(init=False)
    P_w: float = field(init=False)

    def __post_init__(self):
        if self.v_w < 0.0 or self.rho <= 0.0:
            raise ValidationError(
                f"wind state requires v_w >= 0 and rho > 0, got v_w={self.v_w}, rho={self.rho}"
            )
        object.__setattr__(self, "q", 0.5 * self.rho * self.v_w**2)
        object.__setattr__(self, "P_w", 0.5 * self.rho * self.v_w**3)


def wind_state_at(z: float, env: Environment) -> WindState:
    """Evaluate the flow conditions at altitude ``z``.

    Raises:
        DomainError: if ``z`` lies below the roughness length.
    """
    return WindState(v_w=env.wind_speed(z), rho=env.density(z))
