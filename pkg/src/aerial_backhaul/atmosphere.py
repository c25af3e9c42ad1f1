"""Free-space and clear-air gaseous loss for mmWave links.

Specific attenuation uses the simplified ITU fits for oxygen and water
vapour at 20 degC, sea level, scaled exponentially with height. Slant paths
integrate that profile in closed form.

Units: frequency in GHz, lengths and heights in km, attenuation in dB or
dB/km.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
DEFAULT_WATER_VAPOR_DENSITY = 7.5  # g/m^3
MAX_FREQUENCY_GHZ = 350.0


@dataclass(frozen=True)
class Atmosphere:
    """Clear-air absorber profile.

    ``temperature_label_c`` is informational only; the attenuation fits are
    fixed at their 20 degC sea-level calibration.
    """

    water_vapor_density_sea_level: float = DEFAULT_WATER_VAPOR_DENSITY
    scale_height: float = 1.5
    temperature_label_c: float = 20.0

    def __post_init__(self) -> None:
        if not self.water_vapor_density_sea_level >= 0:
            raise ValueError("water_vapor_density_sea_level must be >= 0")
        if not self.scale_height > 0:
            raise ValueError("scale_height must be > 0")


class PathKind(enum.Enum):
    SLANT = "slant"
    HORIZONTAL = "horizontal"


@dataclass(frozen=True)
class PathGeometry:
    """A straight propagation path.

    Horizontal paths sit at ``start_height``; ``end_height`` is ignored.
    Slant paths climb from ``start_height`` to ``end_height`` at
    ``elevation_angle`` (radians).
    """

    length: float
    start_height: float = 0.0
    end_height: float = 0.0
    elevation_angle: float = 0.0
    kind: PathKind = PathKind.HORIZONTAL

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise ValueError("path length must be > 0")
        if self.start_height < 0 or self.end_height < 0:
            raise ValueError("heights must be >= 0")
        if self.kind is PathKind.SLANT and not 0 < self.elevation_angle <= math.pi / 2:
            raise ValueError("slant path needs 0 < elevation_angle <= pi/2")

    @classmethod
    def slant(cls, length: float, elevation_angle: float, start_height: float = 0.0) -> PathGeometry:
        """Slant path whose end height follows from length and elevation."""
        end = start_height + length * math.sin(elevation_angle)
        return cls(length, start_height, end, elevation_angle, PathKind.SLANT)

    @classmethod
    def horizontal(cls, length: float, height: float) -> PathGeometry:
        return cls(length, height, height, 0.0, PathKind.HORIZONTAL)


def _check_frequency(fc: float) -> None:
    if not 0 < fc < MAX_FREQUENCY_GHZ:
        raise ValueError(f"frequency {fc} GHz outside the (0, {MAX_FREQUENCY_GHZ:g}) GHz fit range")


def _oxygen_low(fc: float) -> float:
    return 0.001 * fc**2 * (6.09 / (fc**2 + 0.227) + 4.81 / ((fc - 57.0) ** 2 + 1.5))


def oxygen_specific_attenuation(fc: float) -> float:
    """Sea-level oxygen absorption in dB/km.

    Between 57 and 63 GHz the fit is a straight line anchored on the
    low-band value at 57 GHz; the ``0.001 fc^2`` prefactor belongs to the
    outer branches only.
    """
    _check_frequency(fc)
    if fc < 57.0:
        return _oxygen_low(fc)
    if fc < 63.0:
        return _oxygen_low(57.0) + 1.5 * (fc - 57.0)
    return 0.001 * fc**2 * (4.13 / ((fc - 63.0) ** 2 + 1.1) + 0.19 / ((fc - 118.7) ** 2 + 2.0))


def water_specific_attenuation(fc: float, rho0: float = DEFAULT_WATER_VAPOR_DENSITY) -> float:
    """Sea-level water-vapour absorption in dB/km for density ``rho0`` (g/m^3)."""
    _check_frequency(fc)
    if rho0 < 0:
        raise ValueError("water vapour density must be >= 0")
    lines = (
        0.05
        + 3.6 / ((fc - 22.2) ** 2 + 8.5)
        + 10.6 / ((fc - 183.3) ** 2 + 9.0)
        + 8.9 / ((fc - 325.4) ** 2 + 26.3)
    )
    return 0.0001 * fc**2 * rho0 * lines


def sea_level_attenuation(fc: float, rho0: float = DEFAULT_WATER_VAPOR_DENSITY) -> float:
    return oxygen_specific_attenuation(fc) + water_specific_attenuation(fc, rho0)


def specific_attenuation_at_height(fc, rho0, height, scale_height):
    """Oxygen plus water-vapour attenuation (dB/km) at ``height`` km.

    ``height`` may be an array.
    """
    if scale_height <= 0:
        raise ValueError("scale_height must be > 0")
    height = np.asarray(height, dtype=float)
    if np.any(height < 0):
        raise ValueError("height must be >= 0")
    value = sea_level_attenuation(fc, rho0) * np.exp(-height / scale_height)
    return float(value) if value.ndim == 0 else value


def gaseous_attenuation_db(fc: float, atmosphere: Atmosphere, path: PathGeometry) -> float:
    """Total gaseous loss (dB) along ``path``."""
    rho0 = atmosphere.water_vapor_density_sea_level
    hs = atmosphere.scale_height
    if path.kind is PathKind.HORIZONTAL:
        return specific_attenuation_at_height(fc, rho0, path.start_height, hs) * path.length
    if path.elevation_angle <= 0:
        raise ValueError("slant path needs a positive elevation angle")
    lo, hi = sorted((path.start_height, path.end_height))
    # exp(-lo/hs) - exp(-hi/hs) without cancellation for nearby heights
    column = math.exp(-lo / hs) * -math.expm1(-(hi - lo) / hs)
    return sea_level_attenuation(fc, rho0) * column * hs / math.sin(path.elevation_angle)


def wavelength_m(fc: float) -> float:
    return SPEED_OF_LIGHT / (fc * 1e9)


def free_space_path_loss_db(length_km, fc: float):
    """``20 log10(4 pi L / lambda)`` with ``L`` in km (array friendly)."""
    length_m = np.asarray(length_km, dtype=float) * 1e3
    if np.any(length_m <= 0):
        raise ValueError("link length must be > 0")
    value = 20.0 * np.log10(4.0 * np.pi * length_m / wavelength_m(fc))
    return float(value) if value.ndim == 0 else value


def total_loss_db(fc: float, atmosphere: Atmosphere, path: PathGeometry) -> float:
    return free_space_path_loss_db(path.length, fc) + gaseous_attenuation_db(fc, atmosphere, path)


def horizontal_loss_db(fc: float, atmosphere: Atmosphere, length_km, height_km):
    """Vectorised ``total_loss_db`` for horizontal hops."""
    specific = specific_attenuation_at_height(
        fc, atmosphere.water_vapor_density_sea_level, height_km, atmosphere.scale_height
    )
    return free_space_path_loss_db(length_km, fc) + specific * np.asarray(length_km, dtype=float)


def db_to_linear(db):
    """Loss in dB to a linear power gain ``10^(-dB/10)``."""
    return np.power(10.0, -np.asarray(db, dtype=float) / 10.0)


def linear_to_db(gain):
    return -10.0 * np.log10(np.asarray(gain, dtype=float))


def channel_gain(fc: float, atmosphere: Atmosphere, path: PathGeometry) -> float:
    """Linear channel gain ``h_L`` of a path."""
    return float(db_to_linear(total_loss_db(fc, atmosphere, path)))
