"""Square-array antenna gains for UAV-mounted and ground terminals.

Gains are linear and normalised so that every array radiates the same
total power: ``G = G0(N) * Ge * Ga`` with ``G0(N)`` the reciprocal of the
sphere integral of ``Ge * Ga``. Element spacings are in wavelengths, so the
patterns do not depend on carrier frequency.

Tilt angles ``(theta_x, theta_y)`` are the platform rotations in the x-z
and y-z planes; the pointing direction in the array frame is
``(tan theta_x, tan theta_y, 1)`` normalised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "ArrayConfig",
    "ElementPattern",
    "Orientation",
    "QuadratureError",
    "StaircaseParams",
    "angles_from_tilt",
    "array_factor",
    "boresight_gain",
    "element_gain",
    "gain_breakpoint",
    "normalization_constant",
    "radiated_power",
    "radial_gain",
    "staircase_gain",
    "staircase_levels",
    "total_gain",
]


class QuadratureError(ArithmeticError):
    """Normalisation integral failed to converge."""


@dataclass(frozen=True)
class ElementPattern:
    """3GPP single-element attenuation parameters (degrees and dB)."""

    theta_3db_deg: float = 65.0
    phi_3db_deg: float = 65.0
    side_lobe_level_db: float = 30.0
    max_attenuation_db: float = 30.0


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform N x N planar array.

    Spacings are in wavelengths and steering phases in radians.
    ``frequency_ghz`` only fixes the physical wavelength for reporting.
    """

    elements_per_side: int
    element_spacing_x: float = 0.5
    element_spacing_y: float = 0.5
    steering_phase_x: float = 0.0
    steering_phase_y: float = 0.0
    element_max_gain_db: float = 8.0
    frequency_ghz: float = 70.0
    element: ElementPattern = field(default_factory=ElementPattern)

    def __post_init__(self) -> None:
        if int(self.elements_per_side) != self.elements_per_side or self.elements_per_side < 1:
            raise ValueError("elements_per_side must be a positive integer")
        if not (self.element_spacing_x > 0 and self.element_spacing_y > 0):
            raise ValueError("element spacings must be > 0")
        if not math.isfinite(self.element_max_gain_db):
            raise ValueError("element_max_gain_db must be finite")

    def with_size(self, n: int) -> ArrayConfig:
        return replace(self, elements_per_side=int(n))

    @property
    def max_gain_linear(self) -> float:
        return 10.0 ** (self.element_max_gain_db / 10.0)


@dataclass(frozen=True)
class Orientation:
    theta_x: float
    theta_y: float

    def __post_init__(self) -> None:
        if abs(self.theta_x) >= math.pi / 2 or abs(self.theta_y) >= math.pi / 2:
            raise ValueError("tilt components must lie in (-pi/2, pi/2)")


@dataclass(frozen=True)
class StaircaseParams:
    """Steps per lobe ``J`` and number of modelled lobes ``K``."""

    steps_per_lobe: int = 10
    lobe_count: int = 4

    def __post_init__(self) -> None:
        if self.steps_per_lobe < 1 or self.lobe_count < 1:
            raise ValueError("steps_per_lobe and lobe_count must be >= 1")

    @property
    def total_steps(self) -> int:
        return self.steps_per_lobe * self.lobe_count

    def breakpoints(self, n: int) -> np.ndarray:
        """Angles ``2 j / (J N)`` for ``j = 0..J K`` in radians."""
        return 2.0 * np.arange(self.total_steps + 1) / (self.steps_per_lobe * n)


def _direction_from_tilt(theta_x, theta_y):
    tx = np.tan(np.asarray(theta_x, dtype=float))
    ty = np.tan(np.asarray(theta_y, dtype=float))
    norm = np.sqrt(tx * tx + ty * ty + 1.0)
    return tx / norm, ty / norm, 1.0 / norm


def angles_from_tilt(theta_x, theta_y):
    """Polar angle and azimuth of the pointing error.

    At boresight the azimuth is undefined and returned as 0.
    """
    tx = np.tan(np.asarray(theta_x, dtype=float))
    ty = np.tan(np.asarray(theta_y, dtype=float))
    theta = np.arctan(np.hypot(tx, ty))
    phi = np.arctan2(ty, tx)
    if theta.ndim == 0:
        return float(theta), float(phi)
    return theta, phi


def _dirichlet_sq(psi, n: int):
    """``sin^2(n psi / 2) / (n^2 sin^2(psi / 2))`` with its removable poles."""
    # the squared kernel is 2 pi periodic; wrapping keeps grating poles accurate
    psi = np.remainder(np.asarray(psi, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    half = psi / 2.0
    den = n * np.sin(half)
    singular = np.abs(den) < 1e-9
    safe = np.where(singular, 1.0, den)
    out = (np.sin(n * half) / safe) ** 2
    return np.where(singular, 1.0, out)


def _element_attenuation_db(ux, uy, uz, element: ElementPattern):
    vertical = np.degrees(np.arcsin(np.clip(ux, -1.0, 1.0)))
    horizontal = np.degrees(np.arctan2(uy, uz))
    a_v = np.minimum(12.0 * (vertical / element.theta_3db_deg) ** 2, element.side_lobe_level_db)
    a_h = np.minimum(12.0 * (horizontal / element.phi_3db_deg) ** 2, element.max_attenuation_db)
    return np.minimum(a_v + a_h, element.max_attenuation_db)


def _element_gain_dir(ux, uy, uz, cfg: ArrayConfig):
    return 10.0 ** ((cfg.element_max_gain_db - _element_attenuation_db(ux, uy, uz, cfg.element)) / 10.0)


def _array_factor_dir(ux, uy, cfg: ArrayConfig):
    n = cfg.elements_per_side
    psi_x = 2.0 * np.pi * cfg.element_spacing_x * ux + cfg.steering_phase_x
    psi_y = 2.0 * np.pi * cfg.element_spacing_y * uy + cfg.steering_phase_y
    return _dirichlet_sq(psi_x, n) * _dirichlet_sq(psi_y, n)


def _scalar(value):
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


def element_gain(theta_x, theta_y, cfg: ArrayConfig):
    """Linear 3GPP element gain ``10^((G_max - A)/10)`` for a tilt."""
    ux, uy, uz = _direction_from_tilt(theta_x, theta_y)
    return _scalar(_element_gain_dir(ux, uy, uz, cfg))


def array_factor(theta_x, theta_y, cfg: ArrayConfig):
    """Normalised N x N array factor in [0, 1] for a tilt."""
    ux, uy, _ = _direction_from_tilt(theta_x, theta_y)
    return _scalar(_array_factor_dir(ux, uy, cfg))


def _pattern_dir(ux, uy, uz, cfg: ArrayConfig):
    return _element_gain_dir(ux, uy, uz, cfg) * _array_factor_dir(ux, uy, cfg)


def _sphere_integral(cfg: ArrayConfig, panels_theta: int, panels_phi: int, order: int = 8) -> float:
    nodes, weights = leggauss(order)

    def composite(lo, hi, panels):
        edges = np.linspace(lo, hi, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        w = (half[:, None] * weights[None, :]).ravel()
        return x, w

    theta, w_theta = composite(0.0, np.pi, panels_theta)
    phi, w_phi = composite(0.0, 2.0 * np.pi, panels_phi)
    sin_t, cos_t = np.sin(theta), np.cos(theta)
    total = 0.0
    for p, wp in zip(phi, w_phi):
        ux = sin_t * np.cos(p)
        uy = sin_t * np.sin(p)
        total += wp * np.dot(w_theta, _pattern_dir(ux, uy, cos_t, cfg) * sin_t)
    return float(total)


def radiated_power(cfg: ArrayConfig, atol: float = 1e-6, max_levels: int = 5) -> float:
    """Sphere integral of the unnormalised pattern ``Ge * Ga``.

    Composite Gauss-Legendre rule whose panel count doubles until two
    successive estimates agree to ``atol``.
    """
    panels = max(16, 4 * cfg.elements_per_side)
    previous = _sphere_integral(cfg, panels, 2 * panels)
    history = [previous]
    for _ in range(max_levels):
        panels *= 2
        current = _sphere_integral(cfg, panels, 2 * panels)
        history.append(current)
        if abs(current - previous) <= atol:
            return current
        previous = current
    raise QuadratureError(
        f"normalisation integral for N={cfg.elements_per_side} did not reach atol={atol}: "
        f"successive estimates {history}"
    )


@lru_cache(maxsize=None)
def _normalization_cached(cfg_key: ArrayConfig) -> float:
    return 1.0 / radiated_power(cfg_key)


def normalization_constant(cfg: ArrayConfig) -> float:
    """Equal-radiated-power constant ``G0(N)``, memoised per pattern."""
    # frequency does not change the pattern; keep it out of the cache key
    return _normalization_cached(replace(cfg, frequency_ghz=0.0))


def total_gain(theta_x, theta_y, cfg: ArrayConfig):
    """Full array gain ``G0 * Ge * Ga`` for a tilt."""
    ux, uy, uz = _direction_from_tilt(theta_x, theta_y)
    return _scalar(normalization_constant(cfg) * _pattern_dir(ux, uy, uz, cfg))


def boresight_gain(cfg: ArrayConfig) -> float:
    return normalization_constant(cfg) * cfg.max_gain_linear


def radial_gain(theta, cfg: ArrayConfig):
    """Radially symmetric gain used by the closed-form outage.

    The x-axis cut of the array factor at polar angle ``theta`` times the
    peak element gain.
    """
    af = _dirichlet_sq(2.0 * np.pi * cfg.element_spacing_x * np.sin(theta), cfg.elements_per_side)
    return _scalar(boresight_gain(cfg) * af)


def staircase_levels(cfg: ArrayConfig, sp: StaircaseParams) -> np.ndarray:
    """Array-factor level of every step, ``j = 1..J K``."""
    angles = sp.breakpoints(cfg.elements_per_side)[1:]
    return _dirichlet_sq(2.0 * np.pi * cfg.element_spacing_x * np.sin(angles), cfg.elements_per_side)


def gain_breakpoint(j: int, cfg: ArrayConfig, sp: StaircaseParams) -> float:
    """Array-factor level of step ``j`` (evaluated at its upper breakpoint)."""
    if not 1 <= j <= sp.total_steps:
        raise ValueError(f"step index {j} outside 1..{sp.total_steps}")
    return float(staircase_levels(cfg, sp)[j - 1])


def staircase_gain(theta, cfg: ArrayConfig, sp: StaircaseParams):
    """Piecewise-constant surrogate of ``radial_gain``; zero past the last lobe."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise ValueError("theta must be >= 0")
    n = cfg.elements_per_side
    step = np.floor(theta * sp.steps_per_lobe * n / 2.0).astype(np.int64)
    levels = np.append(staircase_levels(cfg, sp), 0.0)
    step = np.minimum(step, sp.total_steps)
    return _scalar(boresight_gain(cfg) * levels[step])
