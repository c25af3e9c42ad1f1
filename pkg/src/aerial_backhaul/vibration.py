"""Platform orientation jitter.

Each tilt axis is zero-mean Gaussian with standard deviation ``sigma_theta``;
the radial error ``sqrt(theta_x^2 + theta_y^2)`` is then Rayleigh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .antenna import StaircaseParams


@dataclass(frozen=True)
class VibrationModel:
    sigma_theta: float  # radians, per axis

    def __post_init__(self) -> None:
        if not self.sigma_theta >= 0:
            raise ValueError("sigma_theta must be >= 0")

    @classmethod
    def from_degrees(cls, sigma_deg: float) -> VibrationModel:
        return cls(math.radians(sigma_deg))


def sample_tilt(model: VibrationModel, rng: np.random.Generator, size=None):
    """Draw ``(theta_x, theta_y)`` tilts; arrays of shape ``size`` if given."""
    theta_x = rng.normal(0.0, 1.0, size) * model.sigma_theta
    theta_y = rng.normal(0.0, 1.0, size) * model.sigma_theta
    return theta_x, theta_y


def radial_misalignment_cdf(theta, model: VibrationModel):
    """Rayleigh CDF ``P(radial tilt <= theta)``."""
    theta = np.asarray(theta, dtype=float)
    if model.sigma_theta == 0:
        out = (theta >= 0).astype(float)
    else:
        out = np.where(theta < 0, 0.0, -np.expm1(-(theta**2) / (2.0 * model.sigma_theta**2)))
    return float(out) if out.ndim == 0 else out


def _mass_below(theta, sigma: float):
    """``P(radial tilt < theta)``; differs from the CDF only when sigma is 0."""
    theta = np.asarray(theta, dtype=float)
    if sigma == 0:
        return (theta > 0).astype(float)
    return -np.expm1(-(theta**2) / (2.0 * sigma**2))


def step_probabilities(n: int, sp: StaircaseParams, model: VibrationModel) -> np.ndarray:
    """Probability that the radial tilt falls in each staircase step.

    Step ``j`` spans ``[2(j-1)/(J N), 2j/(J N))``; the returned array has
    ``J K`` entries and sums to one minus :func:`truncation_mass`.
    """
    edges = sp.breakpoints(n)
    sigma = model.sigma_theta
    if sigma == 0:
        return np.diff(_mass_below(edges, sigma))
    # exp(-a) - exp(-b) = exp(-a) * (1 - exp(-(b - a))) keeps precision in deep tails
    a = edges[:-1] ** 2 / (2.0 * sigma**2)
    b = edges[1:] ** 2 / (2.0 * sigma**2)
    return np.exp(-a) * -np.expm1(-(b - a))


def step_probability(j: int, n: int, sp: StaircaseParams, model: VibrationModel) -> float:
    if not 1 <= j <= sp.total_steps:
        raise ValueError(f"step index {j} outside 1..{sp.total_steps}")
    return float(step_probabilities(n, sp, model)[j - 1])


def truncation_mass(n: int, sp: StaircaseParams, model: VibrationModel) -> float:
    """Probability that the tilt lies beyond the last modelled lobe ``2K/N``."""
    if model.sigma_theta == 0:
        return 0.0
    edge = 2.0 * sp.lobe_count / n
    return math.exp(-(edge**2) / (2.0 * model.sigma_theta**2))
