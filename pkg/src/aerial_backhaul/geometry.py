"""Corridor geometry and relay placement.

Heights are measured from a common ground datum; source and destination
terminals are taken to sit on it. Relays ``U_1 .. U_M`` lie evenly spaced
on the straight segment joining ``U_1`` and ``U_M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Above this mask angle the endpoint elevation is pinned to the mask.
ELEVATION_PIN_THRESHOLD = math.radians(20.0)


class InfeasibleGeometryError(ValueError):
    pass


@dataclass(frozen=True)
class RegionProfile:
    """Physical description of the deployment corridor (km, radians)."""

    corridor_length: float
    psi_s_min: float
    psi_d_min: float
    max_obstacle_height: float
    scale_height: float = 1.5
    source_height: float = 0.0
    dest_height: float = 0.0
    source_obstacle_height: float = 0.0
    dest_obstacle_height: float = 0.0
    endpoint_height_difference: float = 0.0

    def __post_init__(self) -> None:
        if not self.corridor_length > 0:
            raise ValueError("corridor_length must be > 0")
        for name in ("psi_s_min", "psi_d_min"):
            if not 0 < getattr(self, name) < math.pi / 2:
                raise ValueError(f"{name} must lie in (0, pi/2)")
        heights = (
            self.max_obstacle_height,
            self.source_height,
            self.dest_height,
            self.source_obstacle_height,
            self.dest_obstacle_height,
        )
        if any(h < 0 for h in heights):
            raise ValueError("heights must be >= 0")
        if not self.scale_height > 0:
            raise ValueError("scale_height must be > 0")


@dataclass(frozen=True)
class ChainPlan:
    """A candidate relay chain.

    Array sizes are elements per side: ``n_rx_first`` on ``U_1`` facing the
    source, ``n_tx_last`` on ``U_M`` facing the destination, ``n_inter`` on
    every relay-to-relay antenna, and the two ground arrays.
    """

    relay_count: int
    source_link_length: float
    source_elevation: float
    dest_link_length: float
    dest_elevation: float
    n_rx_first: int
    n_tx_last: int
    n_inter: int
    n_source: int
    n_dest: int


def effective_horizontal_length(length, psi):
    return length * np.cos(psi)


def endpoint_heights(plan: ChainPlan) -> tuple[float, float]:
    """Heights of ``U_1`` and ``U_M`` above the datum."""
    return (
        plan.source_link_length * math.sin(plan.source_elevation),
        plan.dest_link_length * math.sin(plan.dest_elevation),
    )


def _horizontal_gap(region: RegionProfile, ls, psi_s, ld, psi_d):
    return region.corridor_length - effective_horizontal_length(ls, psi_s) - effective_horizontal_length(ld, psi_d)


def inter_hop_length(plan: ChainPlan, region: RegionProfile) -> float:
    """Equal relay-to-relay distance for ``M - 1`` hops."""
    if plan.relay_count < 2:
        raise ValueError("relay_count must be >= 2")
    gap = _horizontal_gap(
        region, plan.source_link_length, plan.source_elevation, plan.dest_link_length, plan.dest_elevation
    )
    if gap < 0:
        raise InfeasibleGeometryError(
            f"endpoint links cover {region.corridor_length - gap:.3f} km of a "
            f"{region.corridor_length:.3f} km corridor"
        )
    h1, hm = endpoint_heights(plan)
    return math.hypot(gap, h1 - hm) / (plan.relay_count - 1)


def relay_hop_midpoint_heights(h_first, h_last, relay_count: int) -> np.ndarray:
    """Mid-hop heights of the ``M - 1`` relay hops, from ``U_1`` outwards.

    ``h_first`` and ``h_last`` may be arrays; hops run along the last axis.
    """
    frac = (np.arange(relay_count - 1) + 0.5) / (relay_count - 1)
    h_first = np.asarray(h_first, dtype=float)[..., None]
    h_last = np.asarray(h_last, dtype=float)[..., None]
    return h_first + (h_last - h_first) * frac


def scale_height_elevation_window(length: float, scale_height: float):
    """Elevation interval keeping the endpoint relay between one and two scale heights.

    Returns ``None`` when the link is too short to climb one scale height.
    """
    if length <= scale_height:
        return None
    return math.asin(scale_height / length), math.asin(min(2.0 * scale_height / length, 1.0))


def choose_elevation(length: float, psi_min: float, scale_height: float) -> float:
    """Operating elevation for an endpoint link of ``length`` km.

    Masks steeper than 20 degrees pin the elevation to the mask. Otherwise
    use the middle of the scale-height window, clipped to ``[psi_min, pi/2)``.
    """
    if psi_min > ELEVATION_PIN_THRESHOLD:
        return psi_min
    window = scale_height_elevation_window(length, scale_height)
    if window is None:
        return psi_min
    mid = 0.5 * (window[0] + window[1])
    return min(max(mid, psi_min), math.nextafter(math.pi / 2, 0.0))


def feasibility_check(plan: ChainPlan, region: RegionProfile) -> list[str]:
    """Every violated constraint, by name; empty when the plan is valid."""
    violations: list[str] = []
    try:
        if plan.relay_count < 2:
            violations.append("relay count below 2")
        if not plan.source_link_length > 0:
            violations.append("source link length not positive")
        if not plan.dest_link_length > 0:
            violations.append("destination link length not positive")
        if plan.source_elevation < region.psi_s_min:
            violations.append("source elevation below mask")
        if plan.source_elevation >= math.pi / 2:
            violations.append("source elevation not below vertical")
        if plan.dest_elevation < region.psi_d_min:
            violations.append("destination elevation below mask")
        if plan.dest_elevation >= math.pi / 2:
            violations.append("destination elevation not below vertical")
        for name in ("n_rx_first", "n_tx_last", "n_inter", "n_source", "n_dest"):
            if getattr(plan, name) < 1:
                violations.append(f"{name} below one element")
        h1, _ = endpoint_heights(plan)
        if h1 <= region.max_obstacle_height:
            violations.append("first relay below highest obstacle")
        gap = _horizontal_gap(
            region, plan.source_link_length, plan.source_elevation, plan.dest_link_length, plan.dest_elevation
        )
        if gap < 0:
            violations.append("endpoint links longer than corridor")
        elif plan.relay_count >= 2 and inter_hop_length(plan, region) <= 0:
            violations.append("inter-relay hop length not positive")
    except (TypeError, ValueError, AttributeError) as exc:
        violations.append(f"malformed plan: {exc}")
    return violations
