"""Received power and outage probability of decode-and-forward relay chains.

Closed-form hop outage replaces each vibrating antenna's gain by its
staircase surrogate and the radial tilt by its Rayleigh law, so a hop's
outage is a finite sum of step probabilities times an indicator of the
step's received power falling below the threshold. Tilt mass beyond the
last modelled lobe is counted as outage.

Powers are in watts. Outage means received power strictly below the
threshold.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import antenna, atmosphere, geometry
from .antenna import ArrayConfig, ElementPattern, StaircaseParams
from .geometry import ChainPlan, RegionProfile
from .vibration import VibrationModel, step_probabilities, truncation_mass

BOLTZMANN = 1.380649e-23


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(watts):
    return 10.0 * np.log10(np.asarray(watts, dtype=float)) + 30.0


def threshold_from_snr(snr_db: float, bandwidth_hz: float, noise_figure_db: float, temperature_k: float = 290.0) -> float:
    """Receiver sensitivity ``k T B F SNR`` in watts."""
    noise = BOLTZMANN * temperature_k * bandwidth_hz * 10.0 ** (noise_figure_db / 10.0)
    return noise * 10.0 ** (snr_db / 10.0)


class VibratingEnds(enum.Enum):
    TX_ONLY = "tx"
    RX_ONLY = "rx"
    BOTH = "both"


@dataclass(frozen=True)
class HopSpec:
    """One link. Non-vibrating (ground) ends are held at boresight."""

    transmit_power: float
    channel_gain: float
    tx_array: ArrayConfig
    rx_array: ArrayConfig
    vibrating: VibratingEnds

    def __post_init__(self) -> None:
        if not self.transmit_power > 0:
            raise ValueError("transmit_power must be > 0")
        if not 0 < self.channel_gain <= 1:
            raise ValueError("channel_gain must lie in (0, 1]")

    @property
    def tx_vibrates(self) -> bool:
        return self.vibrating is not VibratingEnds.RX_ONLY

    @property
    def rx_vibrates(self) -> bool:
        return self.vibrating is not VibratingEnds.TX_ONLY

    def vibrating_arrays(self) -> list[ArrayConfig]:
        out = []
        if self.tx_vibrates:
            out.append(self.tx_array)
        if self.rx_vibrates:
            out.append(self.rx_array)
        return out

    def fixed_scale(self) -> float:
        """``P_t h_L`` times the boresight gain of every stabilised end."""
        scale = self.transmit_power * self.channel_gain
        if not self.tx_vibrates:
            scale *= antenna.boresight_gain(self.tx_array)
        if not self.rx_vibrates:
            scale *= antenna.boresight_gain(self.rx_array)
        return scale


@dataclass(frozen=True)
class OutageReport:
    per_hop: tuple[float, ...]
    end_to_end_exact: float
    end_to_end_approx: float


def received_power(hop: HopSpec, tx_tilt: float = 0.0, rx_tilt: float = 0.0):
    """Received power for radial tilts of the two ends.

    Vibrating ends use the radially symmetric gain; stabilised ends ignore
    their tilt argument.
    """
    g_tx = antenna.radial_gain(tx_tilt, hop.tx_array) if hop.tx_vibrates else antenna.boresight_gain(hop.tx_array)
    g_rx = antenna.radial_gain(rx_tilt, hop.rx_array) if hop.rx_vibrates else antenna.boresight_gain(hop.rx_array)
    return hop.transmit_power * hop.channel_gain * g_tx * g_rx


@dataclass(frozen=True)
class _StepDistribution:
    """Staircase gain of one vibrating antenna as a discrete distribution."""

    gains: np.ndarray  # per step, step order
    weights: np.ndarray
    sorted_gains: np.ndarray
    cumulative: np.ndarray  # cumulative[k] = weight of the k smallest gains
    tail: float

    def mass_below(self, x):
        """Weight of modelled steps whose gain is strictly below ``x``."""
        return self.cumulative[np.searchsorted(self.sorted_gains, x, side="left")]


@lru_cache(maxsize=4096)
def _step_distribution(cfg: ArrayConfig, sp: StaircaseParams, model: VibrationModel) -> _StepDistribution:
    n = cfg.elements_per_side
    gains = antenna.boresight_gain(cfg) * antenna.staircase_levels(cfg, sp)
    weights = step_probabilities(n, sp, model)
    order = np.argsort(gains, kind="stable")
    cumulative = np.concatenate(([0.0], np.cumsum(weights[order])))
    return _StepDistribution(gains, weights, gains[order], cumulative, truncation_mass(n, sp, model))


def _outage_from_margin(margin, first: _StepDistribution, second: _StepDistribution | None = None):
    """Outage for ``margin = threshold / fixed_scale`` (array friendly, margin > 0)."""
    margin = np.asarray(margin, dtype=float)
    if second is None:
        out = first.mass_below(margin) + first.tail
    else:
        with np.errstate(divide="ignore"):
            ratio = margin[..., None] / first.gains
        inner = second.mass_below(ratio) + second.tail
        out = inner @ first.weights + first.tail
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _closed_form(hop: HopSpec, model: VibrationModel, sp: StaircaseParams, threshold: float) -> float:
    if threshold <= 0:
        return 0.0
    dists = [_step_distribution(cfg, sp, model) for cfg in hop.vibrating_arrays()]
    return _outage_from_margin(threshold / hop.fixed_scale(), *dists)


def hop_outage_single_vibrating(hop: HopSpec, model: VibrationModel, sp: StaircaseParams, threshold: float) -> float:
    """Closed-form outage of a ground-to-UAV or UAV-to-ground hop."""
    if hop.vibrating is VibratingEnds.BOTH:
        raise ValueError("hop has two vibrating ends")
    return _closed_form(hop, model, sp, threshold)


def hop_outage_double_vibrating(hop: HopSpec, model: VibrationModel, sp: StaircaseParams, threshold: float) -> float:
    """Closed-form outage of a UAV-to-UAV hop (double sum over both staircases)."""
    if hop.vibrating is not VibratingEnds.BOTH:
        raise ValueError("hop needs two vibrating ends")
    return _closed_form(hop, model, sp, threshold)


def hop_outage(hop: HopSpec, model: VibrationModel, sp: StaircaseParams, threshold: float) -> float:
    return _closed_form(hop, model, sp, threshold)


def end_to_end_exact(per_hop: Sequence[float]) -> float:
    """``1 - prod(1 - p)``: any hop in outage breaks the chain."""
    p = np.asarray(per_hop, dtype=float)
    if p.size == 0:
        return 0.0
    with np.errstate(divide="ignore"):
        return float(-np.expm1(np.sum(np.log1p(-p))))


def end_to_end_approx(per_hop: Sequence[float]) -> float:
    """Union bound ``min(sum p, 1)``."""
    return float(min(np.sum(np.asarray(per_hop, dtype=float)), 1.0))


# --- endpoint array sizing -------------------------------------------------


@dataclass(frozen=True)
class EndpointChoice:
    """Array size chosen for an endpoint relay antenna.

    ``margin`` is the received power of the last main-lobe step still at or
    above the threshold, minus the threshold (NaN when even boresight fails).
    """

    n: int
    outage: float
    feasible: bool
    margin: float


def endpoint_step_powers(hop: HopSpec, sp: StaircaseParams, model: VibrationModel) -> np.ndarray:
    """Received power at every staircase step of the single vibrating end."""
    (cfg,) = hop.vibrating_arrays()
    return hop.fixed_scale() * _step_distribution(cfg, sp, model).gains


def _last_passing_margin(powers: np.ndarray, threshold: float) -> float:
    passing = powers >= threshold
    if not passing[0]:
        return math.nan
    last = len(powers) - 1 if passing.all() else int(np.argmin(passing)) - 1
    return float(powers[last] - threshold)


def optimal_endpoint_n(
    channel_gain: float,
    ground_array: ArrayConfig,
    transmit_power: float,
    model: VibrationModel,
    sp: StaircaseParams,
    threshold: float,
    target: float,
    n_range: Sequence[int],
    uav_array: ArrayConfig,
    uav_receives: bool = True,
) -> EndpointChoice:
    """Array size for the vibrating end of an endpoint hop.

    Picks the size with the lowest staircase outage, then the tightest
    margin at the last passing step, then the smaller array. The choice is
    feasible when its outage is below ``target``.
    """
    sizes = list(n_range)
    if not sizes:
        raise ValueError("n_range is empty")
    if threshold <= 0:
        return EndpointChoice(int(min(sizes)), 0.0, 0.0 < target, math.inf)
    best_key = None
    best = None
    for n in sizes:
        uav = uav_array.with_size(n)
        if uav_receives:
            hop = HopSpec(transmit_power, channel_gain, ground_array, uav, VibratingEnds.RX_ONLY)
        else:
            hop = HopSpec(transmit_power, channel_gain, uav, ground_array, VibratingEnds.TX_ONLY)
        p = hop_outage(hop, model, sp, threshold)
        margin = _last_passing_margin(endpoint_step_powers(hop, sp, model), threshold)
        key = (p, abs(margin) if math.isfinite(margin) else math.inf, n)
        if best_key is None or key < best_key:
            best_key = key
            best = EndpointChoice(int(n), p, p < target, margin)
    return best


# --- chains ----------------------------------------------------------------


@dataclass(frozen=True)
class RadioConfig:
    """Transmit powers (W), ground arrays and the shared array design."""

    frequency_ghz: float = 70.0
    source_power: float = 1.0
    relay_power: float = 0.2
    n_source: int = 16
    n_dest: int = 16
    element_max_gain_db: float = 8.0
    element_spacing: float = 0.5
    element: ElementPattern = field(default_factory=ElementPattern)
    water_vapor_density: float = atmosphere.DEFAULT_WATER_VAPOR_DENSITY

    def array(self, n: int) -> ArrayConfig:
        return ArrayConfig(
            int(n),
            element_spacing_x=self.element_spacing,
            element_spacing_y=self.element_spacing,
            element_max_gain_db=self.element_max_gain_db,
            frequency_ghz=self.frequency_ghz,
            element=self.element,
        )

    def atmosphere(self, scale_height: float) -> atmosphere.Atmosphere:
        return atmosphere.Atmosphere(self.water_vapor_density, scale_height)


def endpoint_channel_gain(length: float, elevation: float, radios: RadioConfig, scale_height: float) -> float:
    path = atmosphere.PathGeometry.slant(length, elevation)
    return atmosphere.channel_gain(radios.frequency_ghz, radios.atmosphere(scale_height), path)


def inter_hop_channel_gain(length, height, radios: RadioConfig, scale_height: float):
    loss = atmosphere.horizontal_loss_db(radios.frequency_ghz, radios.atmosphere(scale_height), length, height)
    return atmosphere.db_to_linear(loss)


def inter_hop(length: float, height: float, n_tx: int, n_rx: int, radios: RadioConfig, scale_height: float) -> HopSpec:
    """A horizontal UAV-to-UAV hop at ``height`` km."""
    gain = float(inter_hop_channel_gain(length, height, radios, scale_height))
    return HopSpec(radios.relay_power, gain, radios.array(n_tx), radios.array(n_rx), VibratingEnds.BOTH)


def build_chain_hops(plan: ChainPlan, region: RegionProfile, radios: RadioConfig) -> list[HopSpec]:
    """Source hop, ``M - 1`` relay hops, destination hop."""
    li = geometry.inter_hop_length(plan, region)
    h1, hm = geometry.endpoint_heights(plan)
    hs = region.scale_height
    hops = [
        HopSpec(
            radios.source_power,
            endpoint_channel_gain(plan.source_link_length, plan.source_elevation, radios, hs),
            radios.array(plan.n_source),
            radios.array(plan.n_rx_first),
            VibratingEnds.RX_ONLY,
        )
    ]
    for height in geometry.relay_hop_midpoint_heights(h1, hm, plan.relay_count):
        hops.append(inter_hop(li, float(height), plan.n_inter, plan.n_inter, radios, hs))
    hops.append(
        HopSpec(
            radios.relay_power,
            endpoint_channel_gain(plan.dest_link_length, plan.dest_elevation, radios, hs),
            radios.array(plan.n_tx_last),
            radios.array(plan.n_dest),
            VibratingEnds.TX_ONLY,
        )
    )
    return hops


def chain_outage(
    plan: ChainPlan,
    region: RegionProfile,
    radios: RadioConfig,
    model: VibrationModel,
    sp: StaircaseParams,
    threshold: float,
) -> OutageReport:
    per_hop = tuple(hop_outage(h, model, sp, threshold) for h in build_chain_hops(plan, region, radios))
    return OutageReport(per_hop, end_to_end_exact(per_hop), end_to_end_approx(per_hop))
