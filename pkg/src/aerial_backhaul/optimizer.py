"""Minimum-relay design search.

The endpoint array sizes depend only on their own link length, so they are
tabulated once per length. The remaining scan covers source length,
destination length and relay array size for increasing relay counts; the
first relay count whose best configuration meets the outage target wins.
All outages come from the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import geometry, outage
from .antenna import StaircaseParams
from .geometry import ChainPlan, RegionProfile
from .outage import RadioConfig
from .vibration import VibrationModel

BRUTE_FORCE_LIMIT = 1_000_000


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class SearchSpace:
    """Design grid. Lengths in km; ``None`` minima fall back to the LoS bounds."""

    ls_max: float
    ld_max: float
    length_step: float = 0.2
    ls_min: float | None = None
    ld_min: float | None = None
    n_u_min: int = 2
    n_u_max: int = 16
    endpoint_n_min: int = 2
    endpoint_n_max: int = 16
    m_max: int = 30

    def __post_init__(self) -> None:
        if not self.length_step > 0:
            raise ConfigurationError("length_step must be > 0")

    def _lengths(self, lo: float, hi: float) -> np.ndarray:
        count = math.floor((hi - lo) / self.length_step + 1e-9) + 1
        if count < 1:
            return np.empty(0)
        return np.round(lo + self.length_step * np.arange(count), 9)

    def _aligned_start(self, bound: float, floor: float | None) -> float:
        lo = bound if floor is None else max(floor, bound)
        # first multiple of the step at or above the bound, never zero
        k = max(math.ceil(lo / self.length_step - 1e-9), 1)
        return k * self.length_step

    def source_lengths(self, region: RegionProfile) -> np.ndarray:
        bound = region.max_obstacle_height / math.sin(region.psi_s_min)
        return self._lengths(self._aligned_start(bound, self.ls_min), self.ls_max)

    def dest_lengths(self, region: RegionProfile) -> np.ndarray:
        bound = region.dest_obstacle_height / math.sin(region.psi_d_min)
        return self._lengths(self._aligned_start(bound, self.ld_min), self.ld_max)

    @property
    def n_u_values(self) -> range:
        return range(self.n_u_min, self.n_u_max + 1)

    @property
    def endpoint_n_values(self) -> range:
        return range(self.endpoint_n_min, self.endpoint_n_max + 1)


@dataclass(frozen=True)
class EndpointTable:
    lengths: np.ndarray
    elevations: np.ndarray
    n: np.ndarray
    outage: np.ndarray
    feasible: np.ndarray


@dataclass(frozen=True)
class DesignSolution:
    relay_count: int
    n_rx_first: int
    n_tx_last: int
    n_inter: int
    source_link_length: float
    dest_link_length: float
    inter_hop_length: float
    source_elevation: float
    dest_elevation: float
    achieved_outage: float
    feasible: bool

    def to_plan(self, radios: RadioConfig) -> ChainPlan:
        return ChainPlan(
            self.relay_count,
            self.source_link_length,
            self.source_elevation,
            self.dest_link_length,
            self.dest_elevation,
            self.n_rx_first,
            self.n_tx_last,
            self.n_inter,
            radios.n_source,
            radios.n_dest,
        )


def _combine(per_hop: np.ndarray, combine: str) -> np.ndarray:
    """Combine hop outages along the last axis."""
    if combine == "approx":
        return np.minimum(per_hop.sum(axis=-1), 1.0)
    if combine == "exact":
        with np.errstate(divide="ignore"):
            return -np.expm1(np.log1p(-per_hop).sum(axis=-1))
    raise ValueError(f"unknown combine rule {combine!r}")


def _endpoint_table(lengths, psi_min, region, radios, model, sp, threshold, target, space, source: bool):
    ground = radios.array(radios.n_source if source else radios.n_dest)
    power = radios.source_power if source else radios.relay_power
    elevations, sizes, outs, oks = [], [], [], []
    for length in lengths:
        psi = geometry.choose_elevation(float(length), psi_min, region.scale_height)
        gain = outage.endpoint_channel_gain(float(length), psi, radios, region.scale_height)
        choice = outage.optimal_endpoint_n(
            gain, ground, power, model, sp, threshold, target, space.endpoint_n_values, radios.array(1), uav_receives=source
        )
        elevations.append(psi)
        sizes.append(choice.n)
        outs.append(choice.outage)
        oks.append(choice.feasible)
    return EndpointTable(
        np.asarray(lengths, dtype=float), np.asarray(elevations), np.asarray(sizes, dtype=int), np.asarray(outs), np.asarray(oks, dtype=bool)
    )


def precompute_endpoint_tables(
    space: SearchSpace,
    region: RegionProfile,
    radios: RadioConfig,
    model: VibrationModel,
    sp: StaircaseParams,
    threshold: float,
    target: float,
) -> tuple[EndpointTable, EndpointTable]:
    """Best endpoint array per grid length, for the source and destination links."""
    src = _endpoint_table(space.source_lengths(region), region.psi_s_min, region, radios, model, sp, threshold, target, space, True)
    dst = _endpoint_table(space.dest_lengths(region), region.psi_d_min, region, radios, model, sp, threshold, target, space, False)
    return src, dst


def _tie_break_order(total, n_u, n_ends, ls, ld, n_first):
    # np.lexsort: last key is primary
    return np.lexsort((n_first, ld, ls, n_ends, n_u, total))


def optimize(
    space: SearchSpace,
    region: RegionProfile,
    radios: RadioConfig,
    model: VibrationModel,
    sp: StaircaseParams,
    threshold: float,
    target: float,
    combine: str = "approx",
    trace: Callable[[dict], None] | None = None,
) -> DesignSolution:
    """Fewest relays meeting ``target``; ties prefer smaller arrays then shorter links.

    ``trace`` receives one dict of equal-length arrays per (M, N_u) scan.
    """
    src, dst = precompute_endpoint_tables(space, region, radios, model, sp, threshold, target)
    n_u_values = list(space.n_u_values)
    if src.lengths.size == 0 or dst.lengths.size == 0 or not n_u_values or space.m_max < 2:
        raise ConfigurationError("search space is empty")

    i, k = np.meshgrid(np.arange(src.lengths.size), np.arange(dst.lengths.size), indexing="ij")
    i, k = i.ravel(), k.ravel()
    ls, psi_s = src.lengths[i], src.elevations[i]
    ld, psi_d = dst.lengths[k], dst.elevations[k]
    h_first = ls * np.sin(psi_s)
    h_last = ld * np.sin(psi_d)
    gap = region.corridor_length - ls * np.cos(psi_s) - ld * np.cos(psi_d)
    ok = (h_first > region.max_obstacle_height) & (gap >= 0) & (np.hypot(np.maximum(gap, 0), h_first - h_last) > 0)
    if not ok.any():
        raise ConfigurationError("no grid point satisfies the corridor geometry")
    i, k, ls, psi_s, ld, psi_d = i[ok], k[ok], ls[ok], psi_s[ok], ld[ok], psi_d[ok]
    h_first, h_last, gap = h_first[ok], h_last[ok], gap[ok]
    p_src, p_dst = src.outage[i], dst.outage[k]
    n_first, n_last = src.n[i], dst.n[k]
    diagonal = np.hypot(gap, h_first - h_last)

    best = None
    for m in range(2, space.m_max + 1):
        li = diagonal / (m - 1)
        heights = geometry.relay_hop_midpoint_heights(h_first, h_last, m)
        scale = radios.relay_power * outage.inter_hop_channel_gain(li[:, None], heights, radios, region.scale_height)
        rows = []
        for n_u in n_u_values:
            if threshold > 0:
                dist = outage._step_distribution(radios.array(n_u), sp, model)
                p_inter = outage._outage_from_margin(threshold / scale, dist, dist)
            else:
                p_inter = np.zeros_like(scale)
            per_hop = np.concatenate([p_src[:, None], p_inter, p_dst[:, None]], axis=1)
            total = _combine(per_hop, combine)
            rows.append(total)
            if trace is not None:
                trace(
                    {
                        "relay_count": np.full(total.size, m),
                        "ls": ls,
                        "ld": ld,
                        "n_rx_first": n_first,
                        "n_tx_last": n_last,
                        "n_inter": np.full(total.size, n_u),
                        "li": li,
                        "outage": total,
                    }
                )
        total = np.concatenate(rows)
        reps = len(n_u_values)
        n_u_col = np.repeat(n_u_values, ls.size)
        order = _tie_break_order(
            total, n_u_col, np.tile(n_first + n_last, reps), np.tile(ls, reps), np.tile(ld, reps), np.tile(n_first, reps)
        )
        idx = order[0]
        j = idx % ls.size
        candidate = DesignSolution(
            relay_count=m,
            n_rx_first=int(n_first[j]),
            n_tx_last=int(n_last[j]),
            n_inter=int(n_u_col[idx]),
            source_link_length=float(ls[j]),
            dest_link_length=float(ld[j]),
            inter_hop_length=float(li[j]),
            source_elevation=float(psi_s[j]),
            dest_elevation=float(psi_d[j]),
            achieved_outage=float(total[idx]),
            feasible=bool(total[idx] < target),
        )
        if candidate.feasible:
            return candidate
        if best is None or candidate.achieved_outage < best.achieved_outage:
            best = candidate
    return best


def brute_force_optimize(
    space: SearchSpace,
    region: RegionProfile,
    radios: RadioConfig,
    model: VibrationModel,
    sp: StaircaseParams,
    threshold: float,
    target: float,
    combine: str = "approx",
) -> DesignSolution:
    """Exhaustive search over every (M, L_s, N_r1, L_d, N_tM, N_u) grid point.

    No endpoint tabulation: every candidate chain is built and evaluated
    hop by hop. Meant as a check on :func:`optimize` for small grids.
    """
    ls_grid = space.source_lengths(region)
    ld_grid = space.dest_lengths(region)
    ends = list(space.endpoint_n_values)
    n_us = list(space.n_u_values)
    ms = list(range(2, space.m_max + 1))
    size = len(ms) * ls_grid.size * ld_grid.size * len(ends) ** 2 * len(n_us)
    if size == 0:
        raise ConfigurationError("search space is empty")
    if size > BRUTE_FORCE_LIMIT:
        raise ConfigurationError(f"grid of {size} points exceeds the brute-force limit {BRUTE_FORCE_LIMIT}")

    def chain_total(plan: ChainPlan) -> float:
        hops = outage.build_chain_hops(plan, region, radios)
        per_hop = np.array([outage.hop_outage(h, model, sp, threshold) for h in hops])
        return float(_combine(per_hop, combine))

    best = None
    best_key = None
    for m in ms:
        m_key = None
        m_best = None
        for ls in ls_grid:
            psi_s = geometry.choose_elevation(float(ls), region.psi_s_min, region.scale_height)
            for ld in ld_grid:
                psi_d = geometry.choose_elevation(float(ld), region.psi_d_min, region.scale_height)
                for n_first in ends:
                    for n_last in ends:
                        for n_u in n_us:
                            plan = ChainPlan(m, float(ls), psi_s, float(ld), psi_d, n_first, n_last, n_u, radios.n_source, radios.n_dest)
                            if geometry.feasibility_check(plan, region):
                                continue
                            total = chain_total(plan)
                            key = (total, n_u, n_first + n_last, float(ls), float(ld), n_first)
                            if m_key is None or key < m_key:
                                m_key = key
                                m_best = DesignSolution(
                                    m,
                                    n_first,
                                    n_last,
                                    n_u,
                                    float(ls),
                                    float(ld),
                                    geometry.inter_hop_length(plan, region),
                                    psi_s,
                                    psi_d,
                                    total,
                                    total < target,
                                )
        if m_best is None:
            continue
        if m_best.feasible:
            return m_best
        if best_key is None or m_key[0] < best_key[0]:
            best_key, best = m_key, m_best
    if best is None:
        raise ConfigurationError("no grid point satisfies the corridor geometry")
    return best

