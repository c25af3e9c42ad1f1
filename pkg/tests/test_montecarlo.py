from __future__ import annotations

import math

import pytest

from aerial_backhaul import montecarlo as mc
from aerial_backhaul import outage as out
from aerial_backhaul.antenna import StaircaseParams
from aerial_backhaul.geometry import ChainPlan, RegionProfile
from aerial_backhaul.montecarlo import SimulationConfig
from aerial_backhaul.outage import RadioConfig
from aerial_backhaul.vibration import VibrationModel

RADIOS = RadioConfig(source_power=0.2)
REGION = RegionProfile(40.0, math.radians(40.0), math.radians(20.0), 2.0, dest_obstacle_height=1.0)
PLAN = ChainPlan(10, 9.6, math.radians(40.0), 6.2, math.radians(20.0), 6, 6, 8, 16, 16)
SIGMA2 = VibrationModel.from_degrees(2.0)
THRESHOLD = float(out.dbm_to_watts(-100.0))


def hop(length=3.0, n=8):
    return out.inter_hop(length, 2.5, n, n, RADIOS, 1.5)


def test_config_validation():
    with pytest.raises(ValueError):
        SimulationConfig(trials=0)
    with pytest.raises(ValueError):
        SimulationConfig(block_size=0)


def test_still_platform_never_fails():
    est = mc.simulate_hop(hop(), VibrationModel(0.0), THRESHOLD, SimulationConfig(trials=5000))
    assert est.outage_estimate == 0.0
    assert est.standard_error == 0.0


def test_threshold_above_boresight_always_fails():
    h = hop()
    est = mc.simulate_hop(h, SIGMA2, out.received_power(h) * 1.01, SimulationConfig(trials=5000))
    assert est.outage_estimate == 1.0
    assert est.outages == 5000


def test_seed_determinism_across_workers():
    cfg = SimulationConfig(trials=50_000, seed=11, block_size=8192)
    a = mc.simulate_hop(hop(4.5), SIGMA2, THRESHOLD, cfg)
    b = mc.simulate_hop(hop(4.5), SIGMA2, THRESHOLD, SimulationConfig(trials=50_000, seed=11, block_size=8192, worker_count_hint=4))
    assert (a.outages, a.outage_estimate, a.standard_error) == (b.outages, b.outage_estimate, b.standard_error)
    c = mc.simulate_hop(hop(4.5), SIGMA2, THRESHOLD, SimulationConfig(trials=50_000, seed=12, block_size=8192))
    assert c.outages != a.outages


def test_standard_error_formula_and_scaling():
    small = mc.simulate_hop(hop(6.0), SIGMA2, THRESHOLD, SimulationConfig(trials=10_000, seed=3))
    large = mc.simulate_hop(hop(6.0), SIGMA2, THRESHOLD, SimulationConfig(trials=1_000_000, seed=3))
    for est in (small, large):
        p = est.outage_estimate
        assert est.standard_error == pytest.approx(math.sqrt(p * (1 - p) / est.trials))
    assert 0.02 < p < 0.98
    assert large.standard_error / small.standard_error == pytest.approx(0.1, rel=0.15)


def test_chain_rejects_infeasible_plan():
    from dataclasses import replace

    bad = replace(PLAN, source_elevation=math.radians(30.0))
    with pytest.raises(mc.InfeasiblePlanError, match="source elevation below mask"):
        mc.simulate_chain(bad, REGION, RADIOS, SIGMA2, THRESHOLD, SimulationConfig(trials=10))


def test_chain_still_platform_with_margin():
    est = mc.simulate_chain(PLAN, REGION, RADIOS, VibrationModel(0.0), 1e-20, SimulationConfig(trials=2000))
    assert est.outage_estimate == 0.0


def test_single_hop_chain_equals_hop():
    cfg = SimulationConfig(trials=40_000, seed=5)
    h = hop(5.0)
    assert mc.simulate_hops([h], SIGMA2, THRESHOLD, cfg).outages == mc.simulate_hop(h, SIGMA2, THRESHOLD, cfg).outages


def test_identical_hops_compose_as_product():
    h = hop(5.0)
    trials = 200_000
    single = mc.simulate_hop(h, SIGMA2, THRESHOLD, SimulationConfig(trials=trials, seed=21))
    chain = mc.simulate_hops([h] * 4, SIGMA2, THRESHOLD, SimulationConfig(trials=trials, seed=22))
    expected = 1 - (1 - single.outage_estimate) ** 4
    # error of the composed single-hop estimate propagates with factor 4 (1-p)^3
    spread = math.hypot(chain.standard_error, 4 * (1 - single.outage_estimate) ** 3 * single.standard_error)
    assert abs(chain.outage_estimate - expected) < 4 * spread


@pytest.fixture(scope="module")
def oracle_point():
    h = out.inter_hop(5.0, 2.5, 8, 8, RADIOS, 1.5)
    est = mc.simulate_hop(h, SIGMA2, THRESHOLD, SimulationConfig(trials=1_000_000, seed=1))
    return h, est


def test_fine_staircase_tracks_oracle(oracle_point):
    h, est = oracle_point
    closed = out.hop_outage(h, SIGMA2, StaircaseParams(400, 4), THRESHOLD)
    assert est.outage_estimate > 1e-3
    assert abs(closed - est.outage_estimate) / est.outage_estimate < 0.25


def test_default_staircase_is_conservative(oracle_point):
    # levels sampled at each step's outer edge understate the gain
    h, est = oracle_point
    assert out.hop_outage(h, SIGMA2, StaircaseParams(10, 4), THRESHOLD) > est.outage_estimate
