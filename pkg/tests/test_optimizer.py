from __future__ import annotations

import dataclasses
import math

import pytest

from _instances import random_instance
from aerial_backhaul import optimizer as opt
from aerial_backhaul import outage as out
from aerial_backhaul.vibration import VibrationModel


@pytest.mark.parametrize("seed", range(30))
def test_optimize_matches_brute_force(seed):
    args = random_instance(seed)
    fast = opt.optimize(*args)
    slow = opt.brute_force_optimize(*args)
    assert fast.relay_count == slow.relay_count
    assert fast.feasible == slow.feasible
    assert fast.achieved_outage == pytest.approx(slow.achieved_outage, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("seed", range(5))
def test_optimize_matches_brute_force_exact_combination(seed):
    args = random_instance(100 + seed)
    fast = opt.optimize(*args, combine="exact")
    slow = opt.brute_force_optimize(*args, combine="exact")
    assert (fast.relay_count, fast.feasible) == (slow.relay_count, slow.feasible)
    assert fast.achieved_outage == pytest.approx(slow.achieved_outage, rel=1e-12, abs=1e-300)


def test_random_instances_cover_both_verdicts():
    verdicts = {opt.optimize(*random_instance(seed)).feasible for seed in range(30)}
    assert verdicts == {True, False}


def test_feasible_solution_meets_target():
    for seed in range(30):
        args = random_instance(seed)
        sol = opt.optimize(*args)
        assert sol.feasible == (sol.achieved_outage < args[-1])


def test_target_one_gives_two_relays():
    space, region, radios, model, sp, threshold, _ = random_instance(5)
    sol = opt.optimize(space, region, radios, model, sp, threshold, 1.0)
    # clamped approximate sums never reach 1 unless a hop is certain to fail
    assert sol.relay_count == 2


def test_single_point_grid():
    space, region, radios, model, sp, threshold, target = random_instance(1)
    lo_s = space.source_lengths(region)[0]
    lo_d = space.dest_lengths(region)[0]
    tiny = dataclasses.replace(
        space, ls_max=lo_s, ld_max=lo_d, n_u_max=space.n_u_min, endpoint_n_max=space.endpoint_n_min, m_max=2
    )
    fast = opt.optimize(tiny, region, radios, model, sp, threshold, target)
    slow = opt.brute_force_optimize(tiny, region, radios, model, sp, threshold, target)
    assert fast.relay_count == slow.relay_count == 2
    assert fast.feasible == slow.feasible
    assert fast.achieved_outage == pytest.approx(slow.achieved_outage, rel=1e-12)


def test_unreachable_target_infeasible_on_both_paths():
    space, region, radios, model, sp, _, target = random_instance(3)
    threshold = float(out.dbm_to_watts(-40.0))
    fast = opt.optimize(space, region, radios, model, sp, threshold, target)
    slow = opt.brute_force_optimize(space, region, radios, model, sp, threshold, target)
    assert not fast.feasible and not slow.feasible


def test_empty_grid_raises():
    space, region, radios, model, sp, threshold, target = random_instance(0)
    empty = dataclasses.replace(space, ls_max=0.1)
    with pytest.raises(opt.ConfigurationError):
        opt.optimize(empty, region, radios, model, sp, threshold, target)
    with pytest.raises(opt.ConfigurationError):
        opt.brute_force_optimize(empty, region, radios, model, sp, threshold, target)


def test_nonpositive_step_rejected():
    with pytest.raises(opt.ConfigurationError):
        opt.SearchSpace(10.0, 10.0, length_step=0.0)


def test_brute_force_refuses_large_grid():
    space, *rest = random_instance(0)
    big = dataclasses.replace(space, ls_max=60.0, ld_max=60.0, length_step=0.05, n_u_max=16, m_max=30)
    with pytest.raises(opt.ConfigurationError, match="brute-force limit"):
        opt.brute_force_optimize(big, *rest)


def test_search_lower_bounds_follow_line_of_sight():
    space, region, *_ = random_instance(2)
    ls = space.source_lengths(region)
    ld = space.dest_lengths(region)
    assert ls[0] >= region.max_obstacle_height / math.sin(region.psi_s_min) - 1e-9
    assert ld[0] >= region.dest_obstacle_height / math.sin(region.psi_d_min) - 1e-9
    assert ls[0] > 0 and ld[0] > 0


def test_endpoint_tables_zero_threshold():
    space, region, radios, model, sp, _, target = random_instance(4)
    src, dst = opt.precompute_endpoint_tables(space, region, radios, model, sp, 0.0, target)
    assert set(src.n) == {space.endpoint_n_min}
    assert set(dst.n) == {space.endpoint_n_min}
    assert src.feasible.all() and dst.feasible.all()


def test_deterministic():
    args = random_instance(13)
    assert opt.optimize(*args) == opt.optimize(*args)


def test_trace_records_every_scan():
    args = random_instance(0)
    rows = []
    sol = opt.optimize(*args, trace=rows.append)
    space = args[0]
    assert len(rows) == (sol.relay_count - 1) * len(space.n_u_values)
    assert min(min(r["outage"]) for r in rows if r["relay_count"][0] == sol.relay_count) == pytest.approx(sol.achieved_outage)


def test_solution_to_plan_round_trip():
    space, region, radios, model, sp, threshold, target = random_instance(13)
    sol = opt.optimize(space, region, radios, model, sp, threshold, target)
    report = out.chain_outage(sol.to_plan(radios), region, radios, model, sp, threshold)
    assert report.end_to_end_approx == pytest.approx(sol.achieved_outage, rel=1e-10)


def _relays(seed, **changes):
    space, region, radios, model, sp, threshold, target = random_instance(seed)
    if "sigma_deg" in changes:
        model = VibrationModel.from_degrees(changes["sigma_deg"])
    if "power" in changes:
        radios = dataclasses.replace(radios, source_power=changes["power"], relay_power=changes["power"])
    target = changes.get("target", target)
    sol = opt.optimize(space, region, radios, model, sp, threshold, target)
    return sol.relay_count if sol.feasible else math.inf


@pytest.mark.parametrize("seed", [1, 2, 4])
def test_relays_non_increasing_as_vibration_shrinks(seed):
    counts = [_relays(seed, sigma_deg=s) for s in (3.0, 2.0, 1.0)]
    assert counts == sorted(counts, reverse=True)


@pytest.mark.parametrize("seed", [1, 2, 4])
def test_relays_non_increasing_with_power(seed):
    counts = [_relays(seed, power=p) for p in (0.1, 0.2, 0.5)]
    assert counts == sorted(counts, reverse=True)


@pytest.mark.parametrize("seed", [2, 4, 9])
def test_relays_non_increasing_as_target_loosens(seed):
    counts = [_relays(seed, target=t) for t in (1e-5, 1e-3, 1e-1)]
    assert counts == sorted(counts, reverse=True)
