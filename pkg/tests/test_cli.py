from __future__ import annotations

import csv
import io
import math
from dataclasses import replace

import pytest
import yaml

from aerial_backhaul import atmosphere
from aerial_backhaul.cli import EXIT_INFEASIBLE, EXIT_IO, EXIT_OK, EXIT_USAGE, main
from aerial_backhaul.config import default_config


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


def parse(text: str):
    lines = text.splitlines()
    assert lines[0].startswith("# aerial-backhaul ")
    return lines[0], list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def small_config(tmp_path, **top) -> str:
    data = default_config().to_dict()
    data["region"].update(corridor_length_km=10.0, max_obstacle_height_km=0.5, dest_obstacle_height_km=0.3)
    data["search"].update(ls_max_km=3.0, ld_max_km=3.0, length_step_km=1.0, n_u_min=4, n_u_max=6, endpoint_n_min=4, endpoint_n_max=6, m_max=6)
    data["simulation"].update(trials=20_000)
    for key, value in top.items():
        if isinstance(value, dict):
            data.setdefault(key, {}).update(value)
        else:
            data[key] = value
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(data))
    return str(path)


def test_attenuation_sweep_has_peak(capsys):
    code, cap = run(["attenuation"], capsys)
    assert code == EXIT_OK
    _, rows = parse(cap.out)
    assert len(rows) == 61
    freqs = [float(r["fc_ghz"]) for r in rows]
    assert freqs == sorted(freqs)
    assert max(float(r["oxygen_db_km"]) for r in rows) > 15.0


def test_attenuation_single_frequency(capsys):
    code, cap = run(["attenuation", "--fc", "70"], capsys)
    assert code == EXIT_OK
    _, rows = parse(cap.out)
    assert len(rows) == 1
    expected = atmosphere.oxygen_specific_attenuation(70.0) + atmosphere.water_specific_attenuation(70.0)
    assert float(rows[0]["total_db_km"]) == pytest.approx(expected, rel=1e-15)
    assert float(rows[0]["oxygen_db_km"]) == pytest.approx(0.404, abs=1e-3)


def test_attenuation_empty_sweep(capsys):
    code, cap = run(["attenuation", "--fc-start", "80", "--fc-stop", "50"], capsys)
    assert code == EXIT_USAGE
    assert "empty sweep" in cap.err


@pytest.mark.parametrize("argv", [["attenuation", "--fc", "abc"], ["attenuation", "--bogus"], ["nope"], []])
def test_bad_arguments(argv, capsys):
    assert run(argv, capsys)[0] == EXIT_USAGE


def test_csv_metadata_line(capsys):
    _, cap = run(["attenuation", "--fc", "60", "--seed", "42"], capsys)
    meta, _ = parse(cap.out)
    cfg = default_config()
    effective = replace(cfg, simulation=replace(cfg.simulation, seed=42))
    assert f"config_hash={effective.digest()}" in meta
    assert "seed=42" in meta


def test_pattern(capsys):
    code, cap = run(["pattern", "--n", "8", "--theta-deg", "0:10:1"], capsys)
    assert code == EXIT_OK
    _, rows = parse(cap.out)
    assert len(rows) == 11
    gains = [float(r["gain"]) for r in rows]
    assert gains[0] == max(gains)


def test_outage_sweep(capsys):
    code, cap = run(["outage", "--lengths-km", "1:3:0.5", "--n", "4,8", "--sigma-deg", "1.5,2"], capsys)
    assert code == EXIT_OK
    _, rows = parse(cap.out)
    assert len(rows) == 5 * 2 * 2
    assert all(0.0 <= float(r["outage"]) <= 1.0 for r in rows)


def test_outage_zero_length_sweep(capsys):
    assert run(["outage", "--lengths-km", "3:1:0.5"], capsys)[0] == EXIT_USAGE


def test_outage_without_plan_is_usage_error(capsys):
    assert run(["outage"], capsys)[0] == EXIT_USAGE


def test_outage_plan(tmp_path, capsys):
    plan = {
        "relay_count": 3,
        "source_link_length_km": 2.0,
        "source_elevation_deg": 40.0,
        "dest_link_length_km": 2.0,
        "dest_elevation_deg": 20.0,
        "n_rx_first": 6,
        "n_tx_last": 6,
        "n_inter": 6,
    }
    code, cap = run(["outage", "--config", small_config(tmp_path, plan=plan)], capsys)
    assert code == EXIT_OK
    _, rows = parse(cap.out)
    roles = [r["role"] for r in rows]
    assert roles == ["source", "inter", "inter", "dest", "end_to_end_exact", "end_to_end_approx"]


def test_outage_infeasible_plan(tmp_path, capsys):
    plan = {
        "relay_count": 3,
        "source_link_length_km": 0.5,
        "source_elevation_deg": 40.0,
        "dest_link_length_km": 2.0,
        "dest_elevation_deg": 20.0,
        "n_rx_first": 6,
        "n_tx_last": 6,
        "n_inter": 6,
    }
    code, cap = run(["outage", "--config", small_config(tmp_path, plan=plan)], capsys)
    assert code == EXIT_INFEASIBLE
    assert "infeasible" in cap.err


def _estimate(cap):
    _, rows = parse(cap.out)
    row = rows[0]
    row.pop("wall_time_s")
    return row


def test_simulate_seed_repeatable(capsys):
    argv = ["simulate", "--length-km", "5", "--trials", "50000", "--seed", "9"]
    first = _estimate(run(argv, capsys)[1])
    second = _estimate(run(argv + ["--workers", "3"], capsys)[1])
    assert first == second
    assert int(first["trials"]) == 50_000
    assert float(first["standard_error"]) > 0


def test_simulate_compare_column(capsys):
    code, cap = run(["simulate", "--length-km", "5", "--trials", "20000", "--compare"], capsys)
    assert code == EXIT_OK
    _, rows = parse(cap.out)
    assert 0.0 < float(rows[0]["closed_form"]) < 1.0


def test_optimize_target_one(tmp_path, capsys):
    code, cap = run(["optimize", "--config", small_config(tmp_path, target_outage=1.0)], capsys)
    assert code == EXIT_OK
    _, rows = parse(cap.out)
    assert rows[0]["relay_count"] == "2"
    assert rows[0]["feasible"] == "True"


def test_optimize_infeasible_exit(tmp_path, capsys):
    code, cap = run(["optimize", "--config", small_config(tmp_path, threshold_dbm=-40.0)], capsys)
    assert code == EXIT_INFEASIBLE
    _, rows = parse(cap.out)
    assert rows[0]["feasible"] == "False"


def test_optimize_empty_grid(tmp_path, capsys):
    code, _ = run(["optimize", "--config", small_config(tmp_path, search={"ls_max_km": 0.2})], capsys)
    assert code == EXIT_USAGE


def test_optimize_trace(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    code, cap = run(["optimize", "--config", small_config(tmp_path, target_outage=1.0), "--trace", str(trace)], capsys)
    assert code == EXIT_OK
    _, rows = parse(trace.read_text())
    assert rows and set(rows[0]) >= {"relay_count", "ls", "ld", "n_inter", "outage"}


def test_missing_config_file(capsys):
    assert run(["attenuation", "--config", "/nonexistent/run.yaml"], capsys)[0] == EXIT_IO


@pytest.mark.parametrize(
    "producer, kind",
    [
        (["outage", "--lengths-km", "1:3:0.5", "--n", "4,8"], "outage"),
        (["attenuation", "--fc-step", "2"], "attenuation"),
        (["pattern", "--theta-deg", "0:10:0.5"], "pattern"),
    ],
)
def test_plot_creates_svg(tmp_path, capsys, producer, kind):
    data = tmp_path / "data.csv"
    svg = tmp_path / "plot.svg"
    assert run(producer + ["--out", str(data)], capsys)[0] == EXIT_OK
    assert run(["plot", "--csv", str(data), "--kind", kind, "--out", str(svg)], capsys)[0] == EXIT_OK
    assert svg.read_text().lstrip().startswith("<?xml")


def test_plot_wrong_kind(tmp_path, capsys):
    data = tmp_path / "data.csv"
    run(["attenuation", "--fc", "60", "--out", str(data)], capsys)
    assert run(["plot", "--csv", str(data), "--kind", "outage", "--out", str(tmp_path / "x.svg")], capsys)[0] == EXIT_USAGE


def test_plot_missing_input(tmp_path, capsys):
    missing = tmp_path / "absent.csv"
    code, cap = run(["plot", "--csv", str(missing), "--kind", "outage", "--out", str(tmp_path / "x.svg")], capsys)
    assert code == EXIT_IO
    assert str(missing) in cap.err


def test_module_entry_point():
    import subprocess
    import sys

    done = subprocess.run([sys.executable, "-m", "aerial_backhaul", "attenuation", "--fc", "60"], capture_output=True, text=True)
    assert done.returncode == 0
    assert "fc_ghz" in done.stdout
    assert math.isfinite(float(done.stdout.splitlines()[-1].split(",")[1]))
