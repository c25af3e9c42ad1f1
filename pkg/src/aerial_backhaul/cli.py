"""Command-line entry point.

Subcommands write CSV to ``--out`` (default stdout) with a header row and
a leading ``#`` comment carrying the config hash and seed.

Exit codes: 0 success, 2 usage or config error, 3 infeasible design or
plan, 4 numerical failure, 5 file I/O error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import atmosphere, antenna, geometry, montecarlo, optimizer, outage
from .config import ConfigError, RunConfig, default_config, load_config
from .vibration import VibrationModel

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERIC = 4
EXIT_IO = 5


class UsageError(Exception):
    pass


class Infeasible(Exception):
    pass


# --- output ------------------------------------------------------------------


@contextlib.contextmanager
def _open_out(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _write_csv(args, cfg: RunConfig, header, rows, extra_meta: str = "") -> None:
    with _open_out(args.out) as fh:
        meta = f"# aerial-backhaul {args.command} config_hash={cfg.digest()} seed={cfg.simulation.seed}"
        fh.write(meta + (" " + extra_meta if extra_meta else "") + "\r\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _sweep(text: str) -> np.ndarray:
    """``START:STOP:STEP`` inclusive of STOP; a bare number is one point."""
    parts = text.split(":")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad sweep {text!r}") from None
    if len(values) == 1:
        return np.array(values)
    if len(values) != 3:
        raise UsageError(f"sweep must be START:STOP:STEP, got {text!r}")
    start, stop, step = values
    if not step > 0 or stop < start:
        raise UsageError(f"empty sweep {text!r}")
    count = math.floor((stop - start) / step + 1e-9) + 1
    return np.round(start + step * np.arange(count), 9)


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else default_config()
    sim = cfg.simulation
    if getattr(args, "seed", None) is not None:
        sim = replace(sim, seed=args.seed)
    if getattr(args, "trials", None) is not None:
        sim = replace(sim, trials=args.trials)
    if getattr(args, "workers", None) is not None:
        sim = replace(sim, worker_count_hint=args.workers)
    return replace(cfg, simulation=sim)


# --- subcommands -------------------------------------------------------------


def cmd_attenuation(args) -> int:
    cfg = _config(args)
    if args.fc is not None:
        freqs = np.array(_floats(args.fc))
    else:
        freqs = _sweep(f"{args.fc_start}:{args.fc_stop}:{args.fc_step}")
    if freqs.size == 0:
        raise UsageError("no frequencies requested")
    freqs = np.sort(freqs)
    rho = cfg.radios.water_vapor_density
    rows = []
    for fc in freqs:
        try:
            ox = atmosphere.oxygen_specific_attenuation(float(fc))
            wa = atmosphere.water_specific_attenuation(float(fc), rho)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        rows.append((float(fc), ox, wa, ox + wa))
    _write_csv(args, cfg, ["fc_ghz", "oxygen_db_km", "water_db_km", "total_db_km"], rows)
    return EXIT_OK


def cmd_pattern(args) -> int:
    cfg = _config(args)
    array = cfg.radios.array(args.n)
    thetas = _sweep(args.theta_deg)
    theta = np.radians(thetas)
    gain = antenna.total_gain(theta, np.zeros_like(theta), array)
    stair = antenna.staircase_gain(theta, array, cfg.staircase)
    with np.errstate(divide="ignore"):
        gain_db = 10 * np.log10(gain)
    rows = zip(thetas, gain, gain_db, stair)
    _write_csv(args, cfg, ["theta_deg", "gain", "gain_db", "staircase_gain"], rows, f"n={args.n}")
    return EXIT_OK


def _hop_sweep_rows(cfg: RunConfig, lengths, ns, sigmas, freqs, heights):
    threshold = cfg.threshold_w
    for fc in freqs:
        radios = replace(cfg.radios, frequency_ghz=fc)
        for h in heights:
            for sigma in sigmas:
                model = VibrationModel.from_degrees(sigma)
                for n in ns:
                    for length in lengths:
                        hop = outage.inter_hop(float(length), h, n, n, radios, cfg.region.scale_height)
                        p = outage.hop_outage(hop, model, cfg.staircase, threshold)
                        yield fc, h, sigma, n, float(length), p


def _plan_or_fail(cfg: RunConfig) -> geometry.ChainPlan:
    if cfg.plan is None:
        raise UsageError("config has no [plan] section; pass --lengths-km for a hop sweep")
    violations = geometry.feasibility_check(cfg.plan, cfg.region)
    if violations:
        raise Infeasible("infeasible plan: " + "; ".join(violations))
    return cfg.plan


def cmd_outage(args) -> int:
    cfg = _config(args)
    if args.lengths_km is not None:
        lengths = _sweep(args.lengths_km)
        ns = _ints(args.n) if args.n else [8]
        sigmas = _floats(args.sigma_deg) if args.sigma_deg else [math.degrees(cfg.vibration.sigma_theta)]
        freqs = _floats(args.fc_ghz) if args.fc_ghz else [cfg.radios.frequency_ghz]
        heights = _floats(args.height_km) if args.height_km else [2.5]
        if not (ns and sigmas and freqs and heights):
            raise UsageError("empty sweep")
        rows = list(_hop_sweep_rows(cfg, lengths, ns, sigmas, freqs, heights))
        _write_csv(args, cfg, ["fc_ghz", "height_km", "sigma_deg", "n", "length_km", "outage"], rows)
        return EXIT_OK
    plan = _plan_or_fail(cfg)
    report = outage.chain_outage(plan, cfg.region, cfg.radios, cfg.vibration, cfg.staircase, cfg.threshold_w)
    roles = ["source"] + ["inter"] * (plan.relay_count - 1) + ["dest"]
    rows = [(i + 1, role, p) for i, (role, p) in enumerate(zip(roles, report.per_hop))]
    rows.append(("", "end_to_end_exact", report.end_to_end_exact))
    rows.append(("", "end_to_end_approx", report.end_to_end_approx))
    _write_csv(args, cfg, ["hop", "role", "outage"], rows)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    model = cfg.vibration
    threshold = cfg.threshold_w
    if args.length_km is not None:
        hop = outage.inter_hop(args.length_km, args.height_km, args.n, args.n, cfg.radios, cfg.region.scale_height)
        est = montecarlo.simulate_hop(hop, model, threshold, cfg.simulation)
        closed = outage.hop_outage(hop, model, cfg.staircase, threshold)
    else:
        plan = _plan_or_fail(cfg)
        est = montecarlo.simulate_chain(plan, cfg.region, cfg.radios, model, threshold, cfg.simulation)
        closed = outage.chain_outage(plan, cfg.region, cfg.radios, model, cfg.staircase, threshold).end_to_end_exact
    header = ["estimate", "standard_error", "trials", "outages", "wall_time_s"]
    row = [est.outage_estimate, est.standard_error, est.trials, est.outages, est.wall_time]
    if args.compare:
        header.append("closed_form")
        row.append(closed)
    _write_csv(args, cfg, header, [row])
    return EXIT_OK


_SOLUTION_HEADER = [
    "relay_count",
    "n_rx_first",
    "n_tx_last",
    "n_inter",
    "source_link_length_km",
    "dest_link_length_km",
    "inter_hop_length_km",
    "source_elevation_deg",
    "dest_elevation_deg",
    "achieved_outage",
    "feasible",
]


def cmd_optimize(args) -> int:
    cfg = _config(args)
    trace_rows = []
    trace = None
    if args.trace:

        def trace(chunk):
            trace_rows.append(chunk)

    try:
        sol = optimizer.optimize(
            cfg.search, cfg.region, cfg.radios, cfg.vibration, cfg.staircase, cfg.threshold_w, cfg.target_outage, args.combine, trace
        )
    except optimizer.ConfigurationError as exc:
        raise UsageError(str(exc)) from None
    row = [
        sol.relay_count,
        sol.n_rx_first,
        sol.n_tx_last,
        sol.n_inter,
        sol.source_link_length,
        sol.dest_link_length,
        sol.inter_hop_length,
        math.degrees(sol.source_elevation),
        math.degrees(sol.dest_elevation),
        sol.achieved_outage,
        sol.feasible,
    ]
    _write_csv(args, cfg, _SOLUTION_HEADER, [row])
    if args.trace:
        keys = ["relay_count", "ls", "ld", "n_rx_first", "n_tx_last", "n_inter", "li", "outage"]
        trace_args = argparse.Namespace(**{**vars(args), "out": args.trace})
        rows = (r for chunk in trace_rows for r in zip(*(chunk[k] for k in keys)))
        _write_csv(trace_args, cfg, keys, rows)
    if not sol.feasible:
        print(f"no design with at most {cfg.search.m_max} relays meets the target", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _read_csv(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from None
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def cmd_plot(args) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = _read_csv(args.csv)
    if not rows:
        raise UsageError(f"{args.csv} has no data rows")
    fig, ax = plt.subplots(figsize=(6, 4))
    try:
        if args.kind == "outage":
            curves: dict[tuple, list] = {}
            for r in rows:
                key = (r["fc_ghz"], r["height_km"], r["sigma_deg"], r["n"])
                curves.setdefault(key, []).append((float(r["length_km"]), float(r["outage"])))
            for (fc, h, sigma, n), pts in curves.items():
                x, y = zip(*sorted(pts))
                ax.semilogy(x, y, label=f"fc={fc} GHz, H={h} km, sigma={sigma} deg, N={n}")
            ax.set_xlabel("link length (km)")
            ax.set_ylabel("outage probability")
        elif args.kind == "attenuation":
            fc = [float(r["fc_ghz"]) for r in rows]
            for col in ("oxygen_db_km", "water_db_km", "total_db_km"):
                ax.plot(fc, [float(r[col]) for r in rows], label=col)
            ax.set_xlabel("frequency (GHz)")
            ax.set_ylabel("specific attenuation (dB/km)")
        else:
            theta = [float(r["theta_deg"]) for r in rows]
            ax.plot(theta, [float(r["gain_db"]) for r in rows], label="array gain")
            with np.errstate(divide="ignore"):
                ax.plot(theta, 10 * np.log10([float(r["staircase_gain"]) for r in rows]), label="staircase")
            ax.set_xlabel("tilt (deg)")
            ax.set_ylabel("gain (dB)")
    except KeyError as exc:
        raise UsageError(f"{args.csv} lacks column {exc} for a {args.kind} plot") from None
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    try:
        fig.savefig(args.out, format="svg")
    finally:
        plt.close(fig)
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aerial-backhaul", description="Plan vibrating mmWave relay chains.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, simulation=False):
        p.add_argument("--config", help="YAML run config (defaults to the built-in 40 km corridor)")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=["csv"], default="csv")
        p.add_argument("--seed", type=int, help="override simulation seed (recorded in the CSV header)")
        if simulation:
            p.add_argument("--trials", type=int, help="override trial count")
            p.add_argument("--workers", type=int, help="worker thread hint")

    p = sub.add_parser("attenuation", help="specific attenuation table")
    common(p)
    p.add_argument("--fc", help="comma-separated frequencies in GHz")
    p.add_argument("--fc-start", type=float, default=50.0)
    p.add_argument("--fc-stop", type=float, default=80.0)
    p.add_argument("--fc-step", type=float, default=0.5)
    p.set_defaults(func=cmd_attenuation)

    p = sub.add_parser("pattern", help="array gain along one tilt axis")
    common(p)
    p.add_argument("--n", type=int, default=8, help="elements per side")
    p.add_argument("--theta-deg", default="0:20:0.05", help="tilt sweep START:STOP:STEP in degrees")
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("outage", help="closed-form outage of the config plan or a hop sweep")
    common(p)
    p.add_argument("--lengths-km", help="inter-relay hop sweep START:STOP:STEP")
    p.add_argument("--n", help="comma-separated array sizes for the sweep")
    p.add_argument("--sigma-deg", help="comma-separated tilt deviations for the sweep")
    p.add_argument("--fc-ghz", help="comma-separated carrier frequencies for the sweep")
    p.add_argument("--height-km", help="comma-separated hop altitudes for the sweep")
    p.set_defaults(func=cmd_outage)

    p = sub.add_parser("simulate", help="Monte Carlo outage of the config plan or one hop")
    common(p, simulation=True)
    p.add_argument("--length-km", type=float, help="simulate one inter-relay hop of this length")
    p.add_argument("--height-km", type=float, default=2.5)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--compare", action="store_true", help="add the closed-form value")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="fewest relays meeting the outage target")
    common(p)
    p.add_argument("--trace", help="write every evaluated candidate to this CSV")
    p.add_argument("--combine", choices=["approx", "exact"], default="approx")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("plot", help="render a CSV produced by another subcommand to SVG")
    p.add_argument("--csv", required=True)
    p.add_argument("--kind", choices=["outage", "attenuation", "pattern"], required=True)
    p.add_argument("--out", required=True, help="output SVG path")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (Infeasible, montecarlo.InfeasiblePlanError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (antenna.QuadratureError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
