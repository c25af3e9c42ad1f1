"""Run configuration files.

A YAML document with one section per concern. Keys carry their units
(``_km``, ``_deg``, ``_w``, ``_dbm``); angles are converted to radians on
load and back on dump.

Example::

    region:
      corridor_length_km: 40
      psi_s_min_deg: 40
      psi_d_min_deg: 20
      max_obstacle_height_km: 2
      scale_height_km: 1.5
    radios:
      frequency_ghz: 70
      source_power_w: 1.0
      relay_power_w: 0.2
    vibration:
      sigma_theta_deg: 2
    threshold_dbm: -100
    target_outage: 1.0e-3
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .antenna import ElementPattern, StaircaseParams
from .geometry import ChainPlan, RegionProfile
from .montecarlo import SimulationConfig
from .optimizer import SearchSpace
from .outage import RadioConfig, dbm_to_watts
from .vibration import VibrationModel


class ConfigError(ValueError):
    pass


# (yaml key, attribute, converter to internal, converter to file)
_DEG = (math.radians, math.degrees)
_SAME = (float, float)
_INT = (int, int)

_REGION_KEYS = [
    ("corridor_length_km", "corridor_length", _SAME),
    ("psi_s_min_deg", "psi_s_min", _DEG),
    ("psi_d_min_deg", "psi_d_min", _DEG),
    ("max_obstacle_height_km", "max_obstacle_height", _SAME),
    ("scale_height_km", "scale_height", _SAME),
    ("source_height_km", "source_height", _SAME),
    ("dest_height_km", "dest_height", _SAME),
    ("source_obstacle_height_km", "source_obstacle_height", _SAME),
    ("dest_obstacle_height_km", "dest_obstacle_height", _SAME),
    ("endpoint_height_difference_km", "endpoint_height_difference", _SAME),
]

_RADIO_KEYS = [
    ("frequency_ghz", "frequency_ghz", _SAME),
    ("source_power_w", "source_power", _SAME),
    ("relay_power_w", "relay_power", _SAME),
    ("n_source", "n_source", _INT),
    ("n_dest", "n_dest", _INT),
    ("element_max_gain_dbi", "element_max_gain_db", _SAME),
    ("element_spacing_wavelengths", "element_spacing", _SAME),
    ("water_vapor_density_g_m3", "water_vapor_density", _SAME),
]

_ELEMENT_KEYS = [
    ("element_theta_3db_deg", "theta_3db_deg", _SAME),
    ("element_phi_3db_deg", "phi_3db_deg", _SAME),
    ("element_side_lobe_level_db", "side_lobe_level_db", _SAME),
    ("element_max_attenuation_db", "max_attenuation_db", _SAME),
]

_SEARCH_KEYS = [
    ("ls_max_km", "ls_max", _SAME),
    ("ld_max_km", "ld_max", _SAME),
    ("length_step_km", "length_step", _SAME),
    ("ls_min_km", "ls_min", _SAME),
    ("ld_min_km", "ld_min", _SAME),
    ("n_u_min", "n_u_min", _INT),
    ("n_u_max", "n_u_max", _INT),
    ("endpoint_n_min", "endpoint_n_min", _INT),
    ("endpoint_n_max", "endpoint_n_max", _INT),
    ("m_max", "m_max", _INT),
]

_SIMULATION_KEYS = [
    ("trials", "trials", _INT),
    ("seed", "seed", _INT),
    ("worker_count_hint", "worker_count_hint", _INT),
    ("block_size", "block_size", _INT),
]

_STAIRCASE_KEYS = [
    ("steps_per_lobe", "steps_per_lobe", _INT),
    ("lobe_count", "lobe_count", _INT),
]

_PLAN_KEYS = [
    ("relay_count", "relay_count", _INT),
    ("source_link_length_km", "source_link_length", _SAME),
    ("source_elevation_deg", "source_elevation", _DEG),
    ("dest_link_length_km", "dest_link_length", _SAME),
    ("dest_elevation_deg", "dest_elevation", _DEG),
    ("n_rx_first", "n_rx_first", _INT),
    ("n_tx_last", "n_tx_last", _INT),
    ("n_inter", "n_inter", _INT),
]


def _read_section(data: dict, section: str, keys, required: bool = False) -> dict:
    raw = data.get(section)
    if raw is None:
        if required:
            raise ConfigError(f"missing section [{section}]")
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"section [{section}] must be a mapping")
    known = {k for k, _, _ in keys}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
    out = {}
    for key, attr, (load, _) in keys:
        if key in raw and raw[key] is not None:
            try:
                out[attr] = load(raw[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from None
    return out


def _write_section(obj, keys) -> dict:
    out = {}
    for key, attr, (_, dump) in keys:
        value = getattr(obj, attr)
        out[key] = None if value is None else dump(value)
    return out


@dataclass(frozen=True)
class RunConfig:
    region: RegionProfile
    radios: RadioConfig = field(default_factory=RadioConfig)
    vibration: VibrationModel = field(default_factory=lambda: VibrationModel.from_degrees(2.0))
    staircase: StaircaseParams = field(default_factory=StaircaseParams)
    threshold_dbm: float = -100.0
    target_outage: float = 1e-3
    search: SearchSpace = field(default_factory=lambda: SearchSpace(16.0, 16.0))
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    plan: ChainPlan | None = None

    @property
    def threshold_w(self) -> float:
        return float(dbm_to_watts(self.threshold_dbm))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        if not isinstance(data, dict):
            raise ConfigError("config root must be a mapping")
        top = {"region", "radios", "vibration", "staircase", "threshold_dbm", "target_outage", "search", "simulation", "plan"}
        unknown = set(data) - top
        if unknown:
            raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
        try:
            region = RegionProfile(**_read_section(data, "region", _REGION_KEYS, required=True))
            radio_section = dict(data.get("radios") or {})
            element_raw = {k: radio_section.pop(k) for k in list(radio_section) if k.startswith("element_") and k in {e for e, _, _ in _ELEMENT_KEYS}}
            radio_kwargs = _read_section({"radios": radio_section}, "radios", _RADIO_KEYS)
            element = ElementPattern(**_read_section({"radios": element_raw}, "radios", _ELEMENT_KEYS))
            radios = RadioConfig(element=element, **radio_kwargs)
            vib = data.get("vibration") or {}
            if set(vib) - {"sigma_theta_deg"}:
                raise ConfigError(f"unknown keys in [vibration]: {sorted(set(vib) - {'sigma_theta_deg'})}")
            vibration = VibrationModel.from_degrees(float(vib.get("sigma_theta_deg", 2.0)))
            staircase = StaircaseParams(**_read_section(data, "staircase", _STAIRCASE_KEYS))
            search_kwargs = _read_section(data, "search", _SEARCH_KEYS)
            search = SearchSpace(**{"ls_max": 16.0, "ld_max": 16.0, **search_kwargs})
            simulation = SimulationConfig(**_read_section(data, "simulation", _SIMULATION_KEYS))
            plan = None
            if data.get("plan") is not None:
                plan_kwargs = _read_section(data, "plan", _PLAN_KEYS)
                missing = {a for _, a, _ in _PLAN_KEYS} - set(plan_kwargs)
                if missing:
                    raise ConfigError(f"[plan] missing keys: {sorted(missing)}")
                plan = ChainPlan(n_source=radios.n_source, n_dest=radios.n_dest, **plan_kwargs)
            target = float(data.get("target_outage", 1e-3))
            if not 0 < target <= 1:
                raise ConfigError("target_outage must lie in (0, 1]")
            return cls(
                region=region,
                radios=radios,
                vibration=vibration,
                staircase=staircase,
                threshold_dbm=float(data.get("threshold_dbm", -100.0)),
                target_outage=target,
                search=search,
                simulation=simulation,
                plan=plan,
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict[str, Any]:
        radios = _write_section(self.radios, _RADIO_KEYS)
        radios.update(_write_section(self.radios.element, _ELEMENT_KEYS))
        out = {
            "region": _write_section(self.region, _REGION_KEYS),
            "radios": radios,
            "vibration": {"sigma_theta_deg": math.degrees(self.vibration.sigma_theta)},
            "staircase": _write_section(self.staircase, _STAIRCASE_KEYS),
            "threshold_dbm": float(self.threshold_dbm),
            "target_outage": float(self.target_outage),
            "search": _write_section(self.search, _SEARCH_KEYS),
            "simulation": _write_section(self.simulation, _SIMULATION_KEYS),
        }
        if self.plan is not None:
            out["plan"] = _write_section(self.plan, _PLAN_KEYS)
        return out

    def digest(self) -> str:
        """Short stable hash of the canonical config contents."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return RunConfig.from_dict(data)


def dump_config(cfg: RunConfig, path=None) -> str:
    text = yaml.safe_dump(cfg.to_dict(), sort_keys=False)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def default_config() -> RunConfig:
    """Corridor used throughout the examples: 40 km, 40/20 degree masks, 2 km obstacles."""
    region = RegionProfile(
        corridor_length=40.0,
        psi_s_min=math.radians(40.0),
        psi_d_min=math.radians(20.0),
        max_obstacle_height=2.0,
        scale_height=1.5,
        dest_obstacle_height=1.0,
    )
    return RunConfig(region=region)
