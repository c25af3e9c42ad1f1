"""Outage analysis and relay-chain design for vibrating mmWave aerial backhaul."""

from .antenna import ArrayConfig, ElementPattern, StaircaseParams
from .atmosphere import Atmosphere, PathGeometry, PathKind
from .config import RunConfig, default_config, dump_config, load_config
from .geometry import ChainPlan, RegionProfile
from .montecarlo import EmpiricalEstimate, SimulationConfig, simulate_chain, simulate_hop
from .optimizer import DesignSolution, SearchSpace, brute_force_optimize, optimize
from .outage import HopSpec, OutageReport, RadioConfig, VibratingEnds, chain_outage, hop_outage
from .vibration import VibrationModel

__version__ = "0.1.0"

__all__ = [
    "ArrayConfig",
    "Atmosphere",
    "ChainPlan",
    "DesignSolution",
    "ElementPattern",
    "EmpiricalEstimate",
    "HopSpec",
    "OutageReport",
    "PathGeometry",
    "PathKind",
    "RadioConfig",
    "RegionProfile",
    "RunConfig",
    "SearchSpace",
    "SimulationConfig",
    "StaircaseParams",
    "VibratingEnds",
    "VibrationModel",
    "brute_force_optimize",
    "chain_outage",
    "default_config",
    "dump_config",
    "hop_outage",
    "load_config",
    "optimize",
    "simulate_chain",
    "simulate_hop",
]
