"""Kinetic Semi-Yao graph, all nearest neighbours and all (1+eps)-nearest neighbours."""
from .cones import ConeFamily, build_cone_family, contains, cone_of, reflected_contains
from .motion import Instant, Polynomial, Trajectory, make_trajectory, next_sign_change
from .scenario import Scenario, generate_scenario, parse_scenario, serialize_scenario
from .simulation import RunConfig, Simulation, run_scenario
from .sygraph import SemiYaoKDS, build_static

__all__ = [
    "ConeFamily", "build_cone_family", "contains", "cone_of", "reflected_contains",
    "Instant", "Polynomial", "Trajectory", "make_trajectory", "next_sign_change",
    "Scenario", "generate_scenario", "parse_scenario", "serialize_scenario",
    "RunConfig", "Simulation", "run_scenario", "SemiYaoKDS", "build_static",
]
