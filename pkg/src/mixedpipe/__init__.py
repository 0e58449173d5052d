"""Kinetic finite-volume solver for mixed free-surface / pressurized flows in
closed circular pipes with upwinded source terms."""

from .errors import CFLViolation, ConfigurationError, DomainError, SimulationError
from .geometry import PipeGeometry, build_geometry
from .kinetic import FluxPair, GibbsParameters, InterfaceData, interface_flux
from .model import CellState, PhysicalConstants, WVector
from .scenario import Scenario, load_scenario, parse_scenario, serialize
from .solver import BoundaryCondition, FrictionMode, SimulationState, run, step

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition", "CFLViolation", "CellState", "ConfigurationError", "DomainError",
    "FluxPair", "FrictionMode", "GibbsParameters", "InterfaceData", "PhysicalConstants",
    "PipeGeometry", "Scenario", "SimulationError", "SimulationState", "WVector",
    "build_geometry", "interface_flux", "load_scenario", "parse_scenario", "run",
    "serialize", "step",
]
