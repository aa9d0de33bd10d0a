"""Toolchain for the uDrive event-based driving-preference language.

Parse and validate ``.udrv`` programs, execute their rule semantics against
a deterministic desk-scale driving simulator whose planner is controlled by
the rules, accept online commands mid-journey, and score the resulting
traces against built-in traffic-law robustness checks.
"""

from udrive.catalog import Catalog, baseline_parameters, default_catalog
from udrive.parser import parse_online_command, parse_program
from udrive.formatter import format_program
from udrive.validate import validate_program

__all__ = [
    "Catalog",
    "baseline_parameters",
    "default_catalog",
    "format_program",
    "parse_online_command",
    "parse_program",
    "validate_program",
]

__version__ = "0.1.0"
