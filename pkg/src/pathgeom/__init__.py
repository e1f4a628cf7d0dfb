"""Straightening test and invariants for pairs of second-order ODEs."""

from .ode_model import OdeSystem, load_system, load_system_file
from .symexpr import DEFAULT, Expr, parse_expr

__version__ = "0.1.0"

__all__ = ["DEFAULT", "Expr", "OdeSystem", "load_system", "load_system_file", "parse_expr"]
