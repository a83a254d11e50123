"""Revenue-maximization MILP: builder, LP export and solution checking."""

from .check import CheckReport, Violation, assignment_to_solution, check_solution
from .lpformat import export_lp, format_solution, parse_solution
from .model import MilpModel, ModelBuilder, Row, Var
from .rmax import ROW_FAMILIES, PwlDomainError, auto_theta, build_rmax, names

__all__ = [
    "CheckReport",
    "MilpModel",
    "ModelBuilder",
    "PwlDomainError",
    "ROW_FAMILIES",
    "Row",
    "Var",
    "Violation",
    "assignment_to_solution",
    "auto_theta",
    "build_rmax",
    "check_solution",
    "export_lp",
    "format_solution",
    "names",
    "parse_solution",
]
