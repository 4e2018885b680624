"""Exact optimization model: builder, exporters, checker, translator, oracle."""

from .export import (
    assignment_for_model,
    export_model,
    read_solution,
    row_names,
    sanitize_tag,
    write_lp,
    write_mps,
    write_solution,
)
from .model import (
    Assignment,
    CheckReport,
    MilpModel,
    ModelIndex,
    Row,
    VarDef,
    Violation,
    build_model,
    check_solution,
    default_alphas,
    default_l_max,
    tag_family,
)
from .oracle import (
    EnumerationLimits,
    OracleResult,
    check_limits,
    enumerate_optimal,
    oracle_search,
)
from .translate import plan_to_assignment

__all__ = [
    "Assignment",
    "CheckReport",
    "EnumerationLimits",
    "MilpModel",
    "ModelIndex",
    "OracleResult",
    "Row",
    "VarDef",
    "Violation",
    "assignment_for_model",
    "build_model",
    "check_solution",
    "default_alphas",
    "default_l_max",
    "enumerate_optimal",
    "export_model",
    "oracle_search",
    "plan_to_assignment",
    "read_solution",
    "row_names",
    "sanitize_tag",
    "tag_family",
    "write_lp",
    "write_mps",
    "write_solution",
]
