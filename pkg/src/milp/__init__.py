"""Placement integer program: builder, solutions, checker and LP interchange."""
from src.milp.builder import BuildContext, build_instance, can_host, candidate_edges
from src.milp.checker import CheckReport, Violation, check_solution
from src.milp.instance import (
    FAMILY_TAGS,
    ConstraintTag,
    LinearConstraint,
    Objective,
    PlacementInstance,
    Relation,
    Sense,
    Var,
    VarKind,
)
from src.milp.lp_format import export_lp, import_solution, read_lp
from src.milp.solution import (
    ObjectiveValues,
    PlacementSolution,
    RoleAssignment,
    RoutedPath,
    assemble_solution,
    compute_objectives,
    extract_solution,
    load_solution,
    save_solution,
)

__all__ = [
    "BuildContext",
    "CheckReport",
    "ConstraintTag",
    "FAMILY_TAGS",
    "LinearConstraint",
    "Objective",
    "ObjectiveValues",
    "PlacementInstance",
    "PlacementSolution",
    "Relation",
    "RoleAssignment",
    "RoutedPath",
    "Sense",
    "Var",
    "VarKind",
    "Violation",
    "assemble_solution",
    "build_instance",
    "can_host",
    "candidate_edges",
    "check_solution",
    "compute_objectives",
    "export_lp",
    "extract_solution",
    "import_solution",
    "load_solution",
    "read_lp",
    "save_solution",
]
