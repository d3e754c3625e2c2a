"""Exact placement solvers and result ranking."""
from typing import Optional

from src.graph.vnf_graph import VnfGraph
from src.milp.builder import build_instance
from src.model.catalog import FunctionCatalog
from src.model.network import SubstrateNetwork
from src.solver.branch_and_bound import solve
from src.solver.decomposed import assign_roles, solve_decomposed
from src.solver.ranking import rank
from src.solver.types import Backend, ExtraBound, SolveConfig, SolveResult, SolveStats, SolveStatus


def solve_graph(
    net: SubstrateNetwork,
    catalog: FunctionCatalog,
    graph: VnfGraph,
    config: Optional[SolveConfig] = None,
) -> SolveResult:
    """Solve with the backend selected in the config."""
    config = config or SolveConfig()
    if config.backend is Backend.MONOLITHIC:
        return solve(build_instance(net, catalog, graph), config)
    return solve_decomposed(net, catalog, graph, config)


__all__ = [
    "Backend",
    "ExtraBound",
    "SolveConfig",
    "SolveResult",
    "SolveStats",
    "SolveStatus",
    "assign_roles",
    "rank",
    "solve",
    "solve_decomposed",
    "solve_graph",
]
