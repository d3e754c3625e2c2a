"""Range estimation and epsilon-constraint sweeps over the three placement metrics."""
import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from src.config import get_config
from src.errors import RangeEstimationError
from src.graph.vnf_graph import VnfGraph
from src.milp.builder import can_host
from src.milp.checker import check_solution
from src.milp.instance import Objective, Relation
from src.milp.solution import ObjectiveValues, PlacementSolution, save_solution
from src.model.catalog import FunctionCatalog
from src.model.network import SubstrateNetwork
from src.solver import solve_graph
from src.solver.types import ExtraBound, SolveConfig, SolveResult, SolveStatus

logger = logging.getLogger(__name__)

CSV_HEADER = ("remdr", "used_nodes", "latency", "solution_id")


@dataclass(frozen=True)
class MetricRange:
    best: Union[int, Fraction]
    worst: Union[int, Fraction]


@dataclass(frozen=True)
class MetricRanges:
    """Best and worst values seen across the three single-objective optima."""

    remdr: MetricRange
    used_nodes: MetricRange
    latency: MetricRange
    solutions: Tuple[PlacementSolution, ...] = field(default=(), compare=False, repr=False)

    def of(self, metric: Objective) -> MetricRange:
        if metric is Objective.REMDR:
            return self.remdr
        if metric is Objective.USED_NODES:
            return self.used_nodes
        return self.latency


@dataclass(frozen=True)
class ParetoPoint:
    remdr: Fraction
    used_nodes: int
    latency: Fraction
    solution_id: str = ""
    provenance: str = ""
    solution: Optional[PlacementSolution] = field(default=None, compare=False, repr=False)

    @property
    def metrics(self) -> Tuple[Fraction, int, Fraction]:
        return (self.remdr, self.used_nodes, self.latency)


@dataclass(frozen=True)
class ParetoFront:
    points: Tuple[ParetoPoint, ...]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def metrics(self) -> List[Tuple[Fraction, int, Fraction]]:
        return [p.metrics for p in self.points]


def dominates(p, q) -> bool:
    """True iff p is at least as good as q in every metric and strictly better in one.

    Points are ParetoPoints or (remdr, used_nodes, latency) triples.
    """
    p_remdr, p_used, p_lat = p.metrics if isinstance(p, ParetoPoint) else p
    q_remdr, q_used, q_lat = q.metrics if isinstance(q, ParetoPoint) else q
    if p_remdr < q_remdr or p_used > q_used or p_lat > q_lat:
        return False
    return p_remdr > q_remdr or p_used < q_used or p_lat < q_lat


def non_dominated(points: Sequence[ParetoPoint]) -> List[ParetoPoint]:
    """Deduplicate by metrics and drop dominated points, in deterministic order."""
    ordered = sorted(points, key=_sort_key)
    unique: Dict[Tuple, ParetoPoint] = {}
    for point in ordered:
        unique.setdefault(point.metrics, point)
    candidates = list(unique.values())
    return [p for p in candidates if not any(dominates(q, p) for q in candidates)]


def _sort_key(point: ParetoPoint):
    return (point.used_nodes, point.latency, -point.remdr, point.provenance)


def _checked_metrics(net, catalog, graph, solution: PlacementSolution) -> Optional[ObjectiveValues]:
    report = check_solution(net, catalog, graph, solution)
    if not report.clean:
        logger.error(f"Discarding solution with violations {report.tags()}")
        return None
    return report.objective_values


def estimate_ranges(
    net: SubstrateNetwork,
    catalog: FunctionCatalog,
    graph: VnfGraph,
    config: Optional[SolveConfig] = None,
) -> MetricRanges:
    """Solve once per objective and record the spread of every metric.

    Raises:
        RangeEstimationError: When any of the three solves finds no solution
    """
    config = config or SolveConfig()
    observed: List[ObjectiveValues] = []
    solutions: List[PlacementSolution] = []
    for objective in Objective:
        result = solve_graph(net, catalog, graph, config.model_copy(update={"objective": objective}))
        if result.solution is None:
            raise RangeEstimationError(
                f"range estimation for {objective.value} ended {result.status.value} on {graph.label}"
            )
        values = _checked_metrics(net, catalog, graph, result.solution)
        if values is None:
            raise RangeEstimationError(f"range estimation for {objective.value} produced an invalid solution")
        observed.append(values)
        solutions.append(result.solution)

    remdr = [v.remdr for v in observed]
    used = [v.used_nodes for v in observed]
    latency = [v.latency for v in observed]
    ranges = MetricRanges(
        remdr=MetricRange(best=max(remdr), worst=min(remdr)),
        used_nodes=MetricRange(best=min(used), worst=max(used)),
        latency=MetricRange(best=min(latency), worst=max(latency)),
        solutions=tuple(solutions),
    )
    logger.info(
        f"Ranges for {graph.label}: remdr {ranges.remdr.worst}..{ranges.remdr.best}, "
        f"used_nodes {ranges.used_nodes.best}..{ranges.used_nodes.worst}, "
        f"latency {ranges.latency.best}..{ranges.latency.worst}"
    )
    return ranges


def remdr_resolution(net: SubstrateNetwork, graph: VnfGraph) -> Fraction:
    """Smallest possible difference between two attainable remaining data rates."""
    denominators = [Fraction(net.rate(e)).denominator for e in net.edges]
    denominators += [Fraction(edge.rate).denominator for edge in graph.edges]
    return Fraction(1, math.lcm(*denominators)) if denominators else Fraction(1)


def remdr_grid(ranges: MetricRanges, steps: int) -> List[Optional[Fraction]]:
    """Uniform thresholds from the worst to the best observed remaining data rate."""
    low, high = Fraction(ranges.remdr.worst), Fraction(ranges.remdr.best)
    if steps <= 1 or low == high:
        return [low]
    return [low + (high - low) * i / (steps - 1) for i in range(steps)]


class _Sweep:
    def __init__(self, net, catalog, graph, config: SolveConfig):
        self.net = net
        self.catalog = catalog
        self.graph = graph
        self.config = config.model_copy(update={"threads": 1, "extra_bounds": list(config.extra_bounds)})

    def _solve(self, objective: Objective, bounds: Sequence[ExtraBound]) -> SolveResult:
        return solve_graph(self.net, self.catalog, self.graph, self.config.with_bounds(*bounds, objective=objective))

    def cell(self, k: int, r: Optional[Fraction]) -> Optional[ParetoPoint]:
        """Lexicographic cell: least latency, then most remdr, then fewest nodes."""
        provenance = f"used_nodes<={k} remdr>={'-' if r is None else r}"
        base = [ExtraBound(metric=Objective.USED_NODES, relation=Relation.LE, value=k)]
        if r is not None:
            base.append(ExtraBound(metric=Objective.REMDR, relation=Relation.GE, value=r))

        first = self._solve(Objective.LATENCY, base)
        if not self._usable(first, provenance):
            return None
        latency = first.solution.objective_values.latency
        at_latency = [ExtraBound(metric=Objective.LATENCY, relation=Relation.LE, value=latency)]

        second = self._solve(Objective.REMDR, base[:1] + at_latency)
        if not self._usable(second, provenance):
            return None
        remdr = second.solution.objective_values.remdr
        at_remdr = [ExtraBound(metric=Objective.REMDR, relation=Relation.GE, value=remdr)]

        third = self._solve(Objective.USED_NODES, base[:1] + at_latency + at_remdr)
        if not self._usable(third, provenance):
            return None
        values = _checked_metrics(self.net, self.catalog, self.graph, third.solution)
        if values is None:
            return None
        return ParetoPoint(
            remdr=values.remdr,
            used_nodes=values.used_nodes,
            latency=values.latency,
            provenance=provenance,
            solution=third.solution,
        )

    @staticmethod
    def _usable(result: SolveResult, provenance: str) -> bool:
        if result.status is SolveStatus.OPTIMAL:
            return True
        if result.status is SolveStatus.TIME_LIMIT:
            logger.warning(f"Cell {provenance} hit the time limit; skipped")
        else:
            logger.info(f"Cell {provenance} is {result.status.value}; skipped")
        return False

    def column(self, k: int, thresholds: Optional[Sequence[Fraction]], step: Fraction) -> List[ParetoPoint]:
        """All cells for one used-node cap.

        With thresholds=None the remdr threshold walks upward from each found
        point by the resolution step until no solution remains.
        """
        points: List[ParetoPoint] = []
        if thresholds is not None:
            for r in thresholds:
                point = self.cell(k, r)
                if point is not None:
                    points.append(point)
            return points

        r: Optional[Fraction] = None
        while True:
            point = self.cell(k, r)
            if point is None:
                return points
            points.append(point)
            r = point.remdr + step


def used_nodes_limit(net: SubstrateNetwork, catalog: FunctionCatalog, graph: VnfGraph) -> int:
    """Largest number of nodes a placement of the graph can use."""
    hosts = {v for u in graph.uses for v in net.nodes if can_host(net, catalog, graph.function(u), v)}
    return min(len(graph.uses), len(hosts))


def sweep(
    net: SubstrateNetwork,
    catalog: FunctionCatalog,
    graph: VnfGraph,
    ranges: MetricRanges,
    config: Optional[SolveConfig] = None,
    remdr_steps: Optional[int] = None,
    refine: Optional[bool] = None,
    used_nodes_max: Optional[int] = None,
    threads: Optional[int] = None,
) -> ParetoFront:
    """Trace the Pareto front with LATENCY as the scalarized objective.

    Every cell bounds used nodes by k and remaining data rate from below, solves
    for least latency and then breaks ties lexicographically so that each
    reported point is efficient. Infeasible cells are skipped.

    Args:
        net: Substrate network
        catalog: Function catalog
        graph: VNF graph to place
        ranges: Output of estimate_ranges
        config: Solver options for the individual cells
        remdr_steps: Uniform remdr thresholds per column when refine is off
        refine: Walk every attainable remdr level instead of a uniform grid
        used_nodes_max: Largest used-node cap; defaults to the worst observed
            value, or to the largest possible value when refining
        threads: Columns solved in parallel

    Returns:
        ParetoFront sorted by used nodes, latency and descending remdr
    """
    settings = get_config()
    config = config or SolveConfig()
    remdr_steps = remdr_steps if remdr_steps is not None else settings.pareto_remdr_steps
    refine = settings.pareto_refine if refine is None else refine
    threads = threads or config.threads

    low = int(ranges.used_nodes.best)
    if used_nodes_max is not None:
        high = used_nodes_max
    elif refine:
        high = max(int(ranges.used_nodes.worst), used_nodes_limit(net, catalog, graph))
    else:
        high = int(ranges.used_nodes.worst)
    caps = list(range(low, high + 1))

    runner = _Sweep(net, catalog, graph, config)
    thresholds = None if refine else remdr_grid(ranges, remdr_steps)
    step = remdr_resolution(net, graph)
    logger.info(
        f"Sweeping {graph.label}: used_nodes caps {low}..{high}, "
        f"{'refined' if refine else f'{len(thresholds)} remdr thresholds'}, threads={threads}"
    )

    if threads > 1 and len(caps) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            columns = list(pool.map(lambda k: runner.column(k, thresholds, step), caps))
    else:
        columns = [runner.column(k, thresholds, step) for k in caps]

    found = [p for column in columns for p in column]
    front = non_dominated(found)
    points = tuple(
        ParetoPoint(
            remdr=p.remdr,
            used_nodes=p.used_nodes,
            latency=p.latency,
            solution_id=f"p{index:03d}",
            provenance=p.provenance,
            solution=p.solution,
        )
        for index, p in enumerate(front)
    )
    logger.info(f"Pareto front of {graph.label}: {len(points)} points from {len(found)} cell optima")
    return ParetoFront(points=points)


def write_front_csv(front: ParetoFront, path: Union[str, Path]) -> Path:
    """Write one row per point: remdr,used_nodes,latency,solution_id."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for point in front:
            writer.writerow([str(point.remdr), point.used_nodes, str(point.latency), point.solution_id])
    return path


def read_front_csv(path: Union[str, Path]) -> List[Tuple[Fraction, int, Fraction, str]]:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    return [
        (Fraction(row["remdr"]), int(row["used_nodes"]), Fraction(row["latency"]), row["solution_id"])
        for row in rows
    ]


def write_front_solutions(front: ParetoFront, directory: Union[str, Path]) -> List[Path]:
    """Archive each point's solution as <solution_id>.json."""
    directory = Path(directory)
    written = []
    for point in front:
        if point.solution is not None:
            written.append(save_solution(point.solution, directory / f"{point.solution_id}.json", point.provenance))
    return written
