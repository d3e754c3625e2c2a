"""Generic 0-1 branch and bound with bound propagation over a PlacementInstance."""
import logging
import math
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from src.milp.instance import PlacementInstance, Relation, Sense
from src.milp.solution import extract_solution
from src.solver.decomposed import Incumbent
from src.solver.types import SolveConfig, SolveResult, SolveStats, SolveStatus

logger = logging.getLogger(__name__)

# A row in normal form: sum(coef * var) <= rhs
Row = Tuple[Tuple[Tuple[Fraction, int], ...], Fraction]


class _TimeUp(Exception):
    pass


def normalize_rows(
    instance: PlacementInstance,
    extra: Sequence[Tuple[Dict[int, Fraction], Relation, Fraction]] = (),
) -> List[Row]:
    rows: List[Row] = []

    def add(terms, relation: Relation, rhs: Fraction) -> None:
        terms = tuple(terms)
        if relation in (Relation.LE, Relation.EQ):
            rows.append((terms, rhs))
        if relation in (Relation.GE, Relation.EQ):
            rows.append((tuple((-c, v) for c, v in terms), -rhs))

    for row in instance.constraints:
        add(row.terms, row.relation, row.rhs)
    for expression, relation, rhs in extra:
        add(((c, v) for v, c in expression.items()), relation, Fraction(rhs))
    return rows


class Domains:
    """Variable bounds with a trail for backtracking."""

    def __init__(self, instance: PlacementInstance, rows: List[Row]):
        self.instance = instance
        self.rows = rows
        self.binary = [v.is_binary for v in instance.variables]
        self.lo: List[Fraction] = [Fraction(v.lb) for v in instance.variables]
        self.hi: List[Fraction] = [
            Fraction(v.ub) if v.ub is not None else Fraction(10**12) for v in instance.variables
        ]
        self.trail: List[Tuple[int, Fraction, Fraction]] = []
        self.watch: List[List[int]] = [[] for _ in instance.variables]
        for index, (terms, _) in enumerate(rows):
            for _, var in terms:
                self.watch[var].append(index)

    def copy(self) -> "Domains":
        clone = Domains.__new__(Domains)
        clone.instance = self.instance
        clone.rows = self.rows
        clone.binary = self.binary
        clone.lo = list(self.lo)
        clone.hi = list(self.hi)
        clone.trail = []
        clone.watch = self.watch
        return clone

    def fixed(self, var: int) -> bool:
        return self.lo[var] == self.hi[var]

    def mark(self) -> int:
        return len(self.trail)

    def undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            var, lo, hi = self.trail.pop()
            self.lo[var], self.hi[var] = lo, hi

    def _set(self, var: int, lo: Fraction, hi: Fraction) -> None:
        self.trail.append((var, self.lo[var], self.hi[var]))
        self.lo[var], self.hi[var] = lo, hi

    def assign(self, var: int, value: int) -> bool:
        if value < self.lo[var] or value > self.hi[var]:
            return False
        self._set(var, Fraction(value), Fraction(value))
        return self.propagate(self.watch[var])

    def propagate(self, row_ids) -> bool:
        """Tighten bounds until a fixpoint; False on a proven conflict."""
        queue = list(row_ids)
        queued = set(queue)
        lo, hi = self.lo, self.hi
        while queue:
            index = queue.pop()
            queued.discard(index)
            terms, rhs = self.rows[index]
            min_activity = Fraction(0)
            for coef, var in terms:
                min_activity += coef * (lo[var] if coef > 0 else hi[var])
            slack = rhs - min_activity
            if slack < 0:
                return False
            for coef, var in terms:
                if coef > 0:
                    limit = lo[var] + slack / coef
                    if self.binary[var]:
                        limit = Fraction(math.floor(limit))
                    if limit < hi[var]:
                        if limit < lo[var]:
                            return False
                        self._set(var, lo[var], limit)
                        for other in self.watch[var]:
                            if other not in queued:
                                queued.add(other)
                                queue.append(other)
                else:
                    limit = hi[var] + slack / coef
                    if self.binary[var]:
                        limit = Fraction(math.ceil(limit))
                    if limit > lo[var]:
                        if limit > hi[var]:
                            return False
                        self._set(var, limit, hi[var])
                        for other in self.watch[var]:
                            if other not in queued:
                                queued.add(other)
                                queue.append(other)
        return True


def branching_order(instance: PlacementInstance, seed: int) -> List[Tuple[int, Tuple[int, ...]]]:
    """Variables to branch on, in priority order, with the values to try first."""
    ctx = instance.context
    graph, net, catalog = ctx.graph, ctx.net, ctx.catalog
    rng = random.Random(seed)

    def demand(u: str) -> Fraction:
        spec = catalog[graph.function(u)]
        return spec.dc_demand + spec.switch_demand

    uses = sorted(graph.uses, key=lambda u: (-demand(u), u))
    nodes = list(net.nodes)
    rng.shuffle(nodes)
    nodes.sort(key=lambda v: -(net.dc_capacity(v) + net.switch_capacity(v)))
    rank = {v: i for i, v in enumerate(nodes)}

    order: List[Tuple[int, Tuple[int, ...]]] = []
    for u in uses:
        for v in sorted(ctx.hosts[u], key=lambda v: rank[v]):
            order.append((instance.var("m", u, v), (1, 0)))
    for u in uses:
        for v in sorted(ctx.hosts[u], key=lambda v: rank[v]):
            order.append((instance.var("md", u, v), (1, 0)))
    for _, var in instance.family("e").items():
        order.append((var, (0, 1)))
    seen = {var for var, _ in order}
    for var in instance.variables:
        if var.is_binary and var.index not in seen:
            order.append((var.index, (0, 1)))
    return order


class MonolithicSearch:
    def __init__(self, instance: PlacementInstance, config: SolveConfig):
        self.instance = instance
        self.config = config
        self.objective = config.objective
        extra = [
            (instance.objectives[b.metric], b.relation, b.value) for b in config.extra_bounds
        ]
        self.extra_rows = extra
        self.rows = normalize_rows(instance, extra)
        self.order = branching_order(instance, config.seed)
        self.coefficients = instance.objectives[self.objective]
        self.incumbent = Incumbent(self.objective)
        self.deadline = time.monotonic() + config.time_limit
        self.timed_out = False
        self.explored = 0
        self.lock = threading.Lock()
        self.role_mapping: Dict[int, int] = {}
        for (u, v), md in instance.family("md").items():
            self.role_mapping[md] = instance.var("m", u, v)
        self.deferred = [p for p, (var, _) in enumerate(self.order) if var in self.role_mapping]

    def objective_bound(self, domains: Domains) -> Fraction:
        maximize = self.objective.sense is Sense.MAX
        total = Fraction(0)
        for var, coef in self.coefficients.items():
            use_hi = (coef > 0) == maximize
            total += coef * (domains.hi[var] if use_hi else domains.lo[var])
        return total

    def next_var(self, domains: Domains, start: int) -> Optional[int]:
        """Position of the next variable to branch on.

        Role variables of (use, node) pairs whose mapping is fixed to 0 do not
        affect feasibility and are deferred until everything else is fixed.
        """
        for position in range(start, len(self.order)):
            var = self.order[position][0]
            if domains.fixed(var):
                continue
            mapping = self.role_mapping.get(var)
            if mapping is not None and domains.hi[mapping] == 0:
                continue
            return position
        for position in self.deferred:
            if not domains.fixed(self.order[position][0]):
                return position
        return None

    def leaf(self, domains: Domains, task: int) -> None:
        values = list(domains.lo)
        for var, row_index in self.instance.definitions.items():
            row = self.instance.constraints[row_index]
            coef = next(c for c, v in row.terms if v == var)
            rest = sum((c * values[v] for c, v in row.terms if v != var), Fraction(0))
            values[var] = (row.rhs - rest) / coef
        if self.instance.violated(values):
            return
        for expression, relation, rhs in self.extra_rows:
            activity = sum((c * values[v] for v, c in expression.items()), Fraction(0))
            if not relation.holds(activity, rhs):
                return
        value = self.instance.objective_value(self.objective, values)
        self.incumbent.offer(value, values, task)

    def tick(self, bound) -> None:
        with self.lock:
            self.explored += 1
            explored = self.explored
        if explored % self.config.progress_interval == 0:
            logger.info(f"explored={explored} incumbent={self.incumbent.value} bound={bound}")
        if explored % 256 == 0 and time.monotonic() > self.deadline:
            self.timed_out = True
            raise _TimeUp()

    def run(self, domains: Domains, task: int = 0) -> None:
        try:
            self._dfs(domains, task)
        except _TimeUp:
            pass

    def _dfs(self, domains: Domains, task: int) -> None:
        position = self.next_var(domains, 0)
        if position is None:
            self.leaf(domains, task)
            return
        # Frame: [position, values, next value index, trail mark]
        stack = [[position, self.order[position][1], 0, domains.mark()]]
        while stack:
            frame = stack[-1]
            position, values, attempt, mark = frame
            domains.undo(mark)
            if attempt >= len(values):
                stack.pop()
                continue
            frame[2] += 1
            var = self.order[position][0]
            if not domains.assign(var, values[attempt]):
                self.tick(None)
                continue
            bound = self.objective_bound(domains)
            self.tick(bound)
            if not self.incumbent.can_improve(bound):
                continue
            child = self.next_var(domains, position + 1)
            if child is None:
                self.leaf(domains, task)
                continue
            stack.append([child, self.order[child][1], 0, domains.mark()])


def solve(instance: PlacementInstance, config: Optional[SolveConfig] = None) -> SolveResult:
    """Solve a linearized placement instance to optimality.

    Args:
        instance: Output of build_instance
        config: Objective, limits and extra bounds

    Returns:
        SolveResult; the solution is extracted with stray cycles removed
    """
    config = config or SolveConfig()
    started = time.monotonic()
    search = MonolithicSearch(instance, config)
    root = Domains(instance, search.rows)
    feasible_root = root.propagate(range(len(search.rows)))
    logger.info(f"Monolithic search for {config.objective.value}: {instance.summary()}")

    if feasible_root:
        first_use = next((var for var, _ in search.order if instance.variables[var].family == "m"), None)
        if config.threads > 1 and first_use is not None:
            u = instance.variables[first_use].key[0]
            candidates = [
                var for var, _ in search.order
                if instance.variables[var].family == "m" and instance.variables[var].key[0] == u
            ]
            tasks = []
            for index, var in enumerate(candidates):
                domains = root.copy()
                if domains.assign(var, 1):
                    tasks.append((domains, index))
            with ThreadPoolExecutor(max_workers=config.threads) as pool:
                futures = [pool.submit(search.run, d, i) for d, i in tasks]
                for future in futures:
                    future.result()
        else:
            search.run(root)

    stats = SolveStats(nodes_explored=search.explored, wall_time=time.monotonic() - started)
    incumbent = search.incumbent
    solution = None
    value = None
    if incumbent.payload is not None:
        solution = extract_solution(instance, incumbent.payload, clean_cycles=True)
        value = solution.objective_values.value(config.objective)
    if search.timed_out:
        status = SolveStatus.TIME_LIMIT
    elif solution is None:
        status = SolveStatus.INFEASIBLE
    else:
        status = SolveStatus.OPTIMAL
    result = SolveResult(
        objective=config.objective,
        status=status,
        value=value,
        solution=solution,
        bound=value if status is SolveStatus.OPTIMAL else None,
        stats=stats,
        label=instance.context.graph.label if instance.context else "",
    )
    logger.info(result.describe())
    return result
