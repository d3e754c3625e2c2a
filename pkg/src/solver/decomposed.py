"""Exact two-stage search: function mapping first, path routing second."""
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx

from src.graph.vnf_graph import EdgeKey, VnfGraph
from src.milp.builder import can_host
from src.milp.instance import Objective
from src.milp.solution import RoleAssignment, RoutedPath, assemble_solution
from src.model.catalog import FunctionCatalog, Role
from src.model.network import SubstrateNetwork
from src.solver.types import SolveConfig, SolveResult, SolveStats, SolveStatus

logger = logging.getLogger(__name__)

Candidate = Tuple[Fraction, int, Tuple[EdgeKey, ...]]


class _TimeUp(Exception):
    pass


class Incumbent:
    """Best solution found so far, shared between search workers."""

    def __init__(self, objective: Objective):
        self.objective = objective
        self.lock = threading.Lock()
        self.value = None
        self.payload = None
        self.task: Optional[int] = None

    def can_improve(self, bound) -> bool:
        with self.lock:
            return self.value is None or self.objective.better(bound, self.value)

    def offer(self, value, payload, task: int = 0) -> bool:
        with self.lock:
            if (
                self.value is None
                or self.objective.better(value, self.value)
                or (value == self.value and self.task is not None and task < self.task)
            ):
                self.value, self.payload, self.task = value, payload, task
                return True
            return False


def assign_roles(
    net: SubstrateNetwork,
    catalog: FunctionCatalog,
    node: str,
    functions: Sequence[Tuple[str, str]],
) -> Optional[Dict[str, Role]]:
    """Find roles for the (use, function) pairs mapped to one node within its capacities.

    Forced roles are fixed; flexible functions are partitioned between the
    data-center and switch resource, data-center first.
    """
    dc_cap, switch_cap = net.dc_capacity(node), net.switch_capacity(node)
    roles: Dict[str, Role] = {}
    dc = switch = Fraction(0)
    flexible = []
    for use, function in functions:
        spec = catalog[function]
        if spec.datacenter_only:
            roles[use] = Role.DATACENTER
            dc += spec.dc_demand
        elif spec.switch_only:
            roles[use] = Role.SWITCH
            switch += spec.switch_demand
        else:
            flexible.append((use, spec))
    if dc > dc_cap or switch > switch_cap:
        return None
    flexible.sort(key=lambda item: (-(item[1].dc_demand + item[1].switch_demand), item[0]))

    def place(index: int, dc: Fraction, switch: Fraction) -> bool:
        if index == len(flexible):
            return True
        use, spec = flexible[index]
        if dc + spec.dc_demand <= dc_cap:
            roles[use] = Role.DATACENTER
            if place(index + 1, dc + spec.dc_demand, switch):
                return True
        if switch + spec.switch_demand <= switch_cap:
            roles[use] = Role.SWITCH
            if place(index + 1, dc, switch + spec.switch_demand):
                return True
        roles.pop(use, None)
        return False

    return roles if place(0, dc, switch) else None


class DecomposedSearch:
    """Branch and bound over use mappings with an inner routing search."""

    def __init__(
        self,
        net: SubstrateNetwork,
        catalog: FunctionCatalog,
        graph: VnfGraph,
        config: SolveConfig,
    ):
        self.net = net
        self.catalog = catalog
        self.graph = graph
        self.config = config
        self.objective = config.objective
        self.incumbent = Incumbent(self.objective)
        self.deadline = time.monotonic() + config.time_limit
        self.timed_out = False
        self.explored = 0
        self.steps = 0
        self.counter_lock = threading.Lock()

        # Fail-first orders
        self.uses = sorted(
            graph.uses,
            key=lambda u: (
                -(catalog[graph.function(u)].dc_demand + catalog[graph.function(u)].switch_demand),
                u,
            ),
        )
        self.hosts = {
            u: [v for v in net.nodes if can_host(net, catalog, graph.function(u), v)] for u in self.uses
        }
        self.fixed = {a: graph.location(a) for a in graph.endpoints}
        self.route_order = sorted(graph.edge_keys, key=lambda k: (-graph.rate(k), k))
        self.transit_total = sum((net.rate(e) for e in net.edges if e[0] != e[1]), Fraction(0))

        transit = net.transit_graph
        self.hops = dict(nx.all_pairs_shortest_path_length(transit))
        self.fastest = dict(nx.all_pairs_dijkstra_path_length(transit, weight="latency"))
        self._paths: Dict[Tuple[str, str], List[Candidate]] = {}
        self.bounded_pairs = {
            pair: set(graph.bounded_edges(pair)) for pair in graph.latency_bounds
        }

    # Distances

    def hop_distance(self, x: str, y: str) -> Optional[int]:
        if x == y:
            return 0 if self.net.has_edge(x, x) else None
        return self.hops.get(x, {}).get(y)

    def min_latency(self, x: str, y: str) -> Optional[Fraction]:
        if x == y:
            return self.net.latency((x, x)) if self.net.has_edge(x, x) else None
        value = self.fastest.get(x, {}).get(y)
        return None if value is None else Fraction(value)

    def paths(self, x: str, y: str) -> List[Candidate]:
        key = (x, y)
        cached = self._paths.get(key)
        if cached is not None:
            return cached
        if x == y:
            found = [(self.net.latency((x, x)), 1, ((x, x),))] if self.net.has_edge(x, x) else []
        else:
            found = []
            for nodes in nx.all_simple_paths(self.net.transit_graph, x, y):
                edges = tuple(zip(nodes[:-1], nodes[1:]))
                latency = sum((self.net.latency(e) for e in edges), Fraction(0))
                found.append((latency, len(edges), edges))
            if self.objective is Objective.REMDR:
                found.sort(key=lambda c: (c[1], c[0], c[2]))
            else:
                found.sort(key=lambda c: (c[0], c[1], c[2]))
        self._paths[key] = found
        return found

    # Bounds

    def tick(self) -> None:
        self.steps += 1
        if self.steps % 256 == 0 and time.monotonic() > self.deadline:
            self.timed_out = True
            raise _TimeUp()

    def mapping_bound(self, mapping: Dict[str, str]):
        """Optimistic objective for a partial mapping; None if it cannot be completed."""
        remdr = self.transit_total
        latency = Fraction(0)
        pair_latency = {pair: Fraction(0) for pair in self.bounded_pairs}
        weights = self.graph.latency_weights
        for key in self.graph.edge_keys:
            x, y = mapping.get(key[0]), mapping.get(key[1])
            if x is None or y is None:
                continue
            hops = self.hop_distance(x, y)
            fastest = self.min_latency(x, y)
            if hops is None or fastest is None:
                return None
            if x != y:
                remdr -= self.graph.rate(key) * hops
            latency += weights.get(key, 0) * fastest
            for pair, edges in self.bounded_pairs.items():
                if key in edges:
                    pair_latency[pair] += fastest
        for pair, total in pair_latency.items():
            if total > self.graph.latency_bounds[pair]:
                return None
        used = len({mapping[u] for u in self.uses if u in mapping})
        return {Objective.REMDR: remdr, Objective.USED_NODES: used, Objective.LATENCY: latency}

    def bounds_allow(self, optimistic) -> bool:
        """Extra bounds that an optimistic value can already refute."""
        for bound in self.config.extra_bounds:
            value = optimistic[bound.metric]
            best_is_high = bound.metric is Objective.REMDR
            if bound.relation.value == "<=" and not best_is_high and value > bound.value:
                return False
            if bound.relation.value == ">=" and best_is_high and value < bound.value:
                return False
        return True

    # Mapping stage

    def search(self, task: int = 0, first_choice: Optional[str] = None) -> None:
        mapping = dict(self.fixed)
        usage: Dict[str, List[Tuple[str, str]]] = {v: [] for v in self.net.nodes}
        try:
            self._map(0, mapping, usage, task, first_choice)
        except _TimeUp:
            pass

    def _map(self, depth, mapping, usage, task, first_choice) -> None:
        self.tick()
        if depth == len(self.uses):
            with self.counter_lock:
                self.explored += 1
                explored = self.explored
            if explored % self.config.progress_interval == 0:
                logger.info(
                    f"explored={explored} incumbent={self.incumbent.value} "
                    f"bound={self.mapping_bound(mapping)[self.objective]}"
                )
            self._route_mapping(mapping, usage, task)
            return

        u = self.uses[depth]
        f = self.graph.function(u)
        spec = self.catalog[f]
        choices = self.hosts[u]
        if depth == 0 and first_choice is not None:
            choices = [first_choice]
        else:
            choices = sorted(choices, key=lambda v: (-self._residual(v, usage), v))

        for v in choices:
            same = [w for w, _ in usage[v] if self.graph.function(w) == f]
            if len(same) + 1 > spec.max_requests:
                continue
            nodes_with_f = {mapping[w] for w in self.uses[:depth] if self.graph.function(w) == f}
            if v not in nodes_with_f and len(nodes_with_f) + 1 > spec.max_instances:
                continue
            usage[v].append((u, f))
            if assign_roles(self.net, self.catalog, v, usage[v]) is not None:
                mapping[u] = v
                optimistic = self.mapping_bound(mapping)
                if (
                    optimistic is not None
                    and self.bounds_allow(optimistic)
                    and self.incumbent.can_improve(optimistic[self.objective])
                ):
                    self._map(depth + 1, mapping, usage, task, first_choice)
                del mapping[u]
            usage[v].pop()

    def _residual(self, v: str, usage) -> Fraction:
        used = Fraction(0)
        for u, f in usage[v]:
            spec = self.catalog[f]
            used += spec.dc_demand if spec.dc_demand > 0 else spec.switch_demand
        return self.net.dc_capacity(v) + self.net.switch_capacity(v) - used

    # Routing stage

    def _route_mapping(self, mapping, usage, task) -> None:
        residual = {e: self.net.rate(e) for e in self.net.edges}
        routed: Dict[EdgeKey, Tuple[EdgeKey, ...]] = {}
        self._route(0, mapping, usage, residual, routed, task)

    def _routing_bound(self, mapping, routed, depth):
        remdr = self.transit_total
        latency = Fraction(0)
        weights = self.graph.latency_weights
        edge_latency: Dict[EdgeKey, Fraction] = {}
        for key in self.route_order:
            x, y = mapping[key[0]], mapping[key[1]]
            if key in routed:
                edges = routed[key]
                remdr -= self.graph.rate(key) * sum(1 for e in edges if e[0] != e[1])
                lat = sum((self.net.latency(e) for e in edges), Fraction(0))
            else:
                if x != y:
                    remdr -= self.graph.rate(key) * self.hop_distance(x, y)
                lat = self.min_latency(x, y)
            edge_latency[key] = lat
            latency += weights.get(key, 0) * lat
        for pair, edges in self.bounded_pairs.items():
            if sum((edge_latency[k] for k in edges), Fraction(0)) > self.graph.latency_bounds[pair]:
                return None
        used = len({mapping[u] for u in self.uses})
        return {Objective.REMDR: remdr, Objective.USED_NODES: used, Objective.LATENCY: latency}

    def _route(self, depth, mapping, usage, residual, routed, task) -> None:
        self.tick()
        if depth == len(self.route_order):
            self._complete(mapping, usage, routed, task)
            return

        key = self.route_order[depth]
        rate = self.graph.rate(key)
        x, y = mapping[key[0]], mapping[key[1]]
        for _, _, edges in self.paths(x, y):
            if any(residual[e] < rate for e in edges):
                continue
            routed[key] = edges
            optimistic = self._routing_bound(mapping, routed, depth + 1)
            if (
                optimistic is not None
                and self.bounds_allow(optimistic)
                and self.incumbent.can_improve(optimistic[self.objective])
            ):
                for e in edges:
                    residual[e] -= rate
                self._route(depth + 1, mapping, usage, residual, routed, task)
                for e in edges:
                    residual[e] += rate
            del routed[key]

    def _complete(self, mapping, usage, routed, task) -> None:
        roles: Dict[str, RoleAssignment] = {}
        for v, placed in usage.items():
            if not placed:
                continue
            assigned = assign_roles(self.net, self.catalog, v, placed)
            for u, role in assigned.items():
                roles[u] = RoleAssignment.of(role)
        paths = {
            key: RoutedPath(source=mapping[key[0]], target=mapping[key[1]], edges=edges)
            for key, edges in routed.items()
        }
        solution = assemble_solution(self.net, self.catalog, self.graph, mapping, roles, paths)
        values = solution.objective_values
        if not all(bound.holds(values) for bound in self.config.extra_bounds):
            return
        self.incumbent.offer(values.value(self.objective), solution, task)


def solve_decomposed(
    net: SubstrateNetwork,
    catalog: FunctionCatalog,
    graph: VnfGraph,
    config: Optional[SolveConfig] = None,
) -> SolveResult:
    """Solve the placement exactly by mapping-then-routing branch and bound.

    Args:
        net: Substrate network
        catalog: Function catalog
        graph: VNF graph with pair paths
        config: Objective, limits and extra bounds

    Returns:
        SolveResult with status Optimal, Infeasible or TimeLimit
    """
    config = config or SolveConfig()
    started = time.monotonic()
    search = DecomposedSearch(net, catalog, graph, config)
    logger.info(
        f"Decomposed search for {config.objective.value} over {len(search.uses)} uses, "
        f"{len(net.nodes)} nodes, threads={config.threads}"
    )

    if config.threads > 1 and search.uses:
        first = search.uses[0]
        choices = sorted(search.hosts[first], key=lambda v: (-net.dc_capacity(v) - net.switch_capacity(v), v))
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            futures = [pool.submit(search.search, index, v) for index, v in enumerate(choices)]
            for future in futures:
                future.result()
    else:
        search.search()

    stats = SolveStats(nodes_explored=search.explored, wall_time=time.monotonic() - started)
    incumbent = search.incumbent
    if search.timed_out:
        status = SolveStatus.TIME_LIMIT
    elif incumbent.value is None:
        status = SolveStatus.INFEASIBLE
    else:
        status = SolveStatus.OPTIMAL
    bound = incumbent.value if status is SolveStatus.OPTIMAL else None
    result = SolveResult(
        objective=config.objective,
        status=status,
        value=incumbent.value,
        solution=incumbent.payload,
        bound=bound,
        stats=stats,
        label=graph.label,
    )
    logger.info(result.describe())
    return result
