"""Command-line front-end: chainforge parse|expand|place|pareto|rerun."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from src.chain import format_tree, parse_chain
from src.config import get_config
from src.errors import (
    EXIT_FAILURE,
    EXIT_INFEASIBLE,
    EXIT_OK,
    EXIT_TIME_LIMIT,
    ChainforgeError,
)
from src.graph import combination_total, combinations, combine, expand_all, expand_heuristic, write_dot, write_graph
from src.milp import Objective, build_instance, check_solution, export_lp, import_solution, load_solution, save_solution
from src.model import load_catalog, load_network, load_requests
from src.model.requests import RequestEntry, request_from_entry
from src.pareto import estimate_ranges, sweep, write_front_csv, write_front_solutions
from src.solver import Backend, SolveConfig, SolveStatus, rank, solve_graph
from src.utils.documents import read_json, validate_document, write_json
from src.utils.run_manifest import RunManifest, Stopwatch, new_run_directory, require_manifest

logger = logging.getLogger(__name__)

INPUT_ROLES = ("network", "catalog", "requests")


def _file_name(label: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in label)


def _table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * width for width in widths))
    return "\n".join(lines)


class Run:
    """Inputs, run directory and manifest of one command invocation."""

    def __init__(self, args: argparse.Namespace, argv: Sequence[str]):
        self.args = args
        base = args.run_dir
        if base:
            self.directory = Path(base)
            self.directory.mkdir(parents=True, exist_ok=True)
        else:
            self.directory = new_run_directory(get_config().run_directory, args.command)
        self.manifest = RunManifest(command=args.command, argv=list(argv))
        self.timed = Stopwatch(self.manifest)
        for key, value in sorted(vars(args).items()):
            if key in INPUT_ROLES or key in ("command", "handler", "run_dir"):
                continue
            self.manifest.arguments[key] = value
        with self.timed("load"):
            for role in INPUT_ROLES:
                self.manifest.add_input(role, getattr(args, role))
            self.net = load_network(args.network)
            self.catalog = load_catalog(args.catalog)
            self.requests = load_requests(args.requests, self.catalog, self.net)
        self.asts = {}
        with self.timed("parse"):
            for request in self.requests:
                self.asts[request.id] = parse_chain(request.chain, request)

    def output(self, path: Path) -> Path:
        self.manifest.add_output(path, self.directory)
        return path

    def heuristic_graph(self):
        graphs = [expand_heuristic(self.asts[r.id], r) for r in self.requests]
        return combine(graphs)

    def expansion_sets(self):
        return [expand_all(self.asts[r.id], r) for r in self.requests]

    def finish(self) -> None:
        path = self.manifest.write(self.directory)
        print(f"run directory: {self.directory}")
        logger.info(f"Wrote manifest {path}")


def solve_config(args: argparse.Namespace, objective: Objective) -> SolveConfig:
    options = {"objective": objective, "backend": Backend(args.method)}
    if args.time_limit is not None:
        options["time_limit"] = args.time_limit
    if args.threads is not None:
        options["threads"] = args.threads
    return SolveConfig(**options)


def cmd_parse(args: argparse.Namespace, argv: Sequence[str]) -> int:
    """Parse every chain and print its module tree."""
    max_branches = get_config().max_branches
    if args.network and args.catalog:
        requests = load_requests(args.requests, load_catalog(args.catalog), load_network(args.network))
    else:
        entries = validate_document(read_json(args.requests), List[RequestEntry], args.requests)
        requests = [request_from_entry(entry) for entry in entries]

    code = EXIT_OK
    for request in requests:
        try:
            ast = parse_chain(request.chain, request, max_branches)
        except ChainforgeError as e:
            print(f"request {request.id}: {e}")
            code = max(code, e.exit_code)
            continue
        print(f"request {request.id}: ok")
        print(format_tree(ast))
    return code


def cmd_expand(args: argparse.Namespace, argv: Sequence[str]) -> int:
    """Expand requests into VNF graphs and report the combination count."""
    run = Run(args, argv)
    graph_dir = run.directory / "graphs"
    rows = []
    with run.timed("expand"):
        if args.mode == "heuristic":
            for request in run.requests:
                graph = expand_heuristic(run.asts[request.id], request)
                written = [write_graph(graph, graph_dir / f"{_file_name(graph.label)}.json")]
                if args.dot:
                    written.append(write_dot(graph, graph_dir / f"{_file_name(graph.label)}.dot"))
                for path in written:
                    run.output(path)
                rows.append((request.id, 1, graph.total_rate))
            total = 1
        else:
            sets = run.expansion_sets()
            for expansion in sets:
                for graph in expansion.graphs:
                    run.output(write_graph(graph, graph_dir / f"{_file_name(graph.label)}.json"))
                    if args.dot:
                        run.output(write_dot(graph, graph_dir / f"{_file_name(graph.label)}.dot"))
                rows.append((expansion.request, len(expansion.graphs), min(g.total_rate for g in expansion.graphs)))
            total = combination_total(sets)
    print(_table(("request", "graphs", "min_total_rate"), rows))
    print(f"combinations: {total}")
    run.manifest.arguments["combinations"] = total
    run.finish()
    return EXIT_OK


def _print_results(results) -> None:
    rows = []
    for result in results:
        values = result.solution.objective_values if result.solution else None
        rows.append(
            (
                result.label,
                result.status.value,
                "-" if result.value is None else result.value,
                "-" if values is None else values.remdr,
                "-" if values is None else values.used_nodes,
                "-" if values is None else values.latency,
                f"{result.stats.wall_time:.2f}",
            )
        )
    print(_table(("graph", "status", "value", "remdr", "used_nodes", "latency", "time_s"), rows))


def _archive(run: Run, graph, solution, name: str, label: str) -> int:
    """Save a solution and its check report; the reloaded file is checked again."""
    path = run.output(save_solution(solution, run.directory / f"{name}.json", label))
    report = check_solution(run.net, run.catalog, graph, load_solution(path))
    run.output(write_json(run.directory / f"{name}.check.json", report.to_json()))
    if not report.clean:
        logger.error(f"Solution {path} fails checks: {report.tags()}")
        return EXIT_FAILURE
    return EXIT_OK


def cmd_place(args: argparse.Namespace, argv: Sequence[str]) -> int:
    """Place the expanded requests with the built-in solvers or export the model."""
    run = Run(args, argv)
    objective = Objective(args.objective.upper())
    if args.mode == "heuristic":
        graphs = [run.heuristic_graph()]
    else:
        graphs = list(combinations(run.expansion_sets()))

    if args.backend == "export":
        code = EXIT_OK
        for index, graph in enumerate(graphs):
            instance = build_instance(run.net, run.catalog, graph)
            name = "model" if len(graphs) == 1 else f"model_{index:04d}"
            run.output(export_lp(instance, objective, run.directory / f"{name}.lp"))
            if args.import_solution:
                solution = import_solution(instance, args.import_solution)
                run.manifest.arguments["status"] = SolveStatus.FEASIBLE.value
                print(f"{graph.label}: imported {SolveStatus.FEASIBLE.value}")
                code = max(code, _archive(run, graph, solution, "solution", graph.label))
        if args.import_solution and len(graphs) != 1:
            logger.warning("Solution import applies to every exported model; use --mode heuristic")
        run.finish()
        return code

    config = solve_config(args, objective)
    results = []
    with run.timed("solve"):
        for graph in graphs:
            results.append((solve_graph(run.net, run.catalog, graph, config), graph))
    ranked = rank([r for r, _ in results], objective)
    graph_of = {id(r): g for r, g in results}
    _print_results(ranked)

    code = EXIT_OK
    for position, result in enumerate(ranked):
        if result.solution is None:
            continue
        name = "solution" if position == 0 else f"solutions/{position:04d}"
        code = max(code, _archive(run, graph_of[id(result)], result.solution, name, result.label))
    best = ranked[0]
    run.manifest.arguments["status"] = best.status.value
    run.finish()
    if code != EXIT_OK:
        return code
    if best.status is SolveStatus.TIME_LIMIT:
        return EXIT_TIME_LIMIT
    if best.solution is None:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_pareto(args: argparse.Namespace, argv: Sequence[str]) -> int:
    """Estimate metric ranges, sweep the epsilon-constraint cells and write the front."""
    run = Run(args, argv)
    graph = run.heuristic_graph()
    config = solve_config(args, Objective.LATENCY)
    with run.timed("ranges"):
        ranges = estimate_ranges(run.net, run.catalog, graph, config)
    remdr_steps, refine, used_nodes_max = args.remdr_steps, not args.no_refine, args.used_nodes_max
    if args.grid is not None:
        refine = False
        remdr_steps = remdr_steps or args.grid
        grid_max = int(ranges.used_nodes.best) + args.grid - 1
        used_nodes_max = grid_max if used_nodes_max is None else min(used_nodes_max, grid_max)
    with run.timed("sweep"):
        front = sweep(
            run.net,
            run.catalog,
            graph,
            ranges,
            config,
            remdr_steps=remdr_steps,
            refine=refine,
            used_nodes_max=used_nodes_max,
            threads=args.threads,
        )
    run.output(write_front_csv(front, run.directory / "front.csv"))
    for path in write_front_solutions(front, run.directory / "solutions"):
        run.output(path)
    rows = [(p.solution_id, p.remdr, p.used_nodes, p.latency, p.provenance) for p in front]
    print(_table(("solution_id", "remdr", "used_nodes", "latency", "cell"), rows))
    run.finish()
    return EXIT_OK


def cmd_rerun(args: argparse.Namespace, argv: Sequence[str]) -> int:
    """Repeat a recorded run after checking that its inputs are unchanged."""
    manifest = require_manifest(args.manifest)
    changed = manifest.verify_hashes()
    if changed:
        print(f"inputs changed since the recorded run: {', '.join(changed)}", file=sys.stderr)
        return EXIT_FAILURE
    replay: List[str] = []
    recorded = iter(manifest.argv)
    for token in recorded:
        if token == "--run-dir":
            next(recorded, None)
        elif not token.startswith("--run-dir="):
            replay.append(token)
    for role, entry in manifest.inputs.items():
        replay += [f"--{role}", entry.path]
    run_dir = args.run_dir or str(new_run_directory(get_config().run_directory, manifest.command))
    replay += ["--run-dir", run_dir]
    logger.info(f"Re-running {manifest.command}: {replay}")
    return main(replay)


def _add_inputs(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--network", required=required, help="Substrate network JSON")
    parser.add_argument("--catalog", required=required, help="Function catalog JSON")
    parser.add_argument("--requests", required=True, help="Deployment requests JSON")
    parser.add_argument("--run-dir", dest="run_dir", help="Output directory (default: a new one under run_directory)")


def _add_solver(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--method", choices=[b.value for b in Backend], default=Backend.DECOMPOSED.value)
    parser.add_argument("--time-limit", dest="time_limit", type=float, help="Seconds per solve")
    parser.add_argument("--threads", type=int, help="Worker threads")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chainforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="Parse chaining requests and print their module trees")
    _add_inputs(p, required=False)
    p.set_defaults(handler=cmd_parse)

    p = sub.add_parser("expand", help="Expand requests into VNF graphs")
    _add_inputs(p)
    p.add_argument("--mode", choices=["all", "heuristic"], default="all")
    p.add_argument("--dot", action="store_true", help="Also write DOT files")
    p.set_defaults(handler=cmd_expand)

    p = sub.add_parser("place", help="Place the requests on the substrate network")
    _add_inputs(p)
    _add_solver(p)
    p.add_argument("--objective", choices=[o.value.lower() for o in Objective], default="used_nodes")
    p.add_argument("--backend", choices=["builtin", "export"], default="builtin")
    p.add_argument("--mode", choices=["all", "heuristic"], default="heuristic")
    p.add_argument("--import-solution", dest="import_solution", help="External solver solution to import")
    p.set_defaults(handler=cmd_place)

    p = sub.add_parser("pareto", help="Compute the Pareto front of the heuristic expansion")
    _add_inputs(p)
    _add_solver(p)
    p.add_argument("--remdr-steps", dest="remdr_steps", type=int, help="Uniform remdr thresholds per column")
    p.add_argument("--no-refine", dest="no_refine", action="store_true", help="Use the uniform remdr grid only")
    p.add_argument("--used-nodes-max", dest="used_nodes_max", type=int, help="Largest used-node cap")
    p.add_argument(
        "--grid",
        type=_positive_int,
        help="Uniform epsilon grid: N remdr thresholds by N used-node caps, no refinement",
    )
    p.set_defaults(handler=cmd_pareto)

    p = sub.add_parser("rerun", help="Repeat a run from its manifest")
    p.add_argument("manifest", help="manifest.json or its run directory")
    p.add_argument("--run-dir", dest="run_dir", help="Output directory for the repeated run")
    p.set_defaults(handler=cmd_rerun)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    get_config()
    try:
        return args.handler(args, argv)
    except ChainforgeError as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
