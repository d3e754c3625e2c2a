"""Shared builders for networks, catalogs, requests and graphs."""
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import pytest

from src.chain import parse_chain
from src.graph import combine, expand_heuristic
from src.model import (
    catalog_from_dict,
    load_catalog,
    load_network,
    load_requests,
    network_from_dict,
    requests_from_list,
)

DATA_DIR = Path(__file__).resolve().parents[1] / "data"
FIXTURES_DIR = DATA_DIR / "fixtures"
ABILENE_DIR = DATA_DIR / "abilene"


def make_network(
    nodes: Dict[str, Tuple[object, object]],
    links: Iterable[Tuple[str, str, object, object]],
    self_loops: Optional[Tuple[object, object]] = (100, 0),
    symmetric: bool = True,
):
    """Network from ``{node: (c_d, c_s)}`` and ``(src, dst, d, l)`` links.

    Symmetric links are added in both directions; self-loops with the given
    (d, l) are added on every node unless None.
    """
    edges = []
    seen = set()
    for src, dst, d, l in links:
        pairs = [(src, dst), (dst, src)] if symmetric else [(src, dst)]
        for a, b in pairs:
            if (a, b) not in seen:
                seen.add((a, b))
                edges.append({"src": a, "dst": b, "d": str(d), "l": str(l)})
    if self_loops is not None:
        for node in nodes:
            edges.append({"src": node, "dst": node, "d": str(self_loops[0]), "l": str(self_loops[1])})
    return network_from_dict(
        {
            "nodes": [{"id": n, "c_d": str(c_d), "c_s": str(c_s)} for n, (c_d, c_s) in nodes.items()],
            "edges": edges,
        }
    )


def make_catalog(functions: Dict[str, Tuple[object, object, int, int]]):
    """Catalog from ``{id: (p_d, p_s, n_inst, n_req)}``."""
    return catalog_from_dict(
        {
            "functions": [
                {"id": f, "p_d": str(p_d), "p_s": str(p_s), "n_inst": n_inst, "n_req": n_req}
                for f, (p_d, p_s, n_inst, n_req) in functions.items()
            ]
        }
    )


def request_entry(
    rid: str,
    chain: str,
    uses: Dict[str, object],
    endpoints: Dict[str, str],
    pairs: Sequence[Tuple[str, str]],
    d_in: object = 1,
    l_req: Optional[Dict[Tuple[str, str], object]] = None,
) -> dict:
    """Request JSON object; a use is ``function`` or ``(function, [ratios])``."""
    use_list = []
    for use_id, spec in uses.items():
        if isinstance(spec, tuple):
            function, ratios = spec
            use_list.append({"id": use_id, "function": function, "ratios": [str(r) for r in ratios]})
        else:
            use_list.append({"id": use_id, "function": spec})
    return {
        "id": rid,
        "uses": use_list,
        "chain": chain,
        "endpoints": [{"id": a, "loc": loc} for a, loc in endpoints.items()],
        "pairs": [list(p) for p in pairs],
        "d_in": str(d_in),
        "l_req": [{"src": s, "dst": d, "bound": str(b)} for (s, d), b in (l_req or {}).items()],
    }


def make_requests(entries: List[dict], catalog, net):
    return requests_from_list(entries, catalog, net)


def heuristic_graph(requests):
    graphs = [expand_heuristic(parse_chain(r.chain, r), r) for r in requests]
    return combine(graphs)


def load_fixture(name: str):
    directory = FIXTURES_DIR / name
    net = load_network(directory / "network.json")
    catalog = load_catalog(directory / "catalog.json")
    requests = load_requests(directory / "requests.json", catalog, net)
    return net, catalog, requests


def fixture_args(directory: Path) -> List[str]:
    return [
        "--network", str(directory / "network.json"),
        "--catalog", str(directory / "catalog.json"),
        "--requests", str(directory / "requests.json"),
    ]


@pytest.fixture
def tiny():
    net, catalog, requests = load_fixture("tiny")
    return net, catalog, heuristic_graph(requests)


@pytest.fixture
def constrained():
    net, catalog, requests = load_fixture("constrained")
    return net, catalog, heuristic_graph(requests)


@pytest.fixture
def ample():
    net, catalog, requests = load_fixture("ample")
    return net, catalog, heuristic_graph(requests)


@pytest.fixture
def infeasible():
    net, catalog, requests = load_fixture("infeasible")
    return net, catalog, heuristic_graph(requests)


@pytest.fixture
def abilene():
    net = load_network(ABILENE_DIR / "network.json")
    catalog = load_catalog(ABILENE_DIR / "catalog.json")
    requests = load_requests(ABILENE_DIR / "requests.json", catalog, net)
    return net, catalog, requests


@pytest.fixture
def square_net():
    """Four nodes, every ordered pair linked, unit latency."""
    return make_network(
        {"A": (4, 1), "B": (4, 1), "C": (4, 1), "D": (0, 1)},
        [(a, b, 10, 1) for a, b in [("A", "B"), ("A", "C"), ("A", "D"), ("B", "C"), ("B", "D"), ("C", "D")]],
    )


def frac(value) -> Fraction:
    return Fraction(value)
