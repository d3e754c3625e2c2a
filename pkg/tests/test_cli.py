import json
import shutil

import pytest

from conftest import ABILENE_DIR, FIXTURES_DIR, fixture_args, load_fixture, heuristic_graph
from oracle import enumerate_placements, model_values
from src.main import main
from src.milp import build_instance
from src.utils.run_manifest import RunManifest


def abilene_args(requests="requests_144.json"):
    return [
        "--network", str(ABILENE_DIR / "network.json"),
        "--catalog", str(ABILENE_DIR / "catalog.json"),
        "--requests", str(ABILENE_DIR / requests),
    ]


def write_requests(tmp_path, chain, uses=None):
    uses = uses or [{"id": "fw1", "function": "fw"}]
    path = tmp_path / "requests.json"
    path.write_text(
        json.dumps(
            [
                {
                    "id": "r1",
                    "uses": uses,
                    "chain": chain,
                    "endpoints": [{"id": "a1", "loc": "A"}, {"id": "a2", "loc": "B"}],
                    "pairs": [["a1", "a2"]],
                    "d_in": 1,
                }
            ]
        )
    )
    return path


def tiny_inputs(requests):
    return [
        "--network", str(FIXTURES_DIR / "tiny" / "network.json"),
        "--catalog", str(FIXTURES_DIR / "tiny" / "catalog.json"),
        "--requests", str(requests),
    ]


def test_expand_counts_combinations(tmp_path, capsys):
    assert main(["expand", *abilene_args(), "--run-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "combinations: 144" in out
    assert len(list((tmp_path / "graphs").glob("*.json"))) == 6 + 6 + 4
    manifest = RunManifest.load(tmp_path)
    assert set(manifest.inputs) == {"network", "catalog", "requests"}
    assert manifest.arguments["combinations"] == 144


def test_expand_heuristic_with_dot(tmp_path, capsys):
    assert main(["expand", *abilene_args("requests.json"), "--mode", "heuristic", "--dot", "--run-dir", str(tmp_path)]) == 0
    assert "combinations: 1" in capsys.readouterr().out
    assert sorted(p.name for p in (tmp_path / "graphs").glob("*.dot")) == [
        "tenant_heuristic.dot",
        "video_heuristic.dot",
        "web_heuristic.dot",
    ]


def test_parse_prints_module_trees(capsys):
    assert main(["parse", "--requests", str(ABILENE_DIR / "requests.json")]) == 0
    out = capsys.readouterr().out
    assert "request web: ok" in out
    assert "OptOrder" in out


def test_parse_syntax_error_exit_code(tmp_path, capsys):
    path = write_requests(tmp_path, "a1 . . a2")
    assert main(["parse", "--requests", str(path)]) == 2
    assert "line 1, column 6" in capsys.readouterr().out


def test_parse_unknown_symbol_exit_code(tmp_path):
    path = write_requests(tmp_path, "a1 . fw9 . a2")
    assert main(["parse", "--requests", str(path)]) == 3


def test_place_writes_checked_solution(tmp_path, capsys):
    args = fixture_args(FIXTURES_DIR / "tiny")
    assert main(["place", *args, "--objective", "remdr", "--run-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "Optimal" in out
    assert (tmp_path / "solution.json").exists()
    assert json.loads((tmp_path / "solution.check.json").read_text()) == []
    assert RunManifest.load(tmp_path).arguments["status"] == "Optimal"


def test_place_infeasible_exit_code(tmp_path):
    args = fixture_args(FIXTURES_DIR / "infeasible")
    assert main(["place", *args, "--run-dir", str(tmp_path)]) == 4
    assert not (tmp_path / "solution.json").exists()


def test_place_all_combinations_are_ranked(tmp_path, capsys):
    uses = [{"id": "fw1", "function": "fw"}, {"id": "fw2", "function": "fw"}]
    path = write_requests(tmp_path, "a1 . (fw1, fw2) . a2", uses)
    run_dir = tmp_path / "run"
    code = main(["place", *tiny_inputs(path), "--mode", "all", "--objective", "remdr", "--run-dir", str(run_dir)])
    assert code == 0
    assert (run_dir / "solution.json").exists()
    assert (run_dir / "solutions" / "0001.json").exists()
    assert "combinations" not in capsys.readouterr().out


def test_place_monolithic_method(tmp_path):
    args = fixture_args(FIXTURES_DIR / "tiny")
    assert main(["place", *args, "--method", "monolithic", "--objective", "latency", "--run-dir", str(tmp_path)]) == 0


def test_export_and_import(tmp_path, capsys):
    args = fixture_args(FIXTURES_DIR / "tiny")
    export_dir = tmp_path / "export"
    assert main(["place", *args, "--backend", "export", "--run-dir", str(export_dir)]) == 0
    assert (export_dir / "model.lp").read_text().startswith("\\ Placement instance")

    net, catalog, requests = load_fixture("tiny")
    graph = heuristic_graph(requests)
    inst = build_instance(net, catalog, graph)
    placement = next(enumerate_placements(net, catalog, graph))
    values = model_values(inst, net, catalog, graph, placement)
    solution_file = tmp_path / "external.sol"
    solution_file.write_text("".join(f"{v.name} {float(values[v.index])}\n" for v in inst.variables))

    import_dir = tmp_path / "import"
    code = main(["place", *args, "--backend", "export", "--import-solution", str(solution_file),
                 "--run-dir", str(import_dir)])
    assert code == 0
    assert "imported Feasible" in capsys.readouterr().out
    assert json.loads((import_dir / "solution.check.json").read_text()) == []


def test_import_of_unknown_variable_fails(tmp_path):
    args = fixture_args(FIXTURES_DIR / "tiny")
    bad = tmp_path / "bad.sol"
    bad.write_text("nonsense_var 1\n")
    code = main(["place", *args, "--backend", "export", "--import-solution", str(bad), "--run-dir", str(tmp_path / "r")])
    assert code == 3


def test_pareto_writes_front(tmp_path, capsys):
    args = fixture_args(FIXTURES_DIR / "ample")
    assert main(["pareto", *args, "--run-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "front.csv").read_text().splitlines()
    assert lines == ["remdr,used_nodes,latency,solution_id", "198,1,1,p000"]
    assert (tmp_path / "solutions" / "p000.json").exists()


def test_pareto_uniform_grid(tmp_path):
    args = fixture_args(FIXTURES_DIR / "constrained")
    assert main(["pareto", *args, "--grid", "3", "--run-dir", str(tmp_path)]) == 0
    assert (tmp_path / "front.csv").read_text().splitlines() == [
        "remdr,used_nodes,latency,solution_id",
        "56,1,2,p000",
        "58,1,10,p001",
    ]
    assert RunManifest.load(tmp_path).arguments["grid"] == 3


def test_pareto_grid_must_be_positive(tmp_path):
    args = fixture_args(FIXTURES_DIR / "constrained")
    with pytest.raises(SystemExit):
        main(["pareto", *args, "--grid", "0", "--run-dir", str(tmp_path)])


def test_pareto_infeasible_exit_code(tmp_path):
    args = fixture_args(FIXTURES_DIR / "infeasible")
    assert main(["pareto", *args, "--run-dir", str(tmp_path)]) == 4


@pytest.fixture
def copied_inputs(tmp_path):
    directory = tmp_path / "inputs"
    shutil.copytree(FIXTURES_DIR / "constrained", directory)
    return directory


def test_rerun_reproduces_the_front(copied_inputs, tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(["pareto", *fixture_args(copied_inputs), "--run-dir", str(first)]) == 0
    assert main(["rerun", str(first), "--run-dir", str(second)]) == 0
    assert (first / "front.csv").read_text() == (second / "front.csv").read_text()
    assert RunManifest.load(second).argv[-2:] == ["--run-dir", str(second)]


def test_rerun_refuses_changed_inputs(copied_inputs, tmp_path, capsys):
    first = tmp_path / "first"
    assert main(["pareto", *fixture_args(copied_inputs), "--run-dir", str(first)]) == 0
    network = copied_inputs / "network.json"
    network.write_text(network.read_text().replace('"d": 10', '"d": 20'))
    assert main(["rerun", str(first), "--run-dir", str(tmp_path / "second")]) == 1
    assert "network" in capsys.readouterr().err
