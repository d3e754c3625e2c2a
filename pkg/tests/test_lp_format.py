from fractions import Fraction

import pytest

from oracle import enumerate_placements, model_values
from src.errors import SolutionImportError
from src.milp import (
    ConstraintTag,
    Objective,
    PlacementInstance,
    Relation,
    Sense,
    build_instance,
    check_solution,
    export_lp,
    import_solution,
    read_lp,
)
from src.milp.instance import VarKind
from src.milp.lp_format import scaled_row


@pytest.fixture
def tiny_instance(tiny):
    net, catalog, graph = tiny
    return build_instance(net, catalog, graph)


def test_export_matches_instance(tiny_instance, tmp_path):
    inst = tiny_instance
    path = export_lp(inst, Objective.REMDR, tmp_path / "model.lp")
    model = read_lp(path)

    assert model.sense is Sense.MAX
    names = [v.name for v in inst.variables]
    assert model.objective == {names[var]: coef for var, coef in inst.objectives[Objective.REMDR].items()}
    assert len(model.rows) == len(inst.constraints)
    for row in inst.constraints:
        terms, rhs = scaled_row(row)
        parsed = model.rows[row.name]
        assert parsed.relation is row.relation
        assert parsed.rhs == rhs
        assert parsed.terms == {names[var]: coef for var, coef in terms.items()}
    assert set(model.binaries) == {v.name for v in inst.variables if v.is_binary}
    for var in inst.variables:
        if not var.is_binary:
            assert model.bounds[var.name] == (var.lb, var.ub)


def test_minimize_objectives(tiny_instance, tmp_path):
    for objective in (Objective.USED_NODES, Objective.LATENCY):
        model = read_lp(export_lp(tiny_instance, objective, tmp_path / f"{objective.value}.lp"))
        assert model.sense is Sense.MIN


def test_fractional_rows_are_scaled_to_integers():
    inst = PlacementInstance()
    x = inst.add_var("x", (0,))
    inst.add_constraint([(Fraction(1, 3), x)], Relation.LE, Fraction(1, 2), ConstraintTag.EDGE_CAPACITY)
    terms, rhs = scaled_row(inst.constraints[0])
    assert terms == {x: 2}
    assert rhs == 3


def test_thirds_are_written_exactly(tmp_path):
    inst = PlacementInstance()
    x = inst.add_var("x", (0,))
    y = inst.add_var("y", (0,), kind=VarKind.CONTINUOUS, lb=Fraction(1, 3), ub=Fraction(7, 3))
    z = inst.add_var("z", (0,), kind=VarKind.CONTINUOUS, lb=Fraction(1, 2), ub=None)
    inst.add_constraint([(1, x), (1, y)], Relation.LE, 3, ConstraintTag.EDGE_CAPACITY)
    inst.objectives[Objective.REMDR] = {x: Fraction(1, 3), y: Fraction(1, 2), z: Fraction(1)}

    path = export_lp(inst, Objective.REMDR, tmp_path / "thirds.lp")
    text = path.read_text()
    assert "0.333" not in text
    assert "\\ Objective scale 6" in text
    model = read_lp(path)
    assert model.objective_scale == 6
    assert model.objective == {"x_0": Fraction(1, 3), "y_0": Fraction(1, 2), "z_0": Fraction(1)}
    assert model.bounds["y_0"] == (Fraction(1, 3), Fraction(7, 3))
    assert model.bounds["z_0"] == (Fraction(1, 2), None)
    assert len(model.rows) == 1


def write_values(path, inst, values, skip=(), override=None, extra=None):
    lines = ["# external solver output"]
    for var in inst.variables:
        if var.name in skip:
            continue
        value = (override or {}).get(var.name, float(values[var.index]))
        lines.append(f"{var.name} {value}")
    lines.extend(extra or [])
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def encoded(tiny, tiny_instance):
    net, catalog, graph = tiny
    placement = next(p for p in enumerate_placements(net, catalog, graph) if p.mapping["r1/fw1"] == "B")
    return placement, model_values(tiny_instance, net, catalog, graph, placement)


def test_import_valid_solution(tiny, tiny_instance, encoded, tmp_path):
    net, catalog, graph = tiny
    placement, values = encoded
    path = write_values(tmp_path / "solution.txt", tiny_instance, values)
    solution = import_solution(tiny_instance, path)
    assert solution.mapping["r1/fw1"] == "B"
    assert solution.objective_values.remdr == placement.remdr
    assert check_solution(net, catalog, graph, solution).clean


def test_import_rounds_nearly_integral_binaries(tiny_instance, encoded, tmp_path):
    _, values = encoded
    name = next(v.name for v in tiny_instance.variables if v.family == "m" and values[v.index] == 1)
    path = write_values(tmp_path / "solution.txt", tiny_instance, values, override={name: 0.9999999})
    assert import_solution(tiny_instance, path).mapping


def test_import_rejects_unknown_variable(tiny_instance, encoded, tmp_path):
    _, values = encoded
    path = write_values(tmp_path / "s.txt", tiny_instance, values, extra=["ghost_1 0"])
    with pytest.raises(SolutionImportError, match="unknown variable ghost_1"):
        import_solution(tiny_instance, path)


def test_import_rejects_missing_variable(tiny_instance, encoded, tmp_path):
    _, values = encoded
    name = tiny_instance.variables[0].name
    path = write_values(tmp_path / "s.txt", tiny_instance, values, skip={name})
    with pytest.raises(SolutionImportError, match="missing variable"):
        import_solution(tiny_instance, path)


def test_import_rejects_fractional_binary(tiny_instance, encoded, tmp_path):
    _, values = encoded
    name = tiny_instance.variables[0].name
    path = write_values(tmp_path / "s.txt", tiny_instance, values, override={name: 0.5})
    with pytest.raises(SolutionImportError, match="non-integral"):
        import_solution(tiny_instance, path)


def test_import_rejects_malformed_line(tiny_instance, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("m_x 1 2\n")
    with pytest.raises(SolutionImportError, match="line 1"):
        import_solution(tiny_instance, path)
