from fractions import Fraction

import numpy as np
import pytest

from flexlab import suspension as su
from flexlab.errors import InputError
from flexlab.geometry import edge_lengths
from flexlab.io import (
    bundled,
    dump_yaml,
    load_polyhedron,
    load_suspension_spec,
    polyhedron_to_mapping,
    spec_to_mapping,
    write_polyhedron,
)
from flexlab.quadfield import parse_quad

TETRA = """\
space: euclidean
n: 3
vertices:
  - {id: o, coords: [0, 0, 0]}
  - {id: x, coords: [1, 0, 0]}
  - {id: y, coords: [0, 1, 0]}
  - {id: z, coords: [0, 0, 1]}
simplices:
  - [o, y, x]
  - [o, x, z]
  - [o, z, y]
  - [x, y, z]
"""


def _write(tmp_path, text, name="p.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_bundled_spec_values(spec):
    assert spec.curve.b_prime == 51 and spec.curve.b == 100
    assert spec.basepoints["B"].x == Fraction(4039540, 762129)
    assert spec.sigma1 == -1
    assert spec.table[6]["Q_next_plus"] is not None


def test_spec_round_trip(tmp_path, spec):
    path = _write(tmp_path, dump_yaml(spec_to_mapping(spec)))
    again = load_suspension_spec(path)
    assert again.basepoints == spec.basepoints
    assert again.table == spec.table
    assert su.build(again).exact_lengths == su.build(spec).exact_lengths


def test_spec_from_mapping(spec):
    again = load_suspension_spec(spec_to_mapping(spec))
    assert again.curve == spec.curve


def test_polyhedron_round_trip(tmp_path, model):
    P = su.vertices_at(model, 75.0)
    path = tmp_path / "snap.yaml"
    write_polyhedron(path, P, model.exact_lengths, header="snapshot")
    assert path.read_text().startswith("# snapshot\n")
    pf = load_polyhedron(path)
    for v in P.complex.vertices:
        assert np.array_equal(pf.polyhedron[v], P[v])
    assert pf.polyhedron.complex.top_simplices == P.complex.top_simplices
    assert pf.exact_lengths.exact == model.exact_lengths


def test_minimal_polyhedron_file(tmp_path):
    pf = load_polyhedron(_write(tmp_path, TETRA))
    assert pf.exact_lengths is None
    assert len(edge_lengths(pf.polyhedron)) == 6
    doc = polyhedron_to_mapping(pf.polyhedron)
    assert doc["simplices"][0] == ["o", "y", "x"]


def test_exact_lengths_checked_against_coordinates(tmp_path):
    good = TETRA + 'exact_lengths:\n  - {edge: [x, y], length: "sqrt(2)"}\n'
    pf = load_polyhedron(_write(tmp_path, good))
    assert pf.exact_lengths.exact[("x", "y")] == parse_quad("sqrt(2)")
    bad = TETRA + 'exact_lengths:\n  - {edge: [x, y], length: "sqrt(3)"}\n'
    with pytest.raises(InputError, match="coordinates"):
        load_polyhedron(_write(tmp_path, bad))


def test_yaml_syntax_error_has_position(tmp_path):
    path = _write(tmp_path, "space: euclidean\nvertices: [\n  {id: a, coords: [0, 0]\n")
    with pytest.raises(InputError, match=r"line \d+, column \d+"):
        load_polyhedron(path)


def test_bad_quad_literal_has_position(tmp_path):
    text = TETRA + 'exact_lengths:\n  - {edge: [x, y], length: "sqrt(2"}\n'
    with pytest.raises(InputError, match="position"):
        load_polyhedron(_write(tmp_path, text))


@pytest.mark.parametrize("text, message", [
    ("- 1\n- 2\n", "mapping"),
    ("space: euclidean\n", "vertices"),
    (TETRA.replace("[0, 0, 1]", "[0, a, 1]"), "numbers"),
    (TETRA.replace("id: z", "id: x"), "duplicate"),
    (TETRA.replace("euclidean", "elliptic"), "space"),
    (TETRA.replace("[x, y, z]", "[x, y, w]"), "undeclared"),
    (TETRA + 'exact_lengths:\n  - {edge: [o, q], length: "1"}\n', "not an edge"),
])
def test_malformed_polyhedron(tmp_path, text, message):
    with pytest.raises(InputError, match=message):
        load_polyhedron(_write(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(InputError, match="cannot read"):
        load_polyhedron(tmp_path / "nope.yaml")


@pytest.mark.parametrize("edit, message", [
    (lambda d: d["basepoints"].update(A=["2"]), r"\[x, y\]"),
    (lambda d: d["basepoints"].update(A=["two", "1"]), "rational"),
    (lambda d: d.update(sigma1=0), "sigma1"),
    (lambda d: d["points"].pop("Q3plus"), "missing Q3plus"),
    (lambda d: d["points"].update(Q9minus={"A": 1}), "Q1minus"),
    (lambda d: d["points"].update(Q1minus={"E": 1}), "unknown basepoint"),
    (lambda d: d["points"].update(Q1minus={"A": 1.5}), "integer"),
    (lambda d: d["curve"].update(b="10"), "curve"),
])
def test_malformed_suspension_config(tmp_path, spec, edit, message):
    doc = spec_to_mapping(spec)
    edit(doc)
    with pytest.raises(InputError, match=message):
        load_suspension_spec(_write(tmp_path, dump_yaml(doc)))


def test_bundled_files_exist():
    for name in ("hexagonal_suspension.yaml", "tetrahedron.yaml", "unit_tetrahedron.yaml",
                 "cube.yaml", "octahedron.yaml", "bad_edge.yaml", "suspension_x75.yaml"):
        assert bundled(name).is_file()
