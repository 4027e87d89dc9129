"""YAML file formats: suspension configs and polyhedron files.

Rationals are written as strings (``"4039540/762129"``) and exact lengths as
QuadExt literals so nothing passes through floating point.

Polyhedron file::

    space: euclidean          # or spherical / hyperbolic
    n: 3
    vertices:
      - {id: a, coords: [0.0, 0.0, 0.0]}
    simplices:
      - [a, b, c]             # oriented top simplices
    exact_lengths:            # optional
      - {edge: [a, b], length: "1/2*sqrt(2)"}
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import elliptic as ec
from .errors import FlexlabError, InputError, QuadParseError
from .geometry import EdgeLengths, Polyhedron, SpaceForm, edge_key, edge_lengths
from .pseudomanifold import PseudoManifold
from .quadfield import QuadExt, format_quad, parse_quad
from .suspension import SLOTS, SuspensionSpec, nxt

EXACT_TOL = 1e-9


def bundled(name: str) -> Path:
    """Path of a data file shipped with the package (e.g. ``"tetrahedron.yaml"``)."""
    return Path(str(resources.files("flexlab") / "data" / name))


def _read_yaml(source):
    if isinstance(source, dict):
        return source, "<mapping>"
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read file ({exc.strerror})") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        problem = getattr(exc, "problem", None) or str(exc)
        raise InputError(f"{path}: YAML syntax error at {where}: {problem}") from None
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be a mapping")
    return doc, str(path)


def _need(doc, key, where):
    if key not in doc:
        raise InputError(f"{where}: missing key {key!r}")
    return doc[key]


def _rational(value, where) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise InputError(f"{where}: expected a rational written as an integer or 'p/q' string, "
                         f"got {value!r}")
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise InputError(f"{where}: {value!r} is not a rational literal") from None


# ---------------------------------------------------------------------------
# suspension configs

_POINT_KEY = re.compile(r"^(Qp|Q)([1-6])(minus|plus)$")


def load_suspension_spec(source) -> SuspensionSpec:
    doc, where = _read_yaml(source)
    curve_doc = _need(doc, "curve", where)
    try:
        curve = ec.Curve(_rational(_need(curve_doc, "b_prime", f"{where}: curve"), f"{where}: curve.b_prime"),
                         _rational(_need(curve_doc, "b", f"{where}: curve"), f"{where}: curve.b"))
    except FlexlabError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{where}: curve: {exc}") from None
    basepoints = {}
    for name, xy in (_need(doc, "basepoints", where) or {}).items():
        if not isinstance(xy, (list, tuple)) or len(xy) != 2:
            raise InputError(f"{where}: basepoints.{name}: expected [x, y]")
        basepoints[str(name)] = ec.CurvePoint(_rational(xy[0], f"{where}: basepoints.{name}[0]"),
                                              _rational(xy[1], f"{where}: basepoints.{name}[1]"))
    sigma1 = doc.get("sigma1", -1)
    if sigma1 not in (1, -1):
        raise InputError(f"{where}: sigma1 must be 1 or -1, got {sigma1!r}")
    points = _need(doc, "points", where)
    words = {}
    for key, word in points.items():
        m = _POINT_KEY.match(str(key))
        if not m:
            raise InputError(f"{where}: points.{key}: expected keys like Q1minus, Qp2plus")
        if not isinstance(word, dict):
            raise InputError(f"{where}: points.{key}: word must be a mapping like {{A: 1, B: -1}}")
        clean = {}
        for name, k in word.items():
            if isinstance(k, bool) or not isinstance(k, int):
                raise InputError(f"{where}: points.{key}.{name}: coefficient must be an integer")
            if str(name) not in basepoints:
                raise InputError(f"{where}: points.{key}: unknown basepoint {name!r}")
            clean[str(name)] = k
        words[(m.group(1), int(m.group(2)), m.group(3))] = clean
    table = {}
    for j in range(1, 7):
        row = {}
        for slot, key in zip(SLOTS, (("Q", j, "minus"), ("Q", nxt(j), "plus"),
                                      ("Qp", j, "minus"), ("Qp", nxt(j), "plus"))):
            if key not in words:
                raise InputError(f"{where}: points: missing {key[0]}{key[1]}{key[2]}")
            row[slot] = words[key]
        table[j] = row
    return SuspensionSpec(curve, basepoints, table, sigma1)


def spec_to_mapping(spec: SuspensionSpec) -> dict:
    def rat(q):
        return str(q)

    points = {}
    for j in range(1, 7):
        row = spec.table[j]
        points[f"Q{j}minus"] = row["Q_minus"]
        points[f"Q{nxt(j)}plus"] = row["Q_next_plus"]
        points[f"Qp{j}minus"] = row["Qp_minus"]
        points[f"Qp{nxt(j)}plus"] = row["Qp_next_plus"]
    return {
        "curve": {"b_prime": rat(spec.curve.b_prime), "b": rat(spec.curve.b)},
        "basepoints": {k: [rat(P.x), rat(P.y)] for k, P in spec.basepoints.items()},
        "sigma1": spec.sigma1,
        "points": points,
    }


# ---------------------------------------------------------------------------
# polyhedron files


@dataclass
class PolyhedronFile:
    polyhedron: Polyhedron
    exact_lengths: EdgeLengths | None = None


def load_polyhedron(source, tol: float = EXACT_TOL) -> PolyhedronFile:
    doc, where = _read_yaml(source)
    kind = doc.get("space", "euclidean")
    n = doc.get("n", 3)
    try:
        space = SpaceForm(kind, int(n))
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: space: {exc}") from None
    verts = _need(doc, "vertices", where)
    if not isinstance(verts, list):
        raise InputError(f"{where}: vertices must be a list of {{id, coords}} records")
    ids, coords = [], {}
    for i, rec in enumerate(verts):
        if not isinstance(rec, dict) or "id" not in rec or "coords" not in rec:
            raise InputError(f"{where}: vertices[{i}]: expected {{id: ..., coords: [...]}}")
        vid = str(rec["id"])
        if vid in coords:
            raise InputError(f"{where}: vertices[{i}]: duplicate id {vid!r}")
        try:
            c = np.array([float(v) for v in rec["coords"]])
        except (TypeError, ValueError):
            raise InputError(f"{where}: vertices[{i}]: coordinates must be numbers") from None
        ids.append(vid)
        coords[vid] = c
    simplices = _need(doc, "simplices", where)
    if not isinstance(simplices, list) or not all(isinstance(s, list) for s in simplices):
        raise InputError(f"{where}: simplices must be a list of vertex-id lists")
    try:
        K = PseudoManifold(simplices, ids)
        P = Polyhedron(K, coords, space)
    except FlexlabError as exc:
        raise InputError(f"{where}: {exc}") from None
    exact = None
    if doc.get("exact_lengths"):
        table = {}
        for i, rec in enumerate(doc["exact_lengths"]):
            try:
                u, v = (str(x) for x in rec["edge"])
                text = str(rec["length"])
            except (KeyError, TypeError, ValueError):
                raise InputError(f"{where}: exact_lengths[{i}]: expected {{edge: [u, v], length: '...'}}") from None
            try:
                table[edge_key(u, v)] = parse_quad(text)
            except QuadParseError as exc:
                raise InputError(f"{where}: exact_lengths[{i}]: {exc}") from None
        numeric = edge_lengths(P)
        for e, q in table.items():
            if e not in numeric.values:
                raise InputError(f"{where}: exact length for {e}, which is not an edge")
            ref = float(q)
            if abs(ref - numeric.values[e]) > tol * max(1.0, abs(ref)):
                raise InputError(f"{where}: exact length of {e} is {ref!r} but the coordinates "
                                 f"give {numeric.values[e]!r}")
        exact = EdgeLengths.from_exact(table)
    return PolyhedronFile(P, exact)


def polyhedron_to_mapping(P: Polyhedron, exact: dict | None = None) -> dict:
    doc = {
        "space": P.space.kind,
        "n": P.space.n,
        "vertices": [{"id": v, "coords": [float(c) for c in P[v]]} for v in P.complex.vertices],
        "simplices": [list(s) for s in P.complex.top_simplices],
    }
    if exact:
        doc["exact_lengths"] = [
            {"edge": list(e), "length": format_quad(QuadExt.coerce(q))} for e, q in sorted(exact.items())
        ]
    return doc


class _FlowListDumper(yaml.SafeDumper):
    pass


def _represent_list(dumper, data):
    flow = all(not isinstance(x, (dict, list)) for x in data)
    return dumper.represent_sequence("tag:yaml.org,2002:seq", data, flow_style=flow)


_FlowListDumper.add_representer(list, _represent_list)


def dump_yaml(doc: dict) -> str:
    return yaml.dump(doc, Dumper=_FlowListDumper, sort_keys=False, width=120)


def write_polyhedron(path, P: Polyhedron, exact: dict | None = None, header: str | None = None):
    text = dump_yaml(polyhedron_to_mapping(P, exact))
    if header:
        text = "".join(f"# {line}\n" for line in header.splitlines()) + text
    Path(path).write_text(text)
