"""Flexible suspensions with a hexagonal equator built from a real cubic.

Input: a cubic ``y^2 = x(x - b')(x - b)``, basepoints A, B, C, D on it, and a
table of 24 integer words giving the points ``Q_{j,+-}`` (non-compact branch)
and ``Q'_{j,+-}`` (compact oval).  For each ``j`` the four points
``Q_{j,-}, Q'_{j,-}, Q_{j+1,+}, Q'_{j+1,+}`` must lie on a parabola
``y = a_j x^2 + b_j x + c_j``; from this data the vertices

    S = (0, 0),  N = (0, sqrt(x)),
    p_k = (sqrt(-(x - r_k)(x - r'_k)) * F_1(x)...F_{k-1}(x), x + sigma_k sqrt(r_k r'_k)) / (2 sqrt(x))

in C x R give a flexion for ``x`` in ``(b', b)``.  Indices are modulo 6 and
stored 1-based throughout this module.
"""

from __future__ import annotations

import cmath
import functools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import elliptic as ec
from .errors import (
    BranchJumpError,
    ClosureError,
    ConditionError,
    ConsistencyError,
    CurveError,
    DomainError,
    GeometryError,
)
from .geometry import EUCLIDEAN3, EdgeLengths, Polyhedron, dihedral_angle, edge_key, unwrap_to
from .measures import FlexionPath
from .pseudomanifold import PseudoManifold
from .quadfield import QuadExt, sqrt_rational

J = range(1, 7)
SLOTS = ("Q_minus", "Q_next_plus", "Qp_minus", "Qp_next_plus")


def nxt(j: int) -> int:
    return j % 6 + 1


def prv(j: int) -> int:
    return (j - 2) % 6 + 1


def vertex_name(k: int) -> str:
    return f"p{k}"


def bipyramid_complex() -> PseudoManifold:
    """Hexagonal bipyramid: north faces (N, p_j, p_j+1), south faces (S, p_j+1, p_j)."""
    tops = []
    for j in J:
        tops.append(("N", vertex_name(j), vertex_name(nxt(j))))
    for j in J:
        tops.append(("S", vertex_name(nxt(j)), vertex_name(j)))
    return PseudoManifold(tops, ["N", "S"] + [vertex_name(k) for k in J])


@dataclass
class SuspensionSpec:
    """Curve, basepoints and the 6-row word table.

    ``table[j]`` (``j`` = 1..6) maps each of :data:`SLOTS` to a word; the slots
    are ``Q_{j,-}``, ``Q_{j+1,+}``, ``Q'_{j,-}``, ``Q'_{j+1,+}`` in that order.
    """

    curve: ec.Curve
    basepoints: dict[str, ec.CurvePoint]
    table: dict[int, dict[str, dict[str, int]]]
    sigma1: int = -1

    def __post_init__(self):
        if self.sigma1 not in (1, -1):
            raise ValueError("sigma1 must be +1 or -1")
        if sorted(self.table) != list(J):
            raise ValueError(f"table needs rows 1..6, got {sorted(self.table)}")
        for j, row in self.table.items():
            if sorted(row) != sorted(SLOTS):
                raise ValueError(f"row {j} needs slots {SLOTS}, got {sorted(row)}")
            for slot, word in row.items():
                for name, k in word.items():
                    if name not in self.basepoints:
                        raise ValueError(f"row {j} {slot} uses unknown basepoint {name!r}")
                    if int(k) != k:
                        raise ValueError(f"row {j} {slot}: coefficient {k!r} is not an integer")

    def with_sigma1(self, sigma1: int) -> SuspensionSpec:
        return SuspensionSpec(self.curve, self.basepoints, self.table, sigma1)


@dataclass(frozen=True)
class Parabola:
    a: Fraction
    b: Fraction
    c: Fraction

    def __call__(self, x):
        return (self.a * x + self.b) * x + self.c


@dataclass(eq=False)
class SuspensionModel:
    spec: SuspensionSpec
    Q_minus: dict[int, ec.CurvePoint]
    Q_plus: dict[int, ec.CurvePoint]
    Qp_minus: dict[int, ec.CurvePoint]
    Qp_plus: dict[int, ec.CurvePoint]
    r: dict[int, Fraction]
    rp: dict[int, Fraction]
    parabolas: dict[int, Parabola]
    s: dict[int, int]
    sigma: dict[int, int]
    exact_lengths: dict[tuple[str, str], QuadExt]
    complex: PseudoManifold = field(default_factory=bipyramid_complex)

    @property
    def curve(self) -> ec.Curve:
        return self.spec.curve

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.curve.b_prime), float(self.curve.b)

    def edge_lengths(self) -> EdgeLengths:
        return EdgeLengths.from_exact(self.exact_lengths)

    def radicands(self) -> list[int]:
        return sorted({d for q in self.exact_lengths.values() for d in q.radicands})

    def quadruple(self, j: int):
        """The four points on the j-th parabola, in table order."""
        return (self.Q_minus[j], self.Q_plus[nxt(j)], self.Qp_minus[j], self.Qp_plus[nxt(j)])

    # float caches for the flexion formulas
    def _floats(self):
        cache = self.__dict__.get("_float_cache")
        if cache is None:
            cache = {
                "r": {j: float(self.r[j]) for j in J},
                "rp": {j: float(self.rp[j]) for j in J},
                "abc": {j: (float(p.a), float(p.b), float(p.c)) for j, p in self.parabolas.items()},
                "rrp": {j: float(sqrt_rational(self.r[j] * self.rp[j])) for j in J},
                "bp": float(self.curve.b_prime),
                "b": float(self.curve.b),
            }
            self.__dict__["_float_cache"] = cache
        return cache

    def __getstate__(self):
        state = dict(self.__dict__)
        state.pop("_float_cache", None)
        return state


# ---------------------------------------------------------------------------
# construction


def resolve_points(spec: SuspensionSpec):
    E = spec.curve
    for name, P in spec.basepoints.items():
        if not ec.on_curve(E, P):
            raise CurveError(f"basepoint {name} = {P} is not on {E}")
    Qm, Qp, Pm, Pp = {}, {}, {}, {}
    for j in J:
        row = spec.table[j]
        Qm[j] = ec.combo(E, row["Q_minus"], spec.basepoints)
        Qp[nxt(j)] = ec.combo(E, row["Q_next_plus"], spec.basepoints)
        Pm[j] = ec.combo(E, row["Qp_minus"], spec.basepoints)
        Pp[nxt(j)] = ec.combo(E, row["Qp_next_plus"], spec.basepoints)
    return Qm, Qp, Pm, Pp


def _same_or_mirror(P, Q):
    return P == Q or P == ec.neg(Q)


def fit_parabola(E: ec.Curve, points, j=None) -> Parabola:
    """Exact parabola through four affine points (tangent at repeated points)."""
    for P in points:
        if P.is_infinity:
            raise ConditionError("B", "point at infinity in a parabola quadruple", j, points)
    distinct = []
    for P in points:
        if P not in distinct:
            distinct.append(P)
    xs = [P.x for P in distinct]
    if len(set(xs)) != len(xs):
        raise ConditionError("B", "two distinct points share an x-coordinate", j, points)
    rows = [[P.x * P.x, P.x, Fraction(1), P.y] for P in distinct[:3]]
    if len(distinct) < 3:
        # one tangency condition per repeated point: q'(x) = slope of the curve
        for P in distinct:
            if points.count(P) > 1 and len(rows) < 3:
                if P.y == 0:
                    raise ConditionError("B", "tangency at a 2-torsion point", j, points)
                slope = (3 * P.x * P.x + 2 * E.a2 * P.x + E.a4) / (2 * P.y)
                rows.append([2 * P.x, Fraction(1), Fraction(0), slope])
    if len(rows) < 3:
        raise ConditionError("B", "quadruple determines no parabola", j, points)
    a, b, c = _solve3(rows)
    q = Parabola(a, b, c)
    for P in distinct:
        if q(P.x) != P.y:
            raise ConditionError(
                "B", f"point {P} is off the parabola through the other points "
                f"(residual {q(P.x) - P.y})", j, points)
    for P in distinct:
        if points.count(P) > 1:
            if P.y == 0:
                raise ConditionError("B", "tangency at a 2-torsion point", j, points)
            slope = (3 * P.x * P.x + 2 * E.a2 * P.x + E.a4) / (2 * P.y)
            if 2 * a * P.x + b != slope:
                raise ConditionError("B", f"parabola not tangent at repeated point {P}", j, points)
    if a == 0:
        raise ConditionError("B", "the interpolating polynomial has a_j = 0", j, points)
    return q


def _solve3(rows):
    """Exact Gaussian elimination for a 3x3 system given as augmented rows."""
    M = [list(r) for r in rows]
    for col in range(3):
        piv = next((r for r in range(col, 3) if M[r][col] != 0), None)
        if piv is None:
            raise ConditionError("B", "singular interpolation system")
        M[col], M[piv] = M[piv], M[col]
        for r in range(3):
            if r != col and M[r][col] != 0:
                f = M[r][col] / M[col][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return tuple(M[i][3] / M[i][i] for i in range(3))


def check_conditions(spec: SuspensionSpec, Qm, Qp, Pm, Pp) -> dict[int, Parabola]:
    """Run the condition cascade (A), (B), (C), (D); return the parabolas."""
    E = spec.curve
    for j in J:
        if not _same_or_mirror(Qm[j], Qp[j]):
            raise ConditionError("A", f"Q_{j},- = {Qm[j]} and Q_{j},+ = {Qp[j]} neither coincide "
                                 "nor mirror each other", j, (Qm[j], Qp[j]))
        if not _same_or_mirror(Pm[j], Pp[j]):
            raise ConditionError("A", f"Q'_{j},- = {Pm[j]} and Q'_{j},+ = {Pp[j]} neither coincide "
                                 "nor mirror each other", j, (Pm[j], Pp[j]))
    parabolas = {}
    for j in J:
        quad = (Qm[j], Pm[j], Qp[nxt(j)], Pp[nxt(j)])
        for i in range(4):
            for k in range(i + 1, 4):
                if quad[i] == ec.neg(quad[k]):
                    raise ConditionError("B", f"points {quad[i]} and {quad[k]} are mirror images",
                                         j, (quad[i], quad[k]))
        total = ec.O
        for P in quad:
            total = ec.add(E, total, P)
        if not total.is_infinity:
            raise ConditionError("B", f"group-law sum is {total}, not O", j, quad)
        parabolas[j] = fit_parabola(E, list(quad), j)
    pts = [P for d in (Qm, Qp, Pm, Pp) for P in d.values()]
    counts = Counter(pts)
    mirrored = Counter(ec.neg(P) for P in pts)
    if counts != mirrored:
        culprit = next(P for P in counts if counts[P] != mirrored[P])
        raise ConditionError("C", f"{culprit} appears {counts[culprit]} times but its mirror "
                             f"{ec.neg(culprit)} appears {counts[ec.neg(culprit)]} times",
                             None, (culprit,))
    for j in J:
        for label, pts, want in (("Q", (Qm[j], Qp[j]), "noncompact"), ("Q'", (Pm[j], Pp[j]), "compact")):
            for sign, P in zip("-+", pts):
                if P.is_infinity:
                    raise ConditionError("D", f"{label}_{j},{sign} is the point at infinity", j, (P,))
                try:
                    comp = ec.component(E, P)
                except CurveError as exc:
                    raise ConditionError("D", str(exc), j, (P,)) from None
                if comp != want:
                    raise ConditionError(
                        "D", f"{label}_{j},{sign} = {P} is on the {comp} component, expected {want}",
                        j, (P,))
    return parabolas


def vieta_sign(parabola: Parabola, rs) -> int:
    """Sign s with c/a = s*sqrt(r_j r'_j r_{j+1} r'_{j+1}), checked exactly."""
    prod = rs[0] * rs[1] * rs[2] * rs[3]
    root = sqrt_rational(prod)
    ratio = QuadExt.rational(parabola.c / parabola.a)
    if ratio == root:
        return 1
    if ratio == -root:
        return -1
    raise ConsistencyError(f"c/a = {ratio} equals neither +-sqrt({prod}) = +-({root})")


def build(spec: SuspensionSpec) -> SuspensionModel:
    Qm, Qp, Pm, Pp = resolve_points(spec)
    parabolas = check_conditions(spec, Qm, Qp, Pm, Pp)
    r = {j: Qm[j].x for j in J}
    rp = {j: Pm[j].x for j in J}
    s = {j: vieta_sign(parabolas[j], (r[j], rp[j], r[nxt(j)], rp[nxt(j)])) for j in J}
    if math.prod(s.values()) != 1:
        raise ClosureError(f"s_1...s_6 = {math.prod(s.values())}; signs {s}")
    sigma = {1: spec.sigma1}
    for j in range(1, 6):
        sigma[j + 1] = sigma[j] * s[j]
    assert sigma[6] * s[6] == sigma[1]
    lengths = {}
    for k in J:
        root_r, root_rp = sqrt_rational(r[k]), sqrt_rational(rp[k])
        half = QuadExt.rational(Fraction(1, 2))
        lengths[edge_key("S", vertex_name(k))] = (root_r + sigma[k] * root_rp) * half
        lengths[edge_key("N", vertex_name(k))] = (root_r - sigma[k] * root_rp) * half
        lengths[edge_key(vertex_name(k), vertex_name(nxt(k)))] = QuadExt.rational(
            1 / (2 * abs(parabolas[k].a)))
    for e, q in lengths.items():
        if q.sign() <= 0:
            raise GeometryError(f"edge {e} gets non-positive length {q}")
    return SuspensionModel(spec, Qm, Qp, Pm, Pp, r, rp, parabolas, s, sigma, lengths)


# ---------------------------------------------------------------------------
# flexion


def _check_domain(model: SuspensionModel, x: float):
    lo, hi = model.interval
    if not lo < x < hi:
        raise DomainError(f"x = {x!r} is outside the open interval ({lo:g}, {hi:g})")


def F(model: SuspensionModel, j: int, x: float) -> complex:
    """Unit complex number exp(i*theta_j), theta_j the angle between half-planes NSp_j and NSp_j+1."""
    _check_domain(model, x)
    f = model._floats()
    a, b, c = f["abc"][j]
    r, rp = f["r"], f["rp"]
    q = (a * x + b) * x + c
    top = complex(-q, math.sqrt(-x * (x - f["b"]) * (x - f["bp"])))
    bottom = a * math.sqrt((x - r[j]) * (x - rp[j]) * (x - r[nxt(j)]) * (x - rp[nxt(j)]))
    return top / bottom


def vertex_array(model: SuspensionModel, x: float) -> np.ndarray:
    """Coordinates in the order N, S, p1..p6 (the order of :func:`bipyramid_complex`)."""
    _check_domain(model, x)
    f = model._floats()
    sx = math.sqrt(x)
    pts = np.zeros((8, 3))
    pts[0] = (0.0, 0.0, sx)
    rot = complex(1.0)
    for k in J:
        w = math.sqrt(-(x - f["r"][k]) * (x - f["rp"][k])) * rot / (2 * sx)
        h = (x + model.sigma[k] * f["rrp"][k]) / (2 * sx)
        pts[k + 1] = (w.real, w.imag, h)
        rot *= F(model, k, x)
    return pts


def vertices_at(model: SuspensionModel, x: float) -> Polyhedron:
    return Polyhedron(model.complex, vertex_array(model, x), EUCLIDEAN3)


def theta(model: SuspensionModel, j: int, x: float) -> float:
    return cmath.phase(F(model, j, x))


# ---------------------------------------------------------------------------
# link of a pole-adjacent vertex


@dataclass
class LinkQuadrangle:
    """Sides of the spherical quadrangle cut around p_k by its four faces.

    Keys are pairs like ``("N", "p6")`` meaning the angle N p_k p6.
    """

    k: int
    cosines: dict[tuple[str, str], QuadExt]
    sides: dict[tuple[str, str], float]
    measured: dict[tuple[str, str], float] | None = None


def link_quadrangle(model: SuspensionModel, k: int, x: float | None = None) -> LinkQuadrangle:
    L = model.exact_lengths
    pk = vertex_name(k)
    cos, sides = {}, {}
    for pole in ("N", "S"):
        for other in (vertex_name(prv(k)), vertex_name(nxt(k))):
            A = L[edge_key(pk, pole)]
            B = L[edge_key(pk, other)]
            C = L[edge_key(pole, other)] if edge_key(pole, other) in L else None
            if C is None:
                raise GeometryError(f"no edge between {pole} and {other}")
            if not (A + B > C and A + C > B and B + C > A):
                raise GeometryError(f"triangle {pole}{pk}{other} violates the triangle inequality")
            value = (A * A + B * B - C * C) * (2 * A * B).invert()
            cos[(pole, other)] = value
            sides[(pole, other)] = math.acos(float(value))
    measured = None
    if x is not None:
        P = vertices_at(model, x)
        measured = {}
        for (pole, other) in cos:
            u = P[pole] - P[pk]
            v = P[other] - P[pk]
            measured[(pole, other)] = math.acos(
                float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))))
    return LinkQuadrangle(k, cos, sides, measured)


# ---------------------------------------------------------------------------
# angle profiles


PROFILE_EDGES = {
    "phi2": ("N", "p2"),
    "phi5": ("N", "p5"),
    "phi12": ("p1", "p2"),
    "phi45": ("p4", "p5"),
}
PROFILE_ANCHORS = {"phi2": math.pi, "phi5": math.pi, "phi12": 0.0, "phi45": 0.0}


@dataclass
class AngleProfiles:
    x: np.ndarray
    angles: dict[str, np.ndarray]
    monotonicity: dict[str, str]


def _classify(values: np.ndarray) -> str:
    d = np.diff(values)
    if np.all(d > 0):
        return "increasing"
    if np.all(d < 0):
        return "decreasing"
    if np.all(d == 0):
        return "constant"
    return "non-monotone"


def angle_profiles(model: SuspensionModel, samples) -> AngleProfiles:
    """Continuous branches of phi_2, phi_5, phi_{1,2}, phi_{4,5} over increasing samples.

    The first sample is anchored at the flat-configuration values (pi for the
    pole edges Np2, Np5; 0 for the equator edges p1p2, p4p5).
    """
    xs = np.asarray(samples, dtype=float)
    if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise ValueError("samples must be a strictly increasing sequence of length >= 2")
    out = {name: np.empty(xs.size) for name in PROFILE_EDGES}
    prev = dict(PROFILE_ANCHORS)
    for i, x in enumerate(xs):
        P = vertices_at(model, float(x))
        for name, edge in PROFILE_EDGES.items():
            phi = unwrap_to(dihedral_angle(P, edge), prev[name])
            if i > 0 and abs(phi - prev[name]) > math.pi / 2:
                raise BranchJumpError(f"{name} jumps by {phi - prev[name]:.3g} at x = {x!r}", t=x)
            out[name][i] = phi
            prev[name] = phi
    return AngleProfiles(xs, out, {name: _classify(v) for name, v in out.items()})


def flexion_path(model: SuspensionModel):
    """The flexion x -> vertices_at(model, x) on (b', b), with exact edge lengths attached."""
    return FlexionPath(model.interval, functools.partial(vertices_at, model), model.edge_lengths())
