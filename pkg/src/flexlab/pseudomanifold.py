"""Oriented simplicial pseudo-manifolds.

A complex is given by its top simplices as ordered tuples of vertex ids; the
tuple order (up to even permutations) is the orientation.  The boundary of
``(v0, ..., vk)`` is ``sum((-1)**i * face_without_vi)``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations

from .errors import InvalidComplexError, StructuralError


def _perm_parity(seq, ref):
    """0 if ``seq`` is an even permutation of ``ref``, 1 if odd."""
    pos = {v: i for i, v in enumerate(ref)}
    perm = [pos[v] for v in seq]
    parity = 0
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def oriented_key(face):
    """Canonical (sorted vertices, sign) pair for an oriented simplex."""
    ref = tuple(sorted(face))
    return ref, (-1 if _perm_parity(face, ref) else 1)


def boundary(simplex):
    """Oriented codimension-1 faces of ``simplex`` as ``(face, sign)`` pairs."""
    return [
        (simplex[:i] + simplex[i + 1 :], -1 if i % 2 else 1) for i in range(len(simplex))
    ]


@dataclass(frozen=True)
class Violation:
    condition: str  # "ridge-incidence" | "strong-connectivity" | "orientation"
    message: str
    faces: tuple = ()

    def __str__(self):
        number = _CONDITION_NUMBERS.get(self.condition)
        label = f"condition {number} {self.condition}" if number else self.condition
        return f"{label}: {self.message}"


# numbering of the pseudo-manifold axioms; (1) holds by construction
_CONDITION_NUMBERS = {"ridge-incidence": "(2)", "strong-connectivity": "(3)"}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.valid


class PseudoManifold:
    """Oriented (k)-dimensional simplicial complex given by its top simplices."""

    def __init__(self, top_simplices, vertices=None):
        simplices = [tuple(str(v) for v in s) for s in top_simplices]
        if not simplices:
            raise StructuralError("complex has no top simplices")
        arity = len(simplices[0])
        if arity < 2:
            raise StructuralError("top simplices need at least two vertices")
        for i, s in enumerate(simplices):
            if len(s) != arity:
                raise StructuralError(
                    f"simplex #{i} {s} has {len(s)} vertices, expected {arity}"
                )
            if len(set(s)) != len(s):
                raise StructuralError(f"simplex #{i} {s} repeats a vertex")
        used = sorted({v for s in simplices for v in s})
        if vertices is not None:
            vertices = [str(v) for v in vertices]
            missing = set(used) - set(vertices)
            if missing:
                raise StructuralError(f"simplices use undeclared vertices {sorted(missing)}")
            extra = set(vertices) - set(used)
            if extra:
                raise StructuralError(f"vertices {sorted(extra)} lie in no top simplex")
            if len(set(vertices)) != len(vertices):
                raise StructuralError("duplicate vertex identifiers")
            order = list(vertices)
        else:
            order = used
        self.top_simplices: tuple[tuple[str, ...], ...] = tuple(simplices)
        self.vertices: tuple[str, ...] = tuple(order)
        self.index = {v: i for i, v in enumerate(self.vertices)}
        self.dim_top = arity - 1

    def __repr__(self):
        return (
            f"PseudoManifold(dim_top={self.dim_top}, vertices={len(self.vertices)}, "
            f"top_simplices={len(self.top_simplices)})"
        )

    def reversed(self) -> PseudoManifold:
        """Same complex with every orientation flipped."""
        flipped = [(s[1], s[0]) + s[2:] for s in self.top_simplices]
        return PseudoManifold(flipped, self.vertices)

    def ridges(self):
        """Map sorted (k-1)-face -> list of (top simplex index, induced sign)."""
        out = defaultdict(list)
        for t, s in enumerate(self.top_simplices):
            for face, sign in boundary(s):
                key, fsign = oriented_key(face)
                out[key].append((t, sign * fsign))
        return out

    def faces(self, k: int):
        """All k-dimensional faces as sorted tuples, in sorted order."""
        found = set()
        for s in self.top_simplices:
            for f in combinations(sorted(s), k + 1):
                found.add(f)
        return sorted(found)

    def edges(self):
        return self.faces(1)

    def validate(self) -> ValidationReport:
        return validate(self)

    def codim2_faces(self):
        return codim2_faces(self)


def validate(K: PseudoManifold) -> ValidationReport:
    """Check ridge incidence, strong connectivity and orientation compatibility."""
    report = ValidationReport()
    ridges = K.ridges()
    for key in sorted(ridges):
        inc = ridges[key]
        if len(inc) != 2:
            report.violations.append(
                Violation(
                    "ridge-incidence",
                    f"face {key} lies in {len(inc)} top simplices, expected 2",
                    (key,),
                )
            )
        elif inc[0][1] + inc[1][1] != 0:
            report.violations.append(
                Violation(
                    "orientation",
                    f"face {key} receives the same induced orientation from "
                    f"{K.top_simplices[inc[0][0]]} and {K.top_simplices[inc[1][0]]}",
                    (key,),
                )
            )

    # strong connectivity: dual graph over shared ridges
    n = len(K.top_simplices)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for inc in ridges.values():
        for (a, _), (b, _) in zip(inc, inc[1:]):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    groups = defaultdict(list)
    for i in range(n):
        groups[find(i)].append(K.top_simplices[i])
    if len(groups) > 1:
        comps = sorted(groups.values(), key=len)
        report.violations.append(
            Violation(
                "strong-connectivity",
                f"dual graph has {len(groups)} components "
                f"(smallest has {len(comps[0])} top simplices)",
                tuple(tuple(c) for c in comps),
            )
        )
    return report


def codim2_faces(K: PseudoManifold):
    """List ``(sigma, tau1, tau2)`` for every (n-2)-face of a complex in n-space.

    These are the codimension-1 faces of ``K`` itself (edges, for surfaces in
    3-space).  ``sigma`` is a sorted tuple; ``tau1`` and ``tau2`` are the two
    incident top simplices as stored, so they carry their orientation.
    """
    report = K.validate()
    if not report.valid:
        raise InvalidComplexError(report)
    out = []
    for key, inc in sorted(K.ridges().items()):
        (t1, _), (t2, _) = inc
        out.append((key, K.top_simplices[t1], K.top_simplices[t2]))
    return out
