"""Polyhedra in the space forms E^n, S^n and Lambda^n (vector models).

Curved spaces use the ambient R^{n+1} with the bilinear form
``<x, y> = x0*y0 + eps*(x1*y1 + ... + xn*yn)``; ``eps = +1`` gives the unit
sphere and ``eps = -1`` the upper sheet of the two-sheeted hyperboloid.  On
tangent spaces the Riemannian metric is ``g(u, v) = eps*<u, v>`` for both.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping

import numpy as np

from .errors import GeometryError
from .pseudomanifold import PseudoManifold, codim2_faces
from .quadfield import QuadExt

TAU_GEO = 1e-9
RANK_RTOL = 1e-8
TWO_PI = 2.0 * math.pi


class DegenerateFaceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SpaceForm:
    kind: str
    n: int = 3

    def __post_init__(self):
        if self.kind not in ("euclidean", "spherical", "hyperbolic"):
            raise ValueError(f"unknown space form {self.kind!r}")
        if self.n < 3:
            raise ValueError("dimension n must be at least 3")

    @property
    def eps(self) -> int | None:
        return {"spherical": 1, "hyperbolic": -1}.get(self.kind)

    @property
    def curved(self) -> bool:
        return self.kind != "euclidean"

    @property
    def ambient_dim(self) -> int:
        return self.n + 1 if self.curved else self.n

    @property
    def signature(self) -> np.ndarray:
        """Diagonal of the ambient bilinear form."""
        if not self.curved:
            return np.ones(self.n)
        return np.array([1.0] + [float(self.eps)] * self.n)

    def inner(self, x, y):
        return np.dot(np.asarray(x) * self.signature, np.asarray(y))

    def isometry_dim(self) -> int:
        return self.n * (self.n + 1) // 2

    def __str__(self):
        symbol = {"euclidean": "E", "spherical": "S", "hyperbolic": "L"}[self.kind]
        return f"{symbol}^{self.n}"


EUCLIDEAN3 = SpaceForm("euclidean", 3)


def edge_key(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u <= v else (v, u)


class Polyhedron:
    """A vertex map ``P: V(K) -> X^n`` on an oriented pseudo-manifold ``K``."""

    def __init__(self, complex: PseudoManifold, coords, space: SpaceForm = EUCLIDEAN3,
                 tol: float = TAU_GEO):
        if complex.dim_top != space.n - 1:
            raise GeometryError(
                f"complex has top dimension {complex.dim_top}, space {space} needs {space.n - 1}"
            )
        if isinstance(coords, Mapping):
            missing = [v for v in complex.vertices if v not in coords]
            if missing:
                raise GeometryError(f"no coordinates for vertices {missing}")
            pts = np.array([np.asarray(coords[v], dtype=float) for v in complex.vertices])
        else:
            pts = np.asarray(coords, dtype=float)
        if pts.shape != (len(complex.vertices), space.ambient_dim):
            raise GeometryError(
                f"coordinate array has shape {pts.shape}, expected "
                f"{(len(complex.vertices), space.ambient_dim)}"
            )
        if not np.all(np.isfinite(pts)):
            raise GeometryError("non-finite coordinates")
        self.complex = complex
        self.space = space
        self.points = pts
        self.points.setflags(write=False)
        if space.curved:
            norms = np.einsum("ij,j,ij->i", pts, space.signature, pts)
            bad = np.flatnonzero(np.abs(norms - 1.0) > tol)
            if bad.size:
                v = complex.vertices[bad[0]]
                raise GeometryError(
                    f"vertex {v} is off the model surface of {space}: <x,x> = {norms[bad[0]]!r}"
                )
            if space.kind == "hyperbolic" and np.any(pts[:, 0] <= 0):
                v = complex.vertices[int(np.argmin(pts[:, 0]))]
                raise GeometryError(f"vertex {v} is on the lower sheet (x0 <= 0)")

    def __getitem__(self, v: str) -> np.ndarray:
        return self.points[self.complex.index[v]]

    @property
    def coords(self) -> dict[str, np.ndarray]:
        return {v: self.points[i] for i, v in enumerate(self.complex.vertices)}

    def transformed(self, fn) -> Polyhedron:
        """Apply ``fn`` (array of points -> array of points) to all vertices."""
        return Polyhedron(self.complex, fn(np.array(self.points)), self.space)

    def with_complex(self, complex: PseudoManifold) -> Polyhedron:
        return Polyhedron(complex, self.coords, self.space)

    def __repr__(self):
        return f"Polyhedron({self.space}, {self.complex!r})"


# ---------------------------------------------------------------------------
# lengths and membership


@dataclass
class EdgeLengths:
    values: dict[tuple[str, str], float]
    exact: dict[tuple[str, str], QuadExt] | None = None

    def __post_init__(self):
        self.values = {edge_key(*e): float(v) for e, v in self.values.items()}
        for e, v in self.values.items():
            if not v > 0:
                raise GeometryError(f"edge {e} has non-positive length {v}")
        if self.exact is not None:
            self.exact = {edge_key(*e): QuadExt.coerce(v) for e, v in self.exact.items()}
            for e, q in self.exact.items():
                if e not in self.values:
                    raise GeometryError(f"exact length given for unknown edge {e}")
                ref = float(q)
                if abs(ref - self.values[e]) > 1e-12 * max(1.0, abs(ref)):
                    raise GeometryError(
                        f"exact length of {e} evaluates to {ref!r}, numeric value is "
                        f"{self.values[e]!r}"
                    )

    @classmethod
    def from_exact(cls, exact: Mapping) -> EdgeLengths:
        exact = {edge_key(*e): QuadExt.coerce(q) for e, q in exact.items()}
        return cls({e: float(q) for e, q in exact.items()}, exact)

    def __getitem__(self, e):
        return self.values[edge_key(*e)]

    def __len__(self):
        return len(self.values)


def _distance(space: SpaceForm, x, y, where=""):
    if not space.curved:
        return float(np.linalg.norm(x - y))
    c = float(space.inner(x, y))
    if space.kind == "spherical":
        if c >= 1.0 - 1e-15 or c <= -1.0 + 1e-15:
            raise GeometryError(f"coincident or antipodal vertices {where} (<x,y> = {c!r})")
        return math.acos(c)
    if c < 1.0:
        raise GeometryError(f"hyperbolic model violation {where}: <x,y> = {c!r} < 1")
    if c == 1.0:
        raise GeometryError(f"coincident vertices {where}")
    return math.acosh(c)


def edge_lengths(P: Polyhedron) -> EdgeLengths:
    out = {}
    for u, v in P.complex.edges():
        out[(u, v)] = _distance(P.space, P[u], P[v], f"{u}-{v}")
    return EdgeLengths(out)


@dataclass
class MembershipReport:
    residuals: dict[str, float]
    per_edge: dict[tuple[str, str], float]
    tol: float

    @property
    def member(self) -> bool:
        return all(r <= self.tol for r in self.residuals.values())

    def __bool__(self):
        return self.member

    def worst_edges(self, count=3):
        return sorted(self.per_edge, key=self.per_edge.get, reverse=True)[:count]


def sigma_membership(P: Polyhedron, lengths: EdgeLengths, tol: float = TAU_GEO) -> MembershipReport:
    """Residuals of the equations cutting out the configuration space.

    Edge residuals are normalized: ``| |x_u - x_v|^2 - l^2 | / max(1, l^2)``
    in E^n, ``|<x_u, x_v> - cos l|`` in S^n and
    ``|<x_u, x_v> - cosh l| / cosh l`` in Lambda^n.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    edges = set(P.complex.edges())
    if set(lengths.values) != edges:
        extra = sorted(set(lengths.values) - edges)
        missing = sorted(edges - set(lengths.values))
        raise GeometryError(f"edge sets differ: missing {missing}, unexpected {extra}")
    space = P.space
    per_edge = {}
    for (u, v) in sorted(edges):
        ell = lengths[(u, v)]
        x, y = P[u], P[v]
        if not space.curved:
            r = abs(float(np.dot(x - y, x - y)) - ell * ell) / max(1.0, ell * ell)
        elif space.kind == "spherical":
            r = abs(float(space.inner(x, y)) - math.cos(ell))
        else:
            ch = math.cosh(ell)
            r = abs(float(space.inner(x, y)) - ch) / ch
        per_edge[(u, v)] = r
    residuals = {"edges": max(per_edge.values(), default=0.0)}
    if space.curved:
        norms = np.einsum("ij,j,ij->i", P.points, space.signature, P.points)
        residuals["model"] = float(np.max(np.abs(norms - 1.0)))
        if space.kind == "hyperbolic":
            residuals["sheet"] = float(max(0.0, -np.min(P.points[:, 0])))
    return MembershipReport(residuals, per_edge, tol)


# ---------------------------------------------------------------------------
# non-degeneracy


def cayley_menger(sq: np.ndarray) -> float:
    """Cayley-Menger determinant of a matrix of squared distances."""
    k1 = sq.shape[0]
    M = np.ones((k1 + 1, k1 + 1))
    M[0, 0] = 0.0
    M[1:, 1:] = sq
    return float(np.linalg.det(M))


def simplex_volume_sq(sq: np.ndarray) -> float:
    """Squared Euclidean k-volume from squared edge lengths (k = size - 1)."""
    k = sq.shape[0] - 1
    if k == 0:
        return 1.0
    return (-1) ** (k + 1) * cayley_menger(sq) / (2**k * math.factorial(k) ** 2)


def _exact_cm_sign(sq) -> int:
    """Sign of (-1)^(k+1) * CM for exact squared lengths (QuadExt entries)."""
    k1 = len(sq)
    M = [[QuadExt() if i == j == 0 else QuadExt.rational(1) for j in range(k1 + 1)]
         for i in range(k1 + 1)]
    for i in range(k1):
        for j in range(k1):
            M[i + 1][j + 1] = sq[i][j]
    det = _exact_det(M)
    return (-1) ** k1 * det.sign()


def _exact_det(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    total = QuadExt()
    for j in range(n):
        if not M[0][j]:
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * _exact_det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


@dataclass
class NondegeneracyReport:
    per_simplex: dict[tuple[str, ...], bool]
    certificate: tuple[str, ...] | None = None

    @property
    def ok(self) -> bool:
        return self.certificate is None

    def __bool__(self):
        return self.ok


def nondegenerate_lengths(K: PseudoManifold, lengths: EdgeLengths, space: SpaceForm = EUCLIDEAN3,
                          rtol: float = 1e-12) -> NondegeneracyReport:
    """Whether every simplex of ``K`` is realizable as a non-degenerate simplex.

    E^n uses Cayley-Menger signs (exactly, when exact lengths are present);
    S^n needs the Gram matrix ``cos(l_ij)`` positive definite; Lambda^n needs
    ``cosh(l_ij)`` to have signature (1, k).
    """
    per = {}
    first_bad = None
    use_exact = lengths.exact is not None and not space.curved and \
        all(e in lengths.exact for e in K.edges())
    for k in range(2, K.dim_top + 1):
        for face in K.faces(k):
            pairs = list(combinations(range(k + 1), 2))
            ell = {(i, j): lengths[(face[i], face[j])] for i, j in pairs}
            if not space.curved:
                if use_exact:
                    sq = [[QuadExt() for _ in range(k + 1)] for _ in range(k + 1)]
                    for i, j in pairs:
                        q = lengths.exact[edge_key(face[i], face[j])]
                        sq[i][j] = sq[j][i] = q * q
                    good = _exact_cm_sign(sq) > 0
                else:
                    sq = np.zeros((k + 1, k + 1))
                    for (i, j), v in ell.items():
                        sq[i, j] = sq[j, i] = v * v
                    scale = max(ell.values()) ** (2 * k)
                    good = simplex_volume_sq(sq) > rtol * scale
            else:
                G = np.eye(k + 1)
                f = math.cos if space.kind == "spherical" else math.cosh
                for (i, j), v in ell.items():
                    G[i, j] = G[j, i] = f(v)
                w = np.linalg.eigvalsh(G)
                scale = max(1.0, float(np.max(np.abs(w))))
                if space.kind == "spherical":
                    good = bool(w[0] > rtol * scale)
                else:
                    good = bool(w[-1] > rtol * scale and np.sum(w > 0) == 1
                                and np.all(w[:-1] < -rtol * scale))
            per[face] = bool(good)
            if not good and first_bad is None:
                first_bad = face
    return NondegeneracyReport(per, first_bad)


# ---------------------------------------------------------------------------
# face volumes and dihedral angles


def face_volume(P: Polyhedron, face) -> float:
    """k-dimensional volume of the image of a k-face (curved spaces: k <= 1)."""
    face = tuple(face)
    k = len(face) - 1
    if k == 0:
        return 1.0
    if P.space.curved:
        if k != 1:
            raise NotImplementedError("curved face volumes are supported for k <= 1 only")
        return _distance(P.space, P[face[0]], P[face[1]], f"{face[0]}-{face[1]}")
    if k == 1:
        vol = float(np.linalg.norm(P[face[0]] - P[face[1]]))
    else:
        pts = np.array([P[v] for v in face])
        sq = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
        vol = math.sqrt(max(simplex_volume_sq(sq), 0.0))
    if vol <= 1e-14 * max(1.0, float(np.max(np.abs(P.points)))):
        warnings.warn(f"degenerate face {face}", DegenerateFaceWarning, stacklevel=2)
        return 0.0
    return vol


def _cofactor(rows: np.ndarray) -> np.ndarray:
    """Vector c with ``c . y == det([y, *rows])`` for every y; rows is (d-1, d)."""
    d = rows.shape[1]
    c = np.empty(d)
    for i in range(d):
        minor = np.delete(rows, i, axis=1)
        c[i] = (-1) ** i * np.linalg.det(minor)
    return c


def _normal_frame(P: Polyhedron, sigma, tau1, tau2):
    """Unit vectors (n1, n2, m1) in the normal 2-plane of P(sigma) and the metric."""
    space = P.space
    sigma = tuple(sigma)
    c = next(v for v in tau1 if v not in sigma)
    d = next(v for v in tau2 if v not in sigma)
    S = np.array([P[v] for v in sigma])
    if space.curved:
        sig = space.signature
        x = S.sum(axis=0)
        nx = float(space.inner(x, x))
        if nx <= 0:
            raise GeometryError(f"face {sigma} has no interior point on the model surface")
        x /= math.sqrt(nx)
        eps = space.eps

        def g(u, v):
            return eps * float(np.dot(u * sig, v))

        def tangent(v):
            return v - float(space.inner(v, x)) * x

        span = [tangent(s) for s in S]
    else:
        sig = None

        def g(u, v):
            return float(np.dot(u, v))

        span = [s - S[0] for s in S[1:]]
        x = S[0]

        def tangent(v):
            return v - x

    # orthonormal basis of the tangent space of P(sigma), Gram-Schmidt in g
    basis = []
    for v in span:
        w = v.copy()
        for b in basis:
            w = w - g(w, b) * b
        nw = g(w, w)
        if nw > 1e-24 * max(1.0, g(v, v)):
            basis.append(w / math.sqrt(nw))
    if len(basis) != len(sigma) - 1:
        raise GeometryError(f"face {sigma} is degenerate")

    def inward(v):
        w = tangent(P[v])
        for b in basis:
            w = w - g(w, b) * b
        nw = g(w, w)
        if nw <= 1e-24 * max(1.0, float(np.dot(w, w))):
            raise GeometryError(f"incident face through {sigma} and {v} is degenerate")
        return w / math.sqrt(nw)

    n1, n2 = inward(c), inward(d)
    W = np.array([P[v] for v in tau1])
    frame = W[1:] - W[0]
    if space.curved:
        frame = np.array([tangent(f) for f in frame])
        # want c . y = det([x, y, *frame]); swapping the first two rows flips the sign
        cof = -_cofactor(np.vstack([x, frame]))
        m1 = eps * sig * cof
    else:
        m1 = _cofactor(frame)
    nm = g(m1, m1)
    if nm <= 0:
        raise GeometryError(f"incident face {tau1} is degenerate")
    m1 = m1 / math.sqrt(nm)
    return n1, n2, m1, g


def dihedral_angle(P: Polyhedron, sigma, tau1=None, tau2=None, reference: float | None = None) -> float:
    """Oriented dihedral angle at an (n-2)-face.

    The value is ``atan2(-g(n2, m1), g(n2, n1))`` where ``n_i`` are the unit
    normals to P(sigma) inside P(tau_i) pointing into the faces, and ``m1`` is
    the outer normal of ``tau1`` (``(m1, oriented frame of tau1)`` is positively
    oriented in the ambient space).  Result in ``(-pi, pi]`` unless
    ``reference`` is given, in which case the representative mod 2*pi closest
    to it is returned.
    """
    sigma = tuple(sorted(sigma))
    if tau1 is None or tau2 is None:
        tau1, tau2 = _incident(P.complex, sigma)
    n1, n2, m1, g = _normal_frame(P, sigma, tuple(tau1), tuple(tau2))
    phi = math.atan2(-g(n2, m1), g(n2, n1))
    if reference is not None:
        phi = unwrap_to(phi, reference)
    return phi


def unwrap_to(phi: float, reference: float) -> float:
    return phi + TWO_PI * round((reference - phi) / TWO_PI)


def _incident(K: PseudoManifold, sigma):
    sset = set(sigma)
    found = [s for s in K.top_simplices if sset.issubset(s)]
    if len(found) != 2:
        raise GeometryError(f"face {sigma} lies in {len(found)} top simplices")
    return found


def dihedral_angles(P: Polyhedron, reference: Mapping | None = None) -> dict[tuple[str, ...], float]:
    """All oriented dihedral angles keyed by sorted (n-2)-face."""
    out = {}
    for sigma, t1, t2 in codim2_faces(P.complex):
        ref = None if reference is None else reference.get(sigma)
        out[sigma] = dihedral_angle(P, sigma, t1, t2, reference=ref)
    return out


# ---------------------------------------------------------------------------
# infinitesimal rigidity


@dataclass
class RigidityReport:
    rank: int
    trivial_motion_dim: int
    nontrivial_flex_dim: int
    coordinate_count: int
    singular_values: np.ndarray = field(repr=False)
    degenerate: bool = False
    reasons: tuple[str, ...] = ()


def rigidity_matrix(P: Polyhedron) -> np.ndarray:
    """Jacobian of the length constraints (plus model constraints in curved spaces)."""
    K, space = P.complex, P.space
    dim = space.ambient_dim
    m = len(K.vertices)
    edges = K.edges()
    rows = []
    sig = space.signature
    for u, v in edges:
        iu, iv = K.index[u], K.index[v]
        r = np.zeros(m * dim)
        if space.curved:
            r[iu * dim:(iu + 1) * dim] = sig * P.points[iv]
            r[iv * dim:(iv + 1) * dim] = sig * P.points[iu]
        else:
            diff = P.points[iu] - P.points[iv]
            r[iu * dim:(iu + 1) * dim] = 2 * diff
            r[iv * dim:(iv + 1) * dim] = -2 * diff
        rows.append(r)
    if space.curved:
        for i in range(m):
            r = np.zeros(m * dim)
            r[i * dim:(i + 1) * dim] = 2 * sig * P.points[i]
            rows.append(r)
    return np.array(rows)


def trivial_motions(P: Polyhedron) -> np.ndarray:
    """Velocity fields of the infinitesimal isometries evaluated at P (one per row)."""
    space = P.space
    dim = space.ambient_dim
    fields = []
    if not space.curved:
        for i in range(dim):
            t = np.zeros(dim)
            t[i] = 1.0
            fields.append(np.tile(t, len(P.points)))
    G = np.diag(space.signature)
    for i, j in combinations(range(dim), 2):
        M = np.zeros((dim, dim))
        M[i, j], M[j, i] = 1.0, -1.0
        A = M @ G if space.curved else M
        fields.append((P.points @ A.T).ravel())
    return np.array(fields)


def _numeric_rank(A: np.ndarray, rtol: float):
    s = np.linalg.svd(A, compute_uv=False) if A.size else np.zeros(0)
    if s.size == 0 or s[0] == 0:
        return 0, s
    return int(np.sum(s > rtol * s[0])), s


def rigidity(P: Polyhedron, rtol: float = RANK_RTOL) -> RigidityReport:
    J = rigidity_matrix(P)
    rank, s = _numeric_rank(J, rtol)
    T = trivial_motions(P)
    tdim, _ = _numeric_rank(T, rtol)
    N = J.shape[1]
    reasons = []
    if tdim < P.space.isometry_dim():
        reasons.append(
            f"isometry orbit has dimension {tdim} < {P.space.isometry_dim()} (orbit degeneracy)"
        )
    if P.space.curved:
        span_rank, _ = _numeric_rank(P.points, 1e-10)
        flat = span_rank < P.space.n + 1
    else:
        centered = P.points - P.points.mean(axis=0)
        span_rank, _ = _numeric_rank(centered, 1e-10)
        flat = span_rank < P.space.n
    if flat:
        reasons.append("all vertices lie in a totally geodesic hypersurface (flat configuration)")
    return RigidityReport(
        rank=rank,
        trivial_motion_dim=tdim,
        nontrivial_flex_dim=N - rank - tdim,
        coordinate_count=N,
        singular_values=s,
        degenerate=bool(reasons),
        reasons=tuple(reasons),
    )


# ---------------------------------------------------------------------------
# isometries (used for invariance checks)


def random_isometry(space: SpaceForm, rng: np.random.Generator):
    """Random orientation-preserving isometry as a function on point arrays."""
    dim = space.ambient_dim
    if not space.curved:
        Q = _random_rotation(dim, rng)
        shift = rng.normal(size=dim)
        return lambda pts: pts @ Q.T + shift
    if space.kind == "spherical":
        Q = _random_rotation(dim, rng)
        return lambda pts: pts @ Q.T
    # hyperbolic: rotation of the spatial part followed by a boost along x1
    R = np.eye(dim)
    R[1:, 1:] = _random_rotation(dim - 1, rng)
    t = rng.normal()
    B = np.eye(dim)
    B[0, 0] = B[1, 1] = math.cosh(t)
    B[0, 1] = B[1, 0] = math.sinh(t)
    L = B @ R
    return lambda pts: pts @ L.T


def _random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(rng.normal(size=(d, d)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q
