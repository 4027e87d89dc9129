"""Scissors-congruence measures: oriented volume, linking numbers, Dehn invariant.

Also Schlaefli residuals and flexion sweeps that track continuous angle
branches.  The Dehn invariant lives in R (x) (R / pi Q); when all edge lengths
are exact elements of a multi-quadratic field, ``sum(q_d sqrt(d)) (x) phi``
is rewritten as ``sum(sqrt(d) (x) q_d phi)`` so each radicand gets one real
coefficient ``alpha_d``.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .errors import BranchJumpError, GeometryError, NotAFlexionError
from .geometry import (
    EdgeLengths,
    Polyhedron,
    dihedral_angles,
    edge_key,
    edge_lengths,
    face_volume,
    unwrap_to,
)
from .quadfield import QuadExt, square_decompose

DEFAULT_SEED = 20240229
MAX_RAY_RETRIES = 16


def default_seed() -> int:
    """Monte-Carlo seed; ``FLEXLAB_SEED`` overrides the built-in default."""
    value = os.environ.get("FLEXLAB_SEED")
    return int(value) if value else DEFAULT_SEED


def _require_e3(P: Polyhedron):
    if P.space.curved or P.space.n != 3:
        raise GeometryError(f"operation needs a polyhedron in E^3, got {P.space}")


def _triangles(P: Polyhedron) -> np.ndarray:
    idx = P.complex.index
    tri = np.array([[idx[v] for v in s] for s in P.complex.top_simplices])
    return P.points[tri]  # (T, 3, 3)


# ---------------------------------------------------------------------------
# volume and linking numbers


def oriented_volume(P: Polyhedron) -> float:
    """Generalized oriented volume, ``sum(det(a, b, c)) / 6`` over oriented triangles."""
    _require_e3(P)
    T = _triangles(P)
    return float(np.sum(np.einsum("ij,ij->i", T[:, 0], np.cross(T[:, 1], T[:, 2])))) / 6.0


def _surface_distance_ok(T, x, tol):
    # cheap guard: distance to every triangle plane where the projection lands inside
    a, b, c = T[:, 0], T[:, 1], T[:, 2]
    n = np.cross(b - a, c - a)
    nn = np.linalg.norm(n, axis=1)
    d = np.einsum("ij,ij->i", x - a, n) / nn
    foot = x - d[:, None] * n / nn[:, None]
    inside = _barycentric_inside(T, foot, 0.0)
    return not np.any(inside & (np.abs(d) <= tol))


def _barycentric_inside(T, q, margin):
    a, b, c = T[:, 0], T[:, 1], T[:, 2]
    v0, v1, v2 = b - a, c - a, q - a
    d00 = np.einsum("ij,ij->i", v0, v0)
    d01 = np.einsum("ij,ij->i", v0, v1)
    d11 = np.einsum("ij,ij->i", v1, v1)
    d20 = np.einsum("ij,ij->i", v2, v0)
    d21 = np.einsum("ij,ij->i", v2, v1)
    den = d00 * d11 - d01 * d01
    v = (d11 * d20 - d01 * d21) / den
    w = (d00 * d21 - d01 * d20) / den
    u = 1.0 - v - w
    return (u >= -margin) & (v >= -margin) & (w >= -margin)


def _ray_crossings(T, origins, direction, eps=1e-12):
    """Signed crossing counts of rays ``origin + s*direction`` (s > 0) with oriented triangles.

    Returns ``(counts, ambiguous)``; ``ambiguous`` marks rays that pass within
    ``eps`` (relative) of a triangle edge or run parallel to a triangle plane.
    """
    a = T[:, 0][None]  # (1, T, 3)
    e1 = (T[:, 1] - T[:, 0])[None]
    e2 = (T[:, 2] - T[:, 0])[None]
    d = direction[None, None, :]
    pvec = np.cross(d, e2)
    det = np.einsum("otk,otk->ot", e1, pvec)  # = -d . n  where n = e1 x e2... sign handled below
    scale = np.linalg.norm(e1, axis=-1) * np.linalg.norm(e2, axis=-1)
    parallel = np.abs(det) <= eps * scale
    safe = np.where(parallel, 1.0, det)
    tvec = origins[:, None, :] - a
    u = np.einsum("otk,otk->ot", tvec, pvec) / safe
    qvec = np.cross(tvec, e1)
    v = np.einsum("otk,otk->ot", np.broadcast_to(d, qvec.shape), qvec) / safe
    s = np.einsum("otk,otk->ot", np.broadcast_to(e2, qvec.shape), qvec) / safe
    w = 1.0 - u - v
    hit = (~parallel) & (u > 0) & (v > 0) & (w > 0) & (s > 0)
    margin = 1e-10
    near = (~parallel) & (s > 0) & (u > -margin) & (v > -margin) & (w > -margin) & (
        (np.abs(u) <= margin) | (np.abs(v) <= margin) | (np.abs(w) <= margin))
    # the crossing sign is sign(direction . (e1 x e2)), and det = e1 . (d x e2) = d . (e2 x e1)
    sign = -np.sign(det)
    counts = np.sum(np.where(hit, sign, 0.0), axis=1)
    ambiguous = np.any(near, axis=1) | np.any(parallel & _coplanar_hit(T, origins, direction), axis=1)
    return counts.astype(int), ambiguous


def _coplanar_hit(T, origins, direction):
    # parallel rays only matter if they lie in the triangle's plane
    a = T[:, 0][None]
    n = np.cross(T[:, 1] - T[:, 0], T[:, 2] - T[:, 0])[None]
    off = np.einsum("otk,otk->ot", origins[:, None, :] - a, np.broadcast_to(n, (origins.shape[0],) + n.shape[1:]))
    return np.abs(off) <= 1e-12 * np.linalg.norm(n, axis=-1)


def _random_direction(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def linking_numbers(P: Polyhedron, points, rng: np.random.Generator | None = None) -> np.ndarray:
    """Vectorized :func:`linking_number` for many query points (no on-surface check)."""
    _require_e3(P)
    T = _triangles(P)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    rng = rng if rng is not None else np.random.default_rng(default_seed())
    out = np.zeros(len(pts), dtype=int)
    todo = np.arange(len(pts))
    for _ in range(MAX_RAY_RETRIES):
        if todo.size == 0:
            return out
        counts, amb = _ray_crossings(T, pts[todo], _random_direction(rng))
        out[todo[~amb]] = counts[~amb]
        todo = todo[amb]
    if todo.size:
        raise GeometryError(f"ray casting stayed degenerate for {todo.size} points after "
                            f"{MAX_RAY_RETRIES} directions")
    return out


def linking_number(P: Polyhedron, x, rng: np.random.Generator | None = None, tol: float = 1e-9) -> int:
    """Linking number of the pair (x, infinity) with the surface cycle P(K)."""
    _require_e3(P)
    x = np.asarray(x, dtype=float)
    if not _surface_distance_ok(_triangles(P), x, tol):
        raise GeometryError(f"point {x.tolist()} lies on the surface")
    return int(linking_numbers(P, x[None, :], rng)[0])


def _chunks(n, size):
    for start in range(0, n, size):
        yield start, min(n, start + size)


def monte_carlo_volume(P: Polyhedron, samples: int = 10**6, seed: int | None = None,
                       margin: float = 0.05, chunk: int = 50_000):
    """Estimate ``integral of lambda`` by uniform sampling of a bounding box.

    Returns ``(estimate, standard_error)``.
    """
    _require_e3(P)
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    lo, hi = P.points.min(axis=0), P.points.max(axis=0)
    pad = margin * (hi - lo).max()
    lo, hi = lo - pad, hi + pad
    box = float(np.prod(hi - lo))
    total, total_sq = 0.0, 0.0
    for start, stop in _chunks(samples, chunk):
        pts = lo + (hi - lo) * rng.random((stop - start, 3))
        lam = linking_numbers(P, pts, rng).astype(float)
        total += lam.sum()
        total_sq += (lam * lam).sum()
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return box * mean, box * math.sqrt(var / samples)


# ---------------------------------------------------------------------------
# Dehn invariant


@dataclass
class DehnTerm:
    face: tuple[str, ...]
    length: float
    angle: float
    exact: QuadExt | None = None


@dataclass
class DehnInvariant:
    raw_terms: list[DehnTerm]
    reduced: dict[int, float] | None = None
    heuristic: bool = False

    def angles(self) -> dict[tuple[str, ...], float]:
        return {t.face: t.angle for t in self.raw_terms}

    def numeric_value(self) -> float:
        """``sum(V_sigma * phi_sigma)`` for the current branches (not an invariant by itself)."""
        return sum(t.length * t.angle for t in self.raw_terms)

    def reconstruction(self) -> float:
        if self.reduced is None:
            raise ValueError("no reduced form (lengths were not exact)")
        return sum(math.sqrt(d) * a for d, a in self.reduced.items())

    def trivial_coefficients(self, max_den: int = 64, tol: float = 1e-9) -> dict[int, Fraction | None]:
        """For each radicand, ``alpha_d / pi`` as a small-denominator rational, else None.

        Numerical, hence heuristic: a coefficient is reported trivial when it is
        within ``tol`` of ``(p/q)*pi`` with ``q <= max_den``.
        """
        if self.reduced is None:
            raise ValueError("no reduced form (lengths were not exact)")
        return {d: rational_multiple_of_pi(a, max_den, tol) for d, a in self.reduced.items()}

    def is_trivial(self, max_den: int = 64, tol: float = 1e-9) -> bool:
        return all(v is not None for v in self.trivial_coefficients(max_den, tol).values())


def rational_multiple_of_pi(angle: float, max_den: int = 64, tol: float = 1e-9) -> Fraction | None:
    q = Fraction(angle / math.pi).limit_denominator(max_den)
    return q if abs(float(q) * math.pi - angle) <= tol else None


def dehn(P: Polyhedron, exact_lengths: EdgeLengths | Mapping | None = None,
         reference: Mapping | None = None, tol: float = 1e-9) -> DehnInvariant:
    """Dehn invariant with raw terms and, given exact lengths, the reduced form.

    ``reference`` maps faces to previous angle values and selects the branch of
    each angle closest to it; without it angles lie in (-pi, pi].
    """
    angles = dihedral_angles(P, reference)
    exact = None
    if exact_lengths is not None:
        exact = exact_lengths.exact if isinstance(exact_lengths, EdgeLengths) else {
            edge_key(*e): QuadExt.coerce(q) for e, q in exact_lengths.items()}
        if exact is None:
            raise ValueError("edge lengths carry no exact values")
    terms = []
    for face, phi in angles.items():
        vol = face_volume(P, face)
        q = None
        if exact is not None:
            if len(face) != 2:
                raise ValueError("exact reduction is implemented for edges (n = 3)")
            q = exact.get(edge_key(*face))
            if q is None:
                raise ValueError(f"no exact length for edge {face}")
            if abs(float(q) - vol) > tol * max(1.0, vol):
                raise GeometryError(f"exact length of {face} is {float(q)!r} but the polyhedron "
                                    f"has {vol!r} (inconsistent beyond {tol})")
        terms.append(DehnTerm(face, vol, phi, q))
    reduced = None
    if exact is not None:
        reduced = {}
        for t in terms:
            for d, c in t.exact.terms.items():
                reduced[d] = reduced.get(d, 0.0) + float(c) * t.angle
        reduced = dict(sorted(reduced.items()))
    return DehnInvariant(terms, reduced)


def _pi_multiple(r: Fraction) -> str:
    if r == 0:
        return "0"
    if abs(r) == 1:
        return "pi" if r > 0 else "-pi"
    return f"{r}*pi"


def guess_exact_length(value: float, max_den: int = 64, tol: float = 1e-9, max_radicand: int = 10**4):
    """Heuristic: ``q*sqrt(d)`` with small ``q`` denominator matching ``value``, else None.

    Floats cannot certify Q-linear independence, so results of this guess are
    always labeled heuristic by callers.
    """
    sq = Fraction(value * value).limit_denominator(max_den * max_den)
    if sq <= 0 or abs(float(sq) - value * value) > tol * max(1.0, value * value):
        return None
    s, d = square_decompose(sq.numerator * sq.denominator)
    if d > max_radicand:
        return None
    guess = QuadExt({d: Fraction(s, sq.denominator)})
    return guess if abs(float(guess) - value) <= tol * max(1.0, value) else None


def heuristic_dehn(P: Polyhedron, max_den: int = 64, tol: float = 1e-9) -> DehnInvariant | None:
    """Reduced Dehn invariant from numerically recognized lengths (heuristic).

    Returns None unless every edge length is recognized as ``q*sqrt(d)``.
    """
    numeric = edge_lengths(P).values
    exact = {}
    for e, v in numeric.items():
        g = guess_exact_length(v, max_den, tol)
        if g is None:
            return None
        exact[e] = g
    inv = dehn(P, exact)
    inv.heuristic = True
    return inv


def describe_angle(alpha: float, max_den: int = 64, tol: float = 1e-10) -> str:
    """Human-readable guess for an angle coefficient, e.g. ``6*arccos(1/3)``.

    Tries ``(p/q)*pi`` then ``m*arccos(p/q)``, preferring the smallest
    denominator; falls back to the decimal value.  Display only.
    """
    r = rational_multiple_of_pi(alpha, max_den, tol)
    if r is not None:
        return _pi_multiple(r)
    best = None
    for m in range(1, 25):
        for sign in (1, -1):
            c = math.cos(sign * alpha / m)
            q = Fraction(c).limit_denominator(max_den)
            if abs(float(q) - c) <= tol and abs(q) < 1 and q.denominator > 1:
                key = (q.denominator, m, -sign)
                if best is None or key < best[0]:
                    best = (key, m * sign, q)
    if best is not None:
        _, k, q = best
        head = "" if k == 1 else ("-" if k == -1 else f"{k}*")
        return f"{head}arccos({q})"
    return f"{alpha:.17g}"


# ---------------------------------------------------------------------------
# flexion paths, Schlaefli residuals, sweeps


@dataclass
class FlexionPath:
    interval: tuple[float, float]
    evaluate: Callable[[float], Polyhedron]
    exact_lengths: EdgeLengths | None = None

    def __call__(self, t: float) -> Polyhedron:
        a, b = self.interval
        if not a < t < b:
            raise ValueError(f"t = {t!r} outside the path interval ({a}, {b})")
        return self.evaluate(t)

    def check_lengths(self, ts, rtol: float = 1e-9):
        """Raise NotAFlexionError unless edge lengths stay constant over ``ts``.

        Samples where the polyhedron cannot be evaluated (GeometryError) are
        skipped here; sweeps report them as excluded.
        """
        ref = None
        if self.exact_lengths is not None:
            ref = dict(self.exact_lengths.values)
        for t in ts:
            try:
                cur = edge_lengths(self(t)).values
            except GeometryError:
                continue
            if ref is None:
                ref = cur
            for e, v in cur.items():
                if abs(v - ref[e]) > rtol * max(1.0, ref[e]):
                    raise NotAFlexionError(
                        f"edge {e} has length {v!r} at t = {t!r}, expected {ref[e]!r}")


def _branch_step(prev: Mapping, cur: Mapping, t, limit=math.pi / 2):
    out = {}
    for face, phi in cur.items():
        val = unwrap_to(phi, prev[face])
        if abs(val - prev[face]) > limit:
            raise BranchJumpError(
                f"angle at {face} jumps by {val - prev[face]:.3g} near t = {t!r}; step too large", t=t)
        out[face] = val
    return out


@dataclass
class SchlafliResult:
    lhs: float
    scale: float
    implied_volume_derivative: float | None = None

    @property
    def relative(self) -> float:
        return abs(self.lhs) / self.scale if self.scale else abs(self.lhs)


def _schlafli_from(P0: Polyhedron, minus: Mapping, center: Mapping, plus: Mapping, h: float, t):
    lo = _branch_step(center, minus, t)
    hi = _branch_step(center, plus, t)
    lhs, scale = 0.0, 0.0
    for face in center:
        vol = face_volume(P0, face)
        lhs += vol * (hi[face] - lo[face]) / (2 * h)
        scale += vol
    implied = None
    if P0.space.curved:
        implied = lhs / (P0.space.eps * (P0.space.n - 1))
    return SchlafliResult(lhs, scale, implied)


def schlafli_residual(path: FlexionPath, t: float, h: float = 1e-4) -> SchlafliResult:
    """Central difference of ``sum(V_sigma * phi_sigma)`` with volumes frozen at t.

    In E^n the result should vanish; in S^n / Lambda^n it equals
    ``eps*(n-1)*dV/dt`` and the implied volume derivative is reported.
    """
    P0 = path(t)
    center = dihedral_angles(P0)
    minus = dihedral_angles(path(t - h))
    plus = dihedral_angles(path(t + h))
    return _schlafli_from(P0, minus, center, plus, h, t)


@dataclass
class SampleResult:
    t: float
    angles: dict
    volume: float | None
    schlafli: SchlafliResult | None
    error: str | None = None


def _evaluate_sample(path: FlexionPath, t: float, h: float | None) -> SampleResult:
    try:
        P = path(t)
        angles = dihedral_angles(P)
        vol = oriented_volume(P) if (not P.space.curved and P.space.n == 3) else None
        sch = None
        if h is not None:
            sch = _schlafli_from(P, dihedral_angles(path(t - h)), angles,
                                 dihedral_angles(path(t + h)), h, t)
        return SampleResult(t, angles, vol, sch)
    except GeometryError as exc:
        return SampleResult(t, {}, None, None, str(exc))


@dataclass
class SweepReport:
    t: np.ndarray
    faces: list[tuple[str, ...]]
    angles: np.ndarray  # (samples, faces), continuous branches
    alphas: dict[int, np.ndarray] | None
    volume: np.ndarray | None
    schlafli: np.ndarray | None  # residuals
    schlafli_scale: np.ndarray | None
    excluded: list[tuple[float, str]] = field(default_factory=list)
    tol: float = 1e-8

    @property
    def max_deviation(self) -> dict[int, float]:
        if self.alphas is None:
            return {}
        return {d: float(np.max(np.abs(a - a[0]))) for d, a in self.alphas.items()}

    @property
    def constant(self) -> bool | None:
        if self.alphas is None:
            return None
        return all(v <= self.tol for v in self.max_deviation.values())

    def angle_column(self, face) -> np.ndarray:
        return self.angles[:, self.faces.index(tuple(sorted(face)))]


def _dehn_coefficients(faces, angles, exact):
    alphas = {}
    for i, face in enumerate(faces):
        for d, c in exact[edge_key(*face)].terms.items():
            alphas.setdefault(d, np.zeros(angles.shape[0]))
            alphas[d] = alphas[d] + float(c) * angles[:, i]
    return dict(sorted(alphas.items()))


def dehn_sweep(path: FlexionPath, samples=100, exact_lengths: EdgeLengths | None = None,
               h: float | None = 1e-4, tol: float = 1e-8, jobs: int = 1,
               check_rtol: float = 1e-9, anchor: Mapping | None = None) -> SweepReport:
    """Track dihedral angles and Dehn coefficients along a flexion.

    ``samples`` is either a count (evenly spaced over the open interval, with
    the default 0.5 margin) or an explicit increasing sequence of parameters.
    Angle branches start in (-pi, pi] (or nearest ``anchor`` values) and are
    unwrapped sequentially.  Samples where the polyhedron degenerates are
    excluded and listed in the report.
    """
    if np.ndim(samples) == 0:
        count = int(samples)
        if count < 3:
            raise ValueError("a sweep needs at least 3 samples")
        a, b = path.interval
        ts = np.linspace(a + 0.5, b - 0.5, count)
    else:
        ts = np.asarray(samples, dtype=float)
        if ts.size < 3:
            raise ValueError("a sweep needs at least 3 samples")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("sweep parameters must be strictly increasing")
    exact = exact_lengths if exact_lengths is not None else path.exact_lengths
    path.check_lengths(ts, check_rtol)

    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate_sample, [path] * len(ts), ts.tolist(), [h] * len(ts)))
    else:
        results = [_evaluate_sample(path, float(t), h) for t in ts]

    good = [r for r in results if r.error is None]
    excluded = [(r.t, r.error) for r in results if r.error is not None]
    if len(good) < 1:
        raise GeometryError("every sweep sample was degenerate")
    faces = sorted(good[0].angles)
    prev = dict(good[0].angles) if anchor is None else {
        f: unwrap_to(good[0].angles[f], anchor[f]) for f in faces}
    rows = []
    for i, r in enumerate(good):
        cur = prev if i == 0 else _branch_step(prev, r.angles, r.t)
        rows.append([cur[f] for f in faces])
        prev = cur
    angles = np.array(rows)
    alphas = None
    if exact is not None and exact.exact is not None:
        alphas = _dehn_coefficients(faces, angles, exact.exact)
    vol = None if good[0].volume is None else np.array([r.volume for r in good])
    sch = scale = None
    if h is not None:
        sch = np.array([r.schlafli.lhs for r in good])
        scale = np.array([r.schlafli.scale for r in good])
    return SweepReport(np.array([r.t for r in good]), faces, angles, alphas, vol, sch, scale,
                       excluded, tol)


def sweep_verdict(report: SweepReport, tol_dehn: float = 1e-8, tol_volume: float = 1e-9,
                  tol_schlafli: float = 1e-6) -> dict[str, bool]:
    """Per-check pass/fail for a sweep of a Euclidean flexion."""
    out = {}
    if report.alphas is not None:
        out["dehn"] = all(v <= tol_dehn for v in report.max_deviation.values())
    if report.volume is not None:
        out["volume"] = bool(np.all(np.abs(report.volume) <= tol_volume))
    if report.schlafli is not None:
        out["schlafli"] = bool(np.all(np.abs(report.schlafli) <= tol_schlafli * report.schlafli_scale))
    return out


def face_label(face) -> str:
    return "phi_" + "_".join(face)


def sweep_csv(report: SweepReport) -> str:
    """CSV text: t, volume, schlafli_residual, one column per angle, one per alpha_d."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    header = ["t", "volume", "schlafli_residual"] + [face_label(f) for f in report.faces]
    ds = list(report.alphas) if report.alphas is not None else []
    header += [f"alpha_sqrt{d}" for d in ds]
    writer.writerow(header)

    def fmt(v):
        return "" if v is None else format(float(v), ".17g")

    for i, t in enumerate(report.t):
        row = [fmt(t),
               fmt(None if report.volume is None else report.volume[i]),
               fmt(None if report.schlafli is None else report.schlafli[i])]
        row += [fmt(v) for v in report.angles[i]]
        row += [fmt(report.alphas[d][i]) for d in ds]
        writer.writerow(row)
    return buf.getvalue()
