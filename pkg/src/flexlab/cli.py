"""Command-line front end: ``flexlab validate|build|sweep|dehn|rigidity|volume``.

Exit codes: 0 all checks pass, 1 a check failed, 2 unusable input.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import measures as me
from . import suspension as su
from .errors import (
    BranchJumpError,
    DomainError,
    FlexlabError,
    GeometryError,
    InputError,
    InvalidComplexError,
    NotAFlexionError,
)
from .geometry import TAU_GEO, edge_lengths, nondegenerate_lengths, rigidity, sigma_membership
from .io import bundled, load_polyhedron, load_suspension_spec, write_polyhedron
from .pseudomanifold import validate
from .quadfield import format_quad

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _config_path(value: str) -> Path:
    # "bundled" is a shortcut for the bundled hexagonal suspension config
    return bundled("hexagonal_suspension.yaml") if value == "bundled" else Path(value)


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


# ---------------------------------------------------------------------------
# validate


def cmd_validate(args) -> int:
    pf = load_polyhedron(args.path, tol=args.tol_geo)
    P = pf.polyhedron
    ok = True
    report = validate(P.complex)
    print(f"pseudo-manifold: {_status(report.valid)}")
    for v in report.violations:
        print(f"  {v}")
    ok &= report.valid
    if not report.valid:
        return EXIT_FAIL
    lengths = pf.exact_lengths if pf.exact_lengths is not None else edge_lengths(P)
    nd = nondegenerate_lengths(P.complex, lengths, P.space)
    print(f"non-degenerate lengths: {_status(nd.ok)}")
    if not nd.ok:
        print(f"  certificate: simplex {nd.certificate}")
    ok &= nd.ok
    mem = sigma_membership(P, lengths, args.tol_geo)
    print(f"configuration-space membership (tol {args.tol_geo:g}): {_status(mem.member)}")
    for family, r in mem.residuals.items():
        print(f"  {family}: max residual {r:.3e}")
    if not mem.member:
        for e, r in mem.worst_edges():
            print(f"  worst edge {e[0]}-{e[1]}: {r:.3e}")
    ok &= mem.member
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# build


def _print_model(model: su.SuspensionModel):
    E = model.curve
    print(f"curve: y^2 = x(x - {E.b_prime})(x - {E.b})")
    for name, P in model.spec.basepoints.items():
        print(f"basepoint {name} = {P}")
    print("conditions (A)-(D): PASS")
    for j in su.J:
        print(f"j = {j}")
        print(f"  Q{j}-  = {model.Q_minus[j]}")
        print(f"  Q{su.nxt(j)}+  = {model.Q_plus[su.nxt(j)]}")
        print(f"  Q'{j}- = {model.Qp_minus[j]}")
        print(f"  Q'{su.nxt(j)}+ = {model.Qp_plus[su.nxt(j)]}")
        p = model.parabolas[j]
        print(f"  parabola: a = {p.a}, b = {p.b}, c = {p.c}")
        print(f"  r = {model.r[j]}, r' = {model.rp[j]}, s = {model.s[j]:+d}")
    print("sigma: " + ", ".join(f"sigma{k} = {model.sigma[k]:+d}" for k in su.J))
    print("exact edge lengths:")
    for e, q in sorted(model.exact_lengths.items()):
        print(f"  {e[0]}-{e[1]}: {format_quad(q)}  ({float(q):.15g})")
    print("radicands: " + ", ".join(str(d) for d in model.radicands()))


def _snapshot(model, x, path):
    P = su.vertices_at(model, x)
    write_polyhedron(path, P, model.exact_lengths,
                     header=f"hexagonal suspension snapshot at x = {x!r}")
    print(f"wrote {path}")


def cmd_build(args) -> int:
    spec = load_suspension_spec(_config_path(args.config))
    try:
        model = su.build(spec)
    except FlexlabError as exc:
        if isinstance(exc, InputError):
            raise
        print(f"build failed: {exc}")
        for P in getattr(exc, "points", ()):
            print(f"  offending point: {P}")
        return EXIT_FAIL
    _print_model(model)
    lo, hi = model.interval
    if args.at is not None:
        out = Path(args.out) if args.out else Path(f"suspension_x{args.at:g}.yaml")
        _snapshot(model, args.at, out)
    if args.snapshot_grid:
        outdir = Path(args.out) if args.out else Path(".")
        outdir.mkdir(parents=True, exist_ok=True)
        k = args.snapshot_grid
        for x in np.linspace(lo, hi, k + 2)[1:-1]:
            _snapshot(model, float(x), outdir / f"suspension_x{x:.6g}.yaml")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


def cmd_sweep(args) -> int:
    spec = load_suspension_spec(_config_path(args.config))
    try:
        model = su.build(spec)
    except FlexlabError as exc:
        print(f"build failed: {exc}")
        return EXIT_FAIL
    lo, hi = model.interval
    if not (lo < args.t_from < args.t_to < hi):
        raise DomainError(f"sweep range [{args.t_from:g}, {args.t_to:g}] must lie inside the open "
                          f"interval ({lo:g}, {hi:g}) with from < to")
    ts = np.linspace(args.t_from, args.t_to, args.steps)
    try:
        report = me.dehn_sweep(su.flexion_path(model), ts, h=args.h, tol=args.tol_dehn,
                               jobs=args.jobs, check_rtol=args.tol_geo)
    except (BranchJumpError, NotAFlexionError, GeometryError) as exc:
        t = getattr(exc, "t", None)
        print(f"sweep failed{'' if t is None else f' at t = {t!r}'}: {exc}")
        return EXIT_FAIL
    text = me.sweep_csv(report)
    if args.out:
        Path(args.out).write_text(text, newline="")
        print(f"wrote {args.out} ({len(report.t)} rows)")
    for t, why in report.excluded:
        print(f"excluded t = {t!r}: {why}")
    for d, dev in report.max_deviation.items():
        print(f"alpha_sqrt{d}: max deviation {dev:.3e}")
    print(f"max |volume|: {np.max(np.abs(report.volume)):.3e}")
    rel = np.max(np.abs(report.schlafli) / report.schlafli_scale)
    print(f"max Schlaefli residual / sum V: {rel:.3e}")
    verdict = me.sweep_verdict(report, tol_dehn=args.tol_dehn, tol_volume=args.tol_geo)
    ok = all(verdict.values()) and not report.excluded
    checks = ", ".join(f"{k} {_status(v)}" for k, v in verdict.items())
    print(f"verdict: {_status(ok)} ({checks})")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# dehn, rigidity, volume


def _load_valid(args):
    pf = load_polyhedron(args.path, tol=args.tol_geo)
    report = validate(pf.polyhedron.complex)
    if not report.valid:
        raise InvalidComplexError(report)
    return pf


def cmd_dehn(args) -> int:
    pf = _load_valid(args)
    P = pf.polyhedron
    if pf.exact_lengths is not None:
        inv, label = me.dehn(P, pf.exact_lengths), "reduced"
    else:
        inv = me.heuristic_dehn(P)
        label = "reduced (heuristic: lengths recognized numerically)"
        if inv is None:
            inv, label = me.dehn(P), None
    if args.raw or label is None:
        print("raw terms (edge, length, angle):")
        for t in inv.raw_terms:
            print(f"  {'-'.join(t.face)}: {t.length:.15g} (x) {t.angle:.15g}")
    if label is None:
        print("no reduced form: lengths are not exact")
        return EXIT_OK
    print(f"{label}:")
    trivial = inv.trivial_coefficients()
    if all(v is not None for v in trivial.values()):
        print("0 (all terms = 0 mod pi*Q)")
        for d, q in trivial.items():
            print(f"  sqrt({d}) (x) {me._pi_multiple(q)}")
        return EXIT_OK
    for d, a in inv.reduced.items():
        print(f"  {d} -> {me.describe_angle(a)}  ({a:.15g})")
    print(f"reconstruction error: {abs(inv.reconstruction() - inv.numeric_value()):.3e}")
    return EXIT_OK


def cmd_rigidity(args) -> int:
    P = _load_valid(args).polyhedron
    rep = rigidity(P, args.rtol)
    print(f"coordinates: {rep.coordinate_count}")
    print(f"rank: {rep.rank}")
    print(f"trivial motions: {rep.trivial_motion_dim}")
    print(f"nontrivial flex dimension: {rep.nontrivial_flex_dim}")
    if rep.degenerate:
        print("degenerate: " + "; ".join(rep.reasons))
    return EXIT_OK


def cmd_volume(args) -> int:
    P = _load_valid(args).polyhedron
    vol = me.oriented_volume(P)
    print(f"oriented volume: {vol:.17g}")
    if args.monte_carlo:
        est, err = me.monte_carlo_volume(P, args.monte_carlo, seed=args.seed)
        agree = abs(est - vol) <= 3 * err if err > 0 else math.isclose(est, vol, abs_tol=1e-12)
        print(f"monte carlo ({args.monte_carlo} samples): {est:.6g} +- {err:.3g}")
        print(f"agreement within 3 standard errors: {_status(agree)}")
        return EXIT_OK if agree else EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------


def _steps(value: str) -> int:
    n = int(value)
    if n < 3:
        raise argparse.ArgumentTypeError("a sweep needs at least 3 steps")
    return n


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flexlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--tol-geo", type=float, default=TAU_GEO,
                       help="geometric tolerance (default %(default)g)")
        p.set_defaults(fn=fn)
        return p

    p = add("validate", cmd_validate, "check a polyhedron file")
    p.add_argument("path")

    p = add("build", cmd_build, "resolve a suspension config and print its data")
    p.add_argument("config", help="config file, or 'bundled' for the shipped one")
    p.add_argument("--at", type=float, help="write a snapshot at this parameter")
    p.add_argument("--snapshot-grid", type=_positive_int, metavar="K",
                   help="write K evenly spaced snapshots")
    p.add_argument("--out", help="snapshot file (--at) or directory (--snapshot-grid)")

    p = add("sweep", cmd_sweep, "track Dehn coefficients, volume and Schlaefli residual")
    p.add_argument("config", help="config file, or 'bundled' for the shipped one")
    p.add_argument("--from", dest="t_from", type=float, default=51.5)
    p.add_argument("--to", dest="t_to", type=float, default=99.5)
    p.add_argument("--steps", type=_steps, default=100)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--tol-dehn", type=float, default=1e-8)
    p.add_argument("--h", type=float, default=1e-4, help="central-difference step")

    p = add("dehn", cmd_dehn, "print the Dehn invariant of a polyhedron file")
    p.add_argument("path")
    p.add_argument("--raw", action="store_true", help="also print raw terms")

    p = add("rigidity", cmd_rigidity, "infinitesimal flex dimensions")
    p.add_argument("path")
    p.add_argument("--rtol", type=float, default=1e-8, help="SVD rank threshold relative to sigma_max")

    p = add("volume", cmd_volume, "oriented volume (divergence form, optional Monte Carlo)")
    p.add_argument("path")
    p.add_argument("--monte-carlo", type=_positive_int, metavar="N")
    p.add_argument("--seed", type=int, help="Monte-Carlo seed (default: FLEXLAB_SEED or built-in)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FlexlabError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
