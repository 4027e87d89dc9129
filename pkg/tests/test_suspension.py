import copy
import math
import pickle
from fractions import Fraction

import numpy as np
import pytest
import sympy

from flexlab import elliptic as ec
from flexlab import suspension as su
from flexlab.errors import ConditionError, CurveError, DomainError
from flexlab.geometry import edge_key, edge_lengths, sigma_membership
from flexlab.pseudomanifold import validate
from flexlab.quadfield import QuadExt, parse_quad

from .conftest import SWEEP

EXPECTED_RADICANDS = {1, 2, 15, 30, 85, 102, 170}


def _sympy_solve_parabola(points):
    """Oracle: 3x3 rational solve through the first three points, residual at the fourth."""
    a, b, c = sympy.symbols("a b c")
    eqs = [a * sympy.Rational(P.x) ** 2 + b * sympy.Rational(P.x) + c - sympy.Rational(P.y)
           for P in points[:3]]
    sol = sympy.solve(eqs, [a, b, c], dict=True)[0]
    P4 = points[3]
    resid = sol[a] * sympy.Rational(P4.x) ** 2 + sol[b] * sympy.Rational(P4.x) + sol[c] - sympy.Rational(P4.y)
    return sol[a], sol[b], sol[c], resid


# ---------------------------------------------------------------------------
# build


def test_sign_pipeline(model):
    assert math.prod(model.s.values()) == 1
    assert model.sigma == {1: -1, 2: 1, 3: 1, 4: 1, 5: 1, 6: -1}
    for j in su.J:
        assert model.sigma[j] * model.sigma[su.nxt(j)] == model.s[j]


def test_roots_on_the_right_components(model):
    E = model.curve
    for j in su.J:
        assert model.r[j] >= E.b
        assert 0 <= model.rp[j] <= E.b_prime


def test_parabolas_match_sympy_oracle(model):
    for j in su.J:
        quad = model.quadruple(j)
        distinct = list(dict.fromkeys(quad))
        if len(distinct) < 4:
            continue
        a, b, c, resid = _sympy_solve_parabola(distinct)
        q = model.parabolas[j]
        assert (q.a, q.b, q.c) == (Fraction(str(a)), Fraction(str(b)), Fraction(str(c)))
        assert resid == 0


def test_vieta_relation_exact(model):
    for j in su.J:
        q = model.parabolas[j]
        prod = model.r[j] * model.rp[j] * model.r[su.nxt(j)] * model.rp[su.nxt(j)]
        # (c/a)^2 is the product of the four roots, sign s_j
        assert (q.c / q.a) ** 2 == prod
        assert (q.c / q.a > 0) == (model.s[j] == 1)


def test_group_sum_and_mirror_multiset(model):
    E = model.curve
    pts = []
    for j in su.J:
        total = ec.O
        for P in model.quadruple(j):
            total = ec.add(E, total, P)
        assert total.is_infinity
        pts += [model.Q_minus[j], model.Q_plus[j], model.Qp_minus[j], model.Qp_plus[j]]
    assert sorted(map(str, pts)) == sorted(str(ec.neg(P)) for P in pts)


def test_radicands(model):
    assert set(model.radicands()) <= EXPECTED_RADICANDS
    for d in model.radicands():
        assert set(sympy.factorint(d)) <= {2, 3, 5, 17}


def test_exact_lengths_positive_and_formula(model):
    for k in su.J:
        pk = su.vertex_name(k)
        rr, rrp = math.sqrt(model.r[k]), math.sqrt(model.rp[k])
        sig = model.sigma[k]
        assert float(model.exact_lengths[edge_key("S", pk)]) == pytest.approx((rr + sig * rrp) / 2, rel=1e-14)
        assert float(model.exact_lengths[edge_key("N", pk)]) == pytest.approx((rr - sig * rrp) / 2, rel=1e-14)
        a = model.parabolas[k].a
        assert model.exact_lengths[edge_key(pk, su.vertex_name(su.nxt(k)))] == QuadExt.rational(1 / (2 * abs(a)))
    assert all(q.sign() > 0 for q in model.exact_lengths.values())


def test_bipyramid_complex_is_valid():
    K = su.bipyramid_complex()
    assert validate(K).valid
    assert len(K.top_simplices) == 12
    assert len(K.edges()) == 18


def test_off_curve_basepoint_rejected(spec):
    bad = copy.deepcopy(spec)
    bad.basepoints["B"] = ec.CurvePoint(Fraction(1), Fraction(1))
    with pytest.raises(CurveError, match="basepoint B"):
        su.build(bad)


def test_flipped_word_fails_parabola_condition(spec):
    bad = copy.deepcopy(spec)
    row = bad.table[1]
    row["Q_minus"] = {k: -v for k, v in row["Q_minus"].items()}
    with pytest.raises(ConditionError) as info:
        su.build(bad)
    assert info.value.condition == "B"
    assert info.value.j == 1
    # the interpolation residual at the 4th point is nonzero (oracle: sympy solve)
    Qm, Qp, Pm, Pp = su.resolve_points(bad)
    quad = [Qm[1], Pm[1], Qp[2], Pp[2]]
    assert _sympy_solve_parabola(quad)[3] != 0
    with pytest.raises(ConditionError, match="off the parabola"):
        su.fit_parabola(bad.curve, quad, 1)


def test_negated_basepoint_still_valid(spec):
    # the words are linear, so P -> -P for a basepoint mirrors whole pairs and keeps (A)-(D)
    alt = copy.deepcopy(spec)
    alt.basepoints["C"] = ec.neg(alt.basepoints["C"])
    m = su.build(alt)
    assert math.prod(m.s.values()) == 1


def test_sigma_flip_swaps_poles(spec, model):
    flipped = su.build(spec.with_sigma1(1))
    assert flipped.sigma == {j: -s for j, s in model.sigma.items()}
    for k in su.J:
        pk = su.vertex_name(k)
        assert flipped.exact_lengths[edge_key("N", pk)] == model.exact_lengths[edge_key("S", pk)]
        assert flipped.exact_lengths[edge_key("S", pk)] == model.exact_lengths[edge_key("N", pk)]


def test_model_pickles(model):
    clone = pickle.loads(pickle.dumps(model))
    assert clone.exact_lengths == model.exact_lengths
    assert np.array_equal(su.vertex_array(clone, 75.0), su.vertex_array(model, 75.0))


# ---------------------------------------------------------------------------
# flexion


@pytest.mark.parametrize("x", [51.0, 100.0, 10.0, 120.0])
def test_domain(model, x):
    with pytest.raises(DomainError, match="open interval"):
        su.vertex_array(model, x)
    with pytest.raises(DomainError):
        su.F(model, 1, x)


def test_unit_modulus_and_product(model):
    for x in SWEEP:
        Fs = [su.F(model, j, x) for j in su.J]
        for f in Fs:
            assert abs(abs(f) - 1) <= 1e-12
        assert abs(np.prod(Fs) - 1) <= 1e-10


def test_arg_F_is_half_plane_angle(model):
    # independent: angle between half-planes N S p_j and N S p_j+1 around the z-axis
    P = su.vertex_array(model, 75.0)
    for j in su.J:
        u, v = P[j + 1][:2], P[su.nxt(j) + 1][:2]
        ang = math.atan2(u[0] * v[1] - u[1] * v[0], float(np.dot(u, v)))
        assert math.remainder(su.theta(model, j, 75.0) - ang, 2 * math.pi) == pytest.approx(0, abs=1e-9)


def test_poles_and_heights(model):
    x = 75.0
    P = su.vertex_array(model, x)
    assert np.allclose(P[0], [0, 0, math.sqrt(x)])
    assert np.allclose(P[1], [0, 0, 0])
    assert P[2][1] == 0 and P[2][0] > 0


def test_lengths_constant_over_sweep(model):
    exact = {e: float(q) for e, q in model.exact_lengths.items()}
    ref = model.edge_lengths()
    for x in SWEEP:
        P = su.vertices_at(model, x)
        got = edge_lengths(P).values
        assert set(got) == set(exact)
        for e, v in got.items():
            assert abs(v - exact[e]) <= 1e-9 * exact[e]
        assert sigma_membership(P, ref, 1e-9).member


@pytest.mark.parametrize("x", [60.0, 75.0, 90.0])
def test_pole_distance_identities(model, x):
    P = su.vertices_at(model, x)
    for k in su.J:
        pk = su.vertex_name(k)
        rr, rrp = math.sqrt(model.r[k]), math.sqrt(model.rp[k])
        sig = model.sigma[k]
        assert np.linalg.norm(P[pk] - P["S"]) == pytest.approx((rr + sig * rrp) / 2, rel=1e-12)
        assert np.linalg.norm(P[pk] - P["N"]) == pytest.approx((rr - sig * rrp) / 2, rel=1e-12)


def _plane_fit_deviation(pts):
    c = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(c)
    return float(np.max(np.abs(c @ vt[-1])))


def test_flat_in_the_limit(model):
    devs = [_plane_fit_deviation(su.vertex_array(model, 51 + h)) for h in (1e-2, 1e-4, 1e-6)]
    assert devs[-1] <= 1e-3
    assert devs[0] > devs[1] > devs[2]
    # far from the endpoint the surface is genuinely three-dimensional
    assert _plane_fit_deviation(su.vertex_array(model, 75.0)) > 0.1


# ---------------------------------------------------------------------------
# link quadrangle and angle profiles


def test_corrected_cosines(model):
    L = su.link_quadrangle(model, 5)
    minus = parse_quad("(437*sqrt(170) - 121*sqrt(30))/6500")
    plus = parse_quad("(437*sqrt(170) + 121*sqrt(30))/6500")
    assert L.cosines[("N", "p6")] == minus
    assert L.cosines[("S", "p4")] == minus
    assert L.cosines[("S", "p6")] == plus
    assert L.cosines[("N", "p4")] == plus


def test_quadrangle_sides_match_embedding(model):
    for x in (55.0, 75.0, 95.0):
        L = su.link_quadrangle(model, 5, x)
        for key, side in L.sides.items():
            assert L.measured[key] == pytest.approx(side, abs=1e-9)


def test_np4_side_shorter_than_np6(model):
    L = su.link_quadrangle(model, 5)
    assert L.sides[("N", "p4")] < L.sides[("N", "p6")]
    assert L.sides[("S", "p6")] < L.sides[("S", "p4")]


def test_angle_profiles_near_flat(model):
    xs = np.linspace(51.01, 56.0, 40)
    prof = su.angle_profiles(model, xs)
    assert prof.monotonicity["phi5"] == "decreasing"
    assert prof.monotonicity["phi2"] == "increasing"
    assert np.max(np.abs(prof.angles["phi12"] - prof.angles["phi45"])) <= 1e-9
    # anchored near the flat values
    assert prof.angles["phi2"][0] == pytest.approx(math.pi, abs=0.2)
    assert prof.angles["phi5"][0] == pytest.approx(math.pi, abs=0.2)
    assert prof.angles["phi12"][0] == pytest.approx(0, abs=0.2)


def test_alpha4_combination_constant(model):
    prof = su.angle_profiles(model, SWEEP)
    combo = -prof.angles["phi2"] - prof.angles["phi5"]
    assert np.ptp(combo) <= 1e-8
    assert np.max(np.abs(prof.angles["phi12"] - prof.angles["phi45"])) <= 1e-9


def test_angle_profiles_rejects_unsorted(model):
    with pytest.raises(ValueError):
        su.angle_profiles(model, [60.0, 55.0])
