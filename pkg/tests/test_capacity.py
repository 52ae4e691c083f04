import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ffdyn.capacity import (
    CapacityError,
    DegenerateSubset,
    Ellipsoid,
    PointSet,
    delta,
    ellipsoid_contains_unit_ball,
    ellipsoid_diameter,
    general_position_points,
    general_position_sequence,
    global_diameter_sum,
    julia_diameter,
    m_diameter,
    monotonicity_check,
    rigidity_check,
)
from ffdyn.funcfield import ConstantField, log_abs, random_ratfunc
from ffdyn.homog import LinearMap, scale
from conftest import F5, K, Q, hmap, place, vec

V = place("t")
BASIC = [vec(["1", "0"]), vec(["0", "1"]), vec(["1", "1"])]
DIAG_T = LinearMap.diagonal([K("t"), Q.one()])


def test_delta_examples():
    assert delta(BASIC, V) == 0
    assert delta([DIAG_T.apply(p) for p in BASIC], V) == -3
    with pytest.raises(DegenerateSubset):
        delta([vec(["1", "t"]), vec(["2", "2*t"]), vec(["0", "1"])], V)


def test_m_diameter_examples():
    E = PointSet.of(BASIC, V)
    rep = m_diameter(E, 3)
    assert rep.log_dM == 0 and rep.J_M == 3 and rep.attaining_subset == (0, 1, 2)
    assert m_diameter(E.transform(DIAG_T), 3).log_dM == -1


def test_m_diameter_errors():
    E = PointSet.of(BASIC, V)
    with pytest.raises(CapacityError):
        m_diameter(E, 4)
    with pytest.raises(CapacityError):
        m_diameter(E, 1)
    same_line = PointSet.of([vec(["1", "t"]), vec(["t", "t^2"]), vec(["2", "2*t"])], V)
    with pytest.raises(DegenerateSubset):
        m_diameter(same_line, 2)
    with pytest.raises(CapacityError):
        PointSet.of([vec(["0", "0"])], V)


def test_all_degenerate_is_skipped_in_monotonicity():
    same_line = PointSet.of([vec(["1", "t"]), vec(["t", "t^2"]), vec(["2", "2*t"])], V)
    ok, reports = monotonicity_check(same_line, range(2, 4))
    assert ok and reports == []


def test_general_position_examples():
    seq = general_position_sequence(F5, 1, 4)
    assert seq == [(1, 0), (0, 1), (1, 1), (1, 2)]
    for a, b in itertools.combinations(seq, 2):
        assert (a[0] * b[1] - a[1] * b[0]) % 5
    assert general_position_sequence(F5, 2, 3) == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    with pytest.raises(CapacityError):
        general_position_sequence(ConstantField.prime(2), 1, 4)


def test_general_position_unit_ball_samples_reach_zero():
    for field, N, count in ((F5, 1, 6), (Q, 1, 6), (F5, 2, 6)):
        pts = general_position_points(field, N, count)
        E = PointSet.of(pts, place("t", field))
        for M in range(N + 1, count + 1):
            assert m_diameter(E, M).log_dM == 0


def test_ellipsoid_examples():
    one = Q.one()
    ident = Ellipsoid(LinearMap.identity(Q, 2))
    assert ellipsoid_diameter(ident, V) == 0
    assert ellipsoid_diameter(Ellipsoid(DIAG_T), V) == -1
    inv_t = Ellipsoid(LinearMap.diagonal([one, K("1/t")]))
    assert ellipsoid_diameter(inv_t, V) == 1
    assert ellipsoid_contains_unit_ball(inv_t, V)
    assert not ellipsoid_contains_unit_ball(Ellipsoid(LinearMap.diagonal([one, K("t")])), V)
    r = rigidity_check(ident, V)
    assert r["applies"] and r["generator_integral"] and r["ok"]
    with pytest.raises(CapacityError):
        Ellipsoid(LinearMap(Q, [[one, one], [one, one]]))


def test_rigidity_on_nontrivial_unit_ellipsoid():
    # [[1, t], [0, 1]] is in GL_2(O_v) and so maps the ball onto itself
    G = LinearMap(Q, [[Q.one(), K("t")], [Q.zero(), Q.one()]])
    r = rigidity_check(Ellipsoid(G), V)
    assert r["applies"] and r["generator_integral"]
    # the same matrix at infinity does not contain the ball
    assert not rigidity_check(Ellipsoid(G), place("inf"))["applies"]


def test_julia_diameter_worked_instance():
    phi = hmap(["x0^2", "t*x1^2"])
    G = LinearMap.diagonal([Q.one(), K("1/t")])
    jd = julia_diameter(phi, G, V)
    assert jd.via_witness == 1 and jd.via_resultant == 1 and jd.C == Fraction(-1, 2)


def test_julia_diameter_good_reduction_and_scaling():
    sq = hmap(["x0^2", "x1^2"])
    assert julia_diameter(sq, None, V).via_witness == 0
    phi = hmap(["x0^2", "t*x1^2"])
    G = LinearMap.diagonal([Q.one(), K("1/t")])
    jd = julia_diameter(scale(phi, K("t")), G, V)
    assert jd.via_witness == jd.via_resultant == 3


def test_julia_diameter_rejects_bad_witness():
    with pytest.raises(CapacityError):
        julia_diameter(hmap(["x0^2", "t*x1^2"]), None, V)


def test_global_sum_vanishes():
    phi = hmap(["x0^2", "t*x1^2"])
    G = LinearMap.diagonal([Q.one(), K("1/t")])
    total, rows = global_diameter_sum(phi, G)
    assert total == 0
    assert dict((str(v), r) for v, r in rows) == {"t": 1, "inf": -1}


# ---------------------------------------------------------------------------
# properties

seeds = st.integers(min_value=0, max_value=10**6)


def _points(field, rng, k, n=2):
    out = []
    while len(out) < k:
        p = [random_ratfunc(field, rng, 1, 3, nonzero=False, polynomial=True) for _ in range(n)]
        if any(p):
            out.append(p)
    return out


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_det_shift_and_monotone(seed):
    rng = random.Random(seed)
    field = F5 if seed % 2 else Q
    v = place("t", field)
    E = PointSet.of(_points(field, rng, 6), v)
    G = LinearMap(field, [[random_ratfunc(field, rng, 1, polynomial=True) for _ in range(2)] for _ in range(2)])
    if not G.det():
        return
    shift = log_abs(G.det(), v)
    ok, reports = monotonicity_check(E, range(2, 7))
    assert ok
    for rep in reports:
        assert m_diameter(E.transform(G), rep.M).log_dM == rep.log_dM + shift


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_unit_ball_subsets_never_exceed_zero(seed):
    rng = random.Random(seed)
    pts = _points(F5, rng, 5)
    E = PointSet.of(pts, place("t", F5))
    try:
        assert m_diameter(E, 3).log_dM <= 0
    except DegenerateSubset:
        pass
