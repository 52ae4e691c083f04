import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ffdyn.funcfield import Place, log_abs, random_ratfunc
from ffdyn.heights import (
    HeightError,
    HeightEstimate,
    height_sequence,
    julia_membership,
    local_height,
    log_norm,
    norm_defect,
    norm_violation_point,
    verify_height_identities,
)
from ffdyn.homog import ConjScalar, LinearMap, evaluate, iterate, random_map
from ffdyn.resultant import SingularMap, res_ord, resultant
from conftest import F5, K, Q, hmap, place, vec

V = place("t")
INF = place("inf")


def test_log_norm_examples():
    assert log_norm(vec(["t", "1"]), V) == 0
    assert log_norm(vec(["t", "1"]), INF) == 1
    assert log_norm(vec(["t^2", "t^3"]), V) == -2
    with pytest.raises(HeightError):
        log_norm(vec(["0", "0"]), V)


def test_local_height_good_reduction_is_exact():
    sq = hmap(["x0^2", "x1^2"])
    h = local_height(sq, vec(["t", "1"]), V)
    assert h == HeightEstimate(Fraction(0), Fraction(0), 0, True)
    assert local_height(sq, vec(["t", "1"]), INF).value == 1


def closed_form_orbit(ell):
    """(x0^2, t x1^2) on (0, 1): the orbit is (0, t^(2^l - 1))."""
    return Fraction(-(2**ell - 1), 2**ell)


def test_worked_orbit_height_is_minus_one():
    phi = hmap(["x0^2", "t*x1^2"])
    x = vec(["0", "1"])
    h = local_height(phi, x, V)
    assert h.exact and h.value == -1
    # the truncated sequence follows the closed form and converges to -1
    seq = height_sequence(phi, x, V, 6)
    assert seq == [closed_form_orbit(l) for l in range(1, 7)]


def test_certified_bound_brackets_truth():
    # force the approximate route by asking for zero exact steps
    phi = hmap(["x0^2", "t*x1^2"])
    h = local_height(phi, vec(["0", "1"]), V, Fraction(1, 2**20), exact_steps=0)
    lo, hi = h.interval()
    assert lo <= -1 <= hi and h.error_bound <= Fraction(1, 2**20)


def test_local_height_errors():
    with pytest.raises(HeightError):
        local_height(hmap(["x0", "x1"]), vec(["1", "1"]), V)
    with pytest.raises(SingularMap):
        local_height(hmap(["x0*x1", "x0*x1"]), vec(["1", "1"]), V)
    with pytest.raises(HeightError):
        local_height(hmap(["x0^2", "x1^2"]), vec(["0", "0"]), V)


def test_unnormalized_model_uses_offset():
    # t*Phi shifts the height by log|t|/(d-1) = -1
    base = local_height(hmap(["x0^2", "x1^2"]), vec(["1", "1"]), V).value
    shifted = local_height(hmap(["t*x0^2", "t*x1^2"]), vec(["1", "1"]), V).value
    assert shifted == base - 1


def test_height_identities_examples():
    sq = hmap(["x0^2", "x1^2"])
    G = LinearMap.diagonal([Q.one(), K("1/t")])
    checks = {c.name: c for c in verify_height_identities(sq, G, K("t"), vec(["1", "1"]), V)}
    assert checks["scaling"].lhs.value == -1 and checks["scaling"].rhs == -1
    assert checks["content"].lhs.value == -1
    assert all(c.ok for c in checks.values())


def test_conjugation_identity_at_random_points(rng):
    sq = hmap(["x0^2", "x1^2"])
    G = LinearMap.diagonal([Q.one(), K("1/t")])
    from ffdyn.homog import conjugate

    psi = conjugate(sq, G)
    for _ in range(10):
        x = [random_ratfunc(Q, rng, 2) for _ in range(2)]
        a = local_height(psi, x, V)
        b = local_height(sq, G.apply(x), V)
        assert abs(a.value - b.value) <= a.error_bound + b.error_bound


def test_julia_examples():
    sq = hmap(["x0^2", "x1^2"])
    assert julia_membership(sq, vec(["1", "t"]), V).status == "BoundedCertified"
    out = julia_membership(sq, vec(["1/t", "1"]), V)
    assert out.status == "Escapes" and out.iteration == 1


def test_julia_boundary_point_with_witness():
    phi = hmap(["x0^2", "t*x1^2"])
    one = Q.one()
    w = (ConjScalar(one), ConjScalar(K("1/t")))
    out = julia_membership(phi, vec(["0", "1/t"]), V, witness=w)
    assert out.status == "BoundedCertified"


def test_julia_requires_normalized_model():
    with pytest.raises(HeightError):
        julia_membership(hmap(["t*x0^2", "t*x1^2"]), vec(["1", "1"]), V)


def test_julia_never_escapes_bounded_points():
    phi = hmap(["x0^2", "t*x1^2"])
    for x in (vec(["0", "1"]), vec(["1", "1"]), vec(["t", "1"]), vec(["1", "t^2"])):
        h = local_height(phi, x, V)
        verdict = julia_membership(phi, x, V)
        if h.value + h.error_bound <= 0:
            assert verdict.status != "Escapes"


# ---------------------------------------------------------------------------
# norm multiplicativity and its failure


def test_norm_multiplicative_under_good_reduction(rng):
    for field in (Q, F5):
        phi = random_map(field, 2, 2, rng, constant=True)
        if not resultant(phi).value:
            continue
        v = Place.parse("t", field)
        for _ in range(10):
            x = [random_ratfunc(field, rng, 3, nonzero=False) for _ in range(2)]
            if any(x):
                assert norm_defect(phi, x, v) == 0


def test_violation_point_from_reduced_common_zero():
    phi = hmap(["x0^2", "t*x1^2"])
    z = norm_violation_point(phi, V)
    assert z is not None and norm_defect(phi, z, V) > 0


# ---------------------------------------------------------------------------
# properties

seeds = st.integers(min_value=0, max_value=10**6)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_functional_equation(seed):
    rng = random.Random(seed)
    phi = random_map(F5, 2, 2, rng, max_deg=1)
    if not resultant(phi).value:
        return
    v = Place.parse("t", F5)
    x = [random_ratfunc(F5, rng, 2, nonzero=False) for _ in range(2)]
    if not any(x):
        return
    a = local_height(phi, evaluate(phi, x), v)
    b = local_height(phi, x, v)
    assert abs(a.value - 2 * b.value) <= a.error_bound + 2 * b.error_bound


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_error_bound_halves_per_iteration(seed):
    rng = random.Random(seed)
    phi = hmap(["x0^2+t*x1^2", "t*x0*x1"], F5)
    x = [random_ratfunc(F5, rng, 2) for _ in range(2)]
    v = Place.parse("t", F5)
    e1 = local_height(phi, x, v, Fraction(1, 2**6), exact_steps=0)
    e2 = local_height(phi, x, v, Fraction(1, 2**12), exact_steps=0)
    if not e1.exact and not e2.exact:
        assert e2.error_bound * 2 ** (e2.iterations_used - e1.iterations_used) == e1.error_bound


def _bracket(phi, x, v, ell):
    """Brute-force interval for the height from ``ell`` truncated iterations (offset included)."""
    from ffdyn.homog import normalize_at

    d, r = phi.degree, res_ord(phi, v)
    _, m = normalize_at(phi, v)
    offset = Fraction(-m * v.degree, d - 1)
    g = height_sequence(phi, x, v, ell)[-1] + offset
    return g - Fraction(r * v.degree, d**ell * (d - 1)), g


@pytest.mark.parametrize("rows", [[["t", "1"], ["0", "1"]], [["t^2", "t"], ["0", "1"]], [["1", "0"], ["t", "t"]]])
def test_lattice_witness_undoes_conjugation(rows):
    from ffdyn.heights import lattice_witness
    from ffdyn.homog import conjugate

    phi0 = hmap(["x0^2+x0*x1", "2*x1^2"])
    G = LinearMap.from_strings(Q, rows)
    psi = conjugate(phi0, G)
    assert res_ord(psi, V) > 0
    W = lattice_witness(psi, V)
    assert W is not None and res_ord(conjugate(psi, W), V) == 0
    x = vec(["t+2", "3"])
    h = local_height(psi, x, V)
    assert h.exact and h.value == local_height(phi0, G.apply(x), V).value


def test_residue_orbit_closing_up_is_exact():
    phi = hmap(["x0^2 + x0*x1", "t*x1^2 + x0*x1"], F5)
    x, v = vec(["1", "2"], F5), place("t", F5)
    h = local_height(phi, x, v, exact_steps=0)
    assert h.exact and h.value == Fraction(-11, 64)
    lo, hi = _bracket(phi, x, v, 12)
    assert lo <= h.value <= hi


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["Q", "F5"]), st.sampled_from(["t", "t+1", "inf"]))
def test_certified_values_inside_brute_force_bracket(seed, which, vname):
    rng = random.Random(seed)
    field = Q if which == "Q" else F5
    v = place(vname, field)
    phi = random_map(field, 2, 2, rng, max_deg=1)
    if not resultant(phi).value:
        return
    x = [random_ratfunc(field, rng, 1) for _ in range(2)]
    if not any(x):
        return
    h = local_height(phi, x, v, exact_steps=0)
    lo, hi = _bracket(phi, x, v, 8)
    if h.exact:
        assert lo <= h.value <= hi
    else:
        a, b = h.interval()
        assert a <= hi and lo <= b
