"""Seeded randomized battery of the invariants of every module.

``run_suite(seed)`` is deterministic: the same seed gives the same report,
byte for byte once serialized.  Failing cases are serialized into the report
so they can be replayed.  ``inject="resultant-sign"`` swaps in a resultant
with the wrong sign, which the composition-law check must catch.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable

from .funcfield import ConstantField, Place, RatFunc, random_ratfunc, support, verify_product_formula
from .homog import HomogMap, LinearMap, compose, conjugate, evaluate, iterate, random_map, scale
from .io import map_to_json, vector_to_json
from .resultant import fit_composition_exponents, resultant, scaling_exponent

ResFn = Callable[[HomogMap], RatFunc]

INJECTIONS = ("resultant-sign",)


@dataclass
class CheckResult:
    name: str
    cases: int = 0
    failures: list = dc_field(default_factory=list)

    def fail(self, **case) -> None:
        self.failures.append({k: _jsonable(v) for k, v in case.items()})

    def to_json(self) -> dict:
        # one dumped case is enough to replay; the count says how many failed
        return {
            "name": self.name,
            "cases": self.cases,
            "failed": len(self.failures),
            "passed": not self.failures,
            "first_failure": self.failures[0] if self.failures else None,
        }


def _jsonable(v):
    if isinstance(v, HomogMap):
        return map_to_json(v)
    if isinstance(v, LinearMap):
        return [vector_to_json(r) for r in v.matrix]
    if isinstance(v, (RatFunc, Fraction, Place)):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _true_res(phi: HomogMap) -> RatFunc:
    return resultant(phi).value


def _random_linear(field: ConstantField, n: int, rng: random.Random, max_deg: int = 1) -> LinearMap:
    while True:
        rows = [[random_ratfunc(field, rng, max_deg, 3, nonzero=False, polynomial=True) for _ in range(n)] for _ in range(n)]
        M = LinearMap(field, rows)
        if M.det():
            return M


def _random_vector(field: ConstantField, n: int, rng: random.Random, max_deg: int = 2) -> list[RatFunc]:
    while True:
        x = [random_ratfunc(field, rng, max_deg, 3, nonzero=False) for _ in range(n)]
        if any(x):
            return x


def _nonsingular(field, n, d, rng, res: ResFn = _true_res, **kw) -> HomogMap:
    while True:
        phi = random_map(field, n, d, rng, **kw)
        if resultant(phi).value:
            return phi


FIELDS = (ConstantField.rationals(), ConstantField.prime(5))


# ---------------------------------------------------------------------------
# checks


def check_product_formula(rng: random.Random, res: ResFn) -> CheckResult:
    out = CheckResult("product_formula")
    for field in FIELDS:
        for _ in range(20):
            a = random_ratfunc(field, rng, 6)
            out.cases += 1
            if verify_product_formula(a) != 0:
                out.fail(field=str(field), element=a)
    return out


def check_resultant_linear(rng: random.Random, res: ResFn) -> CheckResult:
    out = CheckResult("resultant_of_linear_is_det")
    for field in FIELDS:
        for n in (2, 3):
            for _ in range(3):
                M = _random_linear(field, n, rng)
                out.cases += 1
                if res(M.as_homog()) != M.det():
                    out.fail(field=str(field), matrix=M)
    return out


def check_resultant_scaling(rng: random.Random, res: ResFn) -> CheckResult:
    out = CheckResult("resultant_scaling")
    field = FIELDS[0]
    for N, d in ((1, 2), (1, 3), (2, 2)):
        phi = _nonsingular(field, N + 1, d, rng, max_deg=1)
        c = random_ratfunc(field, rng, 2)
        out.cases += 1
        if res(scale(phi, c)) != c ** scaling_exponent(N, d) * res(phi):
            out.fail(map=phi, scalar=c)
    return out


_EXPONENTS: dict = {}


def _exponents(N: int, d: int, e: int):
    key = (N, d, e)
    if key not in _EXPONENTS:
        _EXPONENTS[key] = fit_composition_exponents(N, d, e)
    return _EXPONENTS[key]


def check_composition_law(rng: random.Random, res: ResFn) -> CheckResult:
    """``Res(phi o psi) = s Res(phi)^a Res(psi)^b`` with the fitted exponents."""
    out = CheckResult("composition_law")
    for N, d, e in ((1, 2, 2), (1, 2, 3), (2, 2, 2)):
        ex = _exponents(N, d, e)
        field = FIELDS[0] if N == 1 else ConstantField.prime(7)
        kw = {"max_deg": 1} if N == 1 else {"constant": True}
        for _ in range(2):
            phi = _nonsingular(field, N + 1, d, rng, **kw)
            psi = _nonsingular(field, N + 1, e, rng, **kw)
            out.cases += 1
            lhs = res(compose(phi, psi))
            rhs = res(phi) ** ex.a * res(psi) ** ex.b * ex.sign
            if lhs != rhs:
                out.fail(N=N, d=d, d_prime=e, phi=phi, psi=psi, lhs=lhs, rhs=rhs)
    return out


def check_homog_laws(rng: random.Random, res: ResFn) -> CheckResult:
    out = CheckResult("homog_laws")
    for field in FIELDS:
        for n in (2, 3):
            phi = random_map(field, n, 2, rng, max_deg=1)
            psi = random_map(field, n, 2, rng, max_deg=1)
            G = _random_linear(field, n, rng)
            x = _random_vector(field, n, rng)
            c = random_ratfunc(field, rng, 2)
            out.cases += 1
            if evaluate(compose(phi, psi), x) != evaluate(phi, evaluate(psi, x)):
                out.fail(law="compose", phi=phi, psi=psi, x=x)
            if evaluate(iterate(phi, 2), x) != evaluate(phi, evaluate(phi, x)):
                out.fail(law="iterate", phi=phi, x=x)
            if conjugate(conjugate(phi, G), G.inverse()) != phi:
                out.fail(law="conjugate", phi=phi, gamma=G)
            if evaluate(phi, [c * a for a in x]) != [c**2 * y for y in evaluate(phi, x)]:
                out.fail(law="homogeneity", phi=phi, x=x, c=c)
    return out


def check_good_reduction_heights(rng: random.Random, res: ResFn) -> CheckResult:
    """Constant maps have good reduction everywhere: no bad places, and the height is log||x||."""
    from .arithdyn.reduction import reduction_report
    from .heights import local_height, log_norm, norm_defect

    out = CheckResult("good_reduction_heights")
    for field in FIELDS:
        for n in (2, 3):
            phi = _nonsingular(field, n, 2, rng, constant=True)
            out.cases += 1
            rep = reduction_report(phi)
            if rep.bad_places:
                out.fail(law="no bad places", map=phi, bad=list(rep.bad_places))
            v = Place.parse("t", field)
            for _ in range(3):
                x = _random_vector(field, n, rng)
                h = local_height(phi, x, v)
                if not h.exact or h.value != log_norm(x, v) or norm_defect(phi, x, v) != 0:
                    out.fail(law="height", map=phi, x=x, place=v)
    return out


def check_height_identities(rng: random.Random, res: ResFn) -> CheckResult:
    from .heights import verify_height_identities

    out = CheckResult("height_identities")
    field = FIELDS[1]
    t = field.t()
    v = Place.parse("t", field)
    for _ in range(2):
        phi = HomogMap.from_exprs(field, ["x0^2 + t*x1^2", "x1^2"])
        G = _random_linear(field, 2, rng, max_deg=0)
        x = _random_vector(field, 2, rng, 1)
        c = t ** rng.randint(-2, 2) * (rng.randint(1, 4))
        out.cases += 1
        for chk in verify_height_identities(phi, G, c, x, v):
            if not chk.ok:
                out.fail(identity=chk.name, map=phi, gamma=G, c=c, x=x)
    return out


def check_capacity(rng: random.Random, res: ResFn) -> CheckResult:
    from .capacity import DegenerateSubset, PointSet, m_diameter
    from .funcfield import log_abs

    out = CheckResult("transfinite_diameter")
    for field in FIELDS:
        v = Place.parse("t", field)
        pts = [_random_vector(field, 2, rng, 1) for _ in range(5)]
        E = PointSet.of(pts, v)
        G = _random_linear(field, 2, rng)
        shift = log_abs(G.det(), v)
        prev = None
        for M in range(2, 6):
            out.cases += 1
            try:
                a = m_diameter(E, M)
                b = m_diameter(E.transform(G), M)
            except DegenerateSubset:
                continue
            if b.log_dM - a.log_dM != shift:
                out.fail(law="det shift", points=pts, gamma=G, M=M)
            if prev is not None and a.log_dM > prev:
                out.fail(law="monotone", points=pts, M=M)
            prev = a.log_dM
    return out


def check_isotrivial_conjugates(rng: random.Random, res: ResFn) -> CheckResult:
    """A constant map conjugated by a random K-matrix is isotrivial, and the witness re-verifies."""
    from .arithdyn.isotriviality import gamma_integrality, isotriviality, recheck_witness

    out = CheckResult("isotrivial_conjugates")
    for field in FIELDS:
        # (1:0) and (0:1) are fixed, so K-rational preperiodic points exist even over Q
        while True:
            a, b, c, e = (field.const(rng.randint(1, 4)) for _ in range(4))
            base = HomogMap(field, 2, 2, [{(2, 0): a, (1, 1): b}, {(1, 1): c, (0, 2): e}])
            if resultant(base).value:
                break
        G = _random_linear(field, 2, rng, max_deg=1)
        phi = conjugate(base, G)
        out.cases += 1
        verdict = isotriviality(phi)
        if verdict.status != "Isotrivial":
            out.fail(map=phi, status=verdict.status)
            continue
        if not recheck_witness(phi, verdict.witness):
            out.fail(map=phi, law="recheck")
        if not all(c.ok for c in gamma_integrality(phi, verdict.witness)):
            out.fail(map=phi, law="gamma integrality")
    return out


def check_resultant_product_formula(rng: random.Random, res: ResFn) -> CheckResult:
    """``sum_v deg(v) ord_v(Res) = 0``: the global constraint behind the product-formula step."""
    out = CheckResult("resultant_product_formula")
    for field in FIELDS:
        phi = _nonsingular(field, 2, 2, rng, max_deg=2)
        out.cases += 1
        r = res(phi)
        total = sum(v.degree * e for v, e in support(r))
        if total != 0:
            out.fail(map=phi, resultant=r)
    return out


def check_stabilizer_group(rng: random.Random, res: ResFn) -> CheckResult:
    from .arithdyn.stabilizer import stabilizer

    out = CheckResult("stabilizer_group")
    field = ConstantField.prime(3)
    phi = _nonsingular(field, 2, 2, rng, constant=True)
    out.cases += 1
    rep = stabilizer(phi)
    if not rep.is_group or not rep.injective:
        out.fail(map=phi, group=rep.is_group, injective=rep.injective)
    return out


CHECKS = (
    check_product_formula,
    check_resultant_linear,
    check_resultant_scaling,
    check_composition_law,
    check_resultant_product_formula,
    check_homog_laws,
    check_good_reduction_heights,
    check_height_identities,
    check_capacity,
    check_isotrivial_conjugates,
    check_stabilizer_group,
)


def run_suite(seed: int = 1, inject: str | None = None) -> dict:
    if inject is not None and inject not in INJECTIONS:
        raise ValueError(f"unknown fault {inject!r}; choose from {', '.join(INJECTIONS)}")
    res: ResFn = _true_res
    if inject == "resultant-sign":
        res = lambda phi: -_true_res(phi)  # noqa: E731
    results = []
    for check in CHECKS:
        # each check gets its own stream so that adding checks does not shift the others
        rng = random.Random(f"{seed}:{check.__name__}")
        results.append(check(rng, res).to_json())
    return {
        "seed": seed,
        "inject": inject,
        "checks": results,
        "ok": all(r["passed"] for r in results),
    }
