"""M-diameters, ellipsoids and transfinite diameters of filled Julia sets.

For a finite set E of vectors in K^{N+1} the M-diameter is the sup over
M-point subsets S of the geometric mean of ``|det|`` over all (N+1)-point
subsets of S.  Everything is kept in log units at one place.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence, Union

from . import linalg
from .funcfield import ConstantField, LogAbs, Place, RatFunc, log_abs, ord, support_places
from .homog import ConjScalar, HomogMap, LinearMap
from .heights import Witness, witness_data
from .resultant import conjugation_constants, resultant


class CapacityError(ValueError):
    pass


class DegenerateSubset(CapacityError):
    def __init__(self, indices=None) -> None:
        super().__init__(f"degenerate subset {indices}: some determinant vanishes")
        self.indices = indices


@dataclass(frozen=True)
class PointSet:
    points: tuple[tuple[RatFunc, ...], ...]
    place: Place

    def __post_init__(self) -> None:
        if not self.points:
            raise CapacityError("empty point set")
        n = len(self.points[0])
        for p in self.points:
            if len(p) != n:
                raise CapacityError("points of different dimensions")
            if all(not c for c in p):
                raise CapacityError("zero vector in point set")

    @classmethod
    def of(cls, points: Iterable[Sequence[RatFunc]], place: Place) -> "PointSet":
        return cls(tuple(tuple(p) for p in points), place)

    @property
    def n_vars(self) -> int:
        return len(self.points[0])

    def transform(self, gamma: LinearMap) -> "PointSet":
        return PointSet(tuple(tuple(gamma.apply(p)) for p in self.points), self.place)


@dataclass(frozen=True)
class DiameterReport:
    M: int
    log_dM: Fraction
    attaining_subset: tuple[int, ...]
    J_M: int
    degenerate_skipped: int = 0


def _log_det(vectors: Sequence[Sequence[RatFunc]], v: Place) -> LogAbs | None:
    field = vectors[0][0].field
    det = linalg.det(field, [list(r) for r in vectors])
    return log_abs(det, v) if det else None


def delta(S: Sequence[Sequence[RatFunc]], v: Place) -> LogAbs:
    """``log|Delta(S)|``: the sum over all (N+1)-subsets of ``log|det|``."""
    n = len(S[0])
    if len(S) < n:
        raise CapacityError(f"need at least {n} vectors")
    total = Fraction(0)
    for sub in itertools.combinations(range(len(S)), n):
        ld = _log_det([S[i] for i in sub], v)
        if ld is None:
            raise DegenerateSubset(sub)
        total += ld
    return total


def m_diameter(E: PointSet, M: int, budget: int = 200_000) -> DiameterReport:
    """Exhaustive ``log d_M(E)``; ties go to the lexicographically smallest subset."""
    n = E.n_vars
    size = len(E.points)
    if not n <= M <= size:
        raise CapacityError(f"M must lie in [{n}, {size}]")
    if comb(size, M) > budget:
        raise CapacityError(f"C({size}, {M}) subsets exceed the budget {budget}")
    cache: dict[tuple[int, ...], LogAbs | None] = {}
    for sub in itertools.combinations(range(size), n):
        cache[sub] = _log_det([E.points[i] for i in sub], E.place)
    J = comb(M, n)
    best = None
    best_sub = None
    skipped = 0
    for S in itertools.combinations(range(size), M):
        total = Fraction(0)
        for sub in itertools.combinations(S, n):
            ld = cache[sub]
            if ld is None:
                total = None
                break
            total += ld
        if total is None:
            skipped += 1
            continue
        if best is None or total > best:
            best, best_sub = total, S
    if best is None:
        raise DegenerateSubset("all")
    return DiameterReport(M, best / J, best_sub, J, skipped)


def monotonicity_check(E: PointSet, M_range: Iterable[int]) -> tuple[bool, list[DiameterReport]]:
    """``log d_{M+1} <= log d_M`` over the range; fully degenerate M are left out."""
    reports = []
    for M in M_range:
        try:
            reports.append(m_diameter(E, M))
        except DegenerateSubset:
            continue
    ok = all(b.log_dM <= a.log_dM for a, b in zip(reports, reports[1:]))
    return ok, reports


def _candidates(field: ConstantField, n: int) -> Iterable[tuple]:
    """Nonzero vectors over k with first nonzero entry 1, small ones first."""
    if field.is_finite:
        for v in itertools.product(range(field.p), repeat=n):
            first = next((c for c in v if c), 0)
            if first == 1:
                yield v
        return
    height = 1
    while True:
        rng = range(-height, height + 1)
        for v in itertools.product(rng, repeat=n):
            if max(abs(c) for c in v) != height:
                continue
            first = next((c for c in v if c), 0)
            if first == 1:
                yield v
        height += 1


def _rank_mod(field: ConstantField, vecs) -> int:
    return linalg.rank(field, [[field.const(c) for c in v] for v in vecs])


def general_position_sequence(field: ConstantField, N: int, count: int, max_tries: int = 100_000) -> list[tuple]:
    """Vectors over the residue field k, any N+1 of them linearly independent.

    Starts from the standard basis and adds each new vector outside every
    hyperplane spanned by N earlier ones.
    """
    n = N + 1
    if count < 1:
        return []
    seq = [tuple(int(i == j) for j in range(n)) for i in range(min(n, count))]
    tried = 0
    gen = _candidates(field, n)
    while len(seq) < count:
        try:
            cand = next(gen)
        except StopIteration:
            raise CapacityError(
                f"the residue field {field} has too few elements for {count} vectors in general position"
            ) from None
        tried += 1
        if tried > max_tries:
            raise CapacityError("general position search exhausted its budget")
        if cand in seq:
            continue
        if all(_rank_mod(field, list(sub) + [cand]) == n for sub in itertools.combinations(seq, N)):
            seq.append(cand)
    return seq


def general_position_points(field: ConstantField, N: int, count: int) -> list[tuple[RatFunc, ...]]:
    return [tuple(field.const(c) for c in v) for v in general_position_sequence(field, N, count)]


# ---------------------------------------------------------------------------
# ellipsoids


@dataclass(frozen=True)
class Ellipsoid:
    generator: LinearMap

    def __post_init__(self) -> None:
        if not self.generator.det():
            raise CapacityError("an ellipsoid needs an invertible generator")


def ellipsoid_diameter(E: Ellipsoid, v: Place) -> LogAbs:
    """``log d_inf(Gamma(B(0,1))) = log|det Gamma|``."""
    return log_abs(E.generator.det(), v)


def ellipsoid_contains_unit_ball(E: Ellipsoid, v: Place) -> bool:
    inv = E.generator.inverse()
    return all(not c or ord(c, v) >= 0 for c in inv.entries())


def integral_at(gamma: LinearMap, v: Place) -> bool:
    """Gamma lies in GL_{N+1}(O_v): integral entries and unit determinant."""
    return all(not c or ord(c, v) >= 0 for c in gamma.entries()) and ord(gamma.det(), v) == 0


def rigidity_check(E: Ellipsoid, v: Place) -> dict:
    """An ellipsoid that contains the unit ball and has diameter 1 is the unit ball."""
    contains = ellipsoid_contains_unit_ball(E, v)
    diam = ellipsoid_diameter(E, v)
    applies = contains and diam == 0
    return {
        "contains_unit_ball": contains,
        "log_diameter": diam,
        "applies": applies,
        "generator_integral": integral_at(E.generator, v) if applies else None,
        "ok": (not applies) or integral_at(E.generator, v),
    }


# ---------------------------------------------------------------------------
# filled Julia sets


def _log_det_witness(gamma: Witness, v: Place) -> Fraction:
    if isinstance(gamma, LinearMap):
        return log_abs(gamma.det(), v)
    return sum((ConjScalar.of(s).log_abs(v) for s in gamma), Fraction(0))


@dataclass(frozen=True)
class JuliaDiameter:
    via_witness: Fraction
    via_resultant: Fraction
    C: Fraction

    @property
    def agree(self) -> bool:
        return self.via_witness == self.via_resultant


def julia_diameter(phi: HomogMap, gamma: Witness | None, v: Place, C: Fraction | None = None) -> JuliaDiameter:
    """``log d_inf`` of the filled Julia set at ``v`` from a good-reduction witness.

    With ``G^-1 phi G = c * Psi`` and Psi of nonsingular reduction, the set is
    ``G(|c|^{-1/(d-1)} B(0,1))``.  The same value is recomputed as
    ``C(N,d) * log|Res(phi)|`` with C from the fitted composition exponents.
    """
    n, d = phi.n_vars, phi.degree
    if gamma is None:
        gamma = LinearMap.identity(phi.field, n)
    data = witness_data(phi, gamma, v)
    if not data.good:
        raise CapacityError("the witness does not give nonsingular reduction at the place")
    via_w = _log_det_witness(gamma, v) + n * data.content * v.degree / (d - 1)
    if C is None:
        C = conjugation_constants(n - 1, d).C
    via_r = C * log_abs(resultant(phi).value, v)
    return JuliaDiameter(via_w, via_r, C)


def relevant_places(phi: HomogMap, gamma: Witness | None = None) -> list[Place]:
    elems = list(phi.coefficients()) + [resultant(phi).value]
    if isinstance(gamma, LinearMap):
        elems += [c for c in gamma.entries() if c] + [gamma.det()]
    elif gamma is not None:
        for s in gamma:
            s = ConjScalar.of(s)
            elems.append(s.base)
            elems += [v.uniformizer() for v, _ in s.exponents]
    places = support_places([e for e in elems if e])
    places.add(Place.infinity(phi.field))
    return sorted(places)


def global_diameter_sum(phi: HomogMap, gamma: Witness) -> tuple[Fraction, list[tuple[Place, Fraction]]]:
    """Sum over all places of ``log d_inf(F_phi,v)`` for a witness good at every place.

    Places outside the listed support contribute 0.
    """
    rows = []
    for v in relevant_places(phi, gamma):
        rows.append((v, julia_diameter(phi, gamma, v).via_witness))
    return sum((r for _, r in rows), Fraction(0)), rows
