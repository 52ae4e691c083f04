"""Good reduction at places of k(t), and bounded searches for potential good reduction."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from ..funcfield import Place, RatFunc, ord, residue, support_places
from ..homog import ConjScalar, HomogMap, normalize_at
from ..resultant import SingularMap, res_ord, resultant


@dataclass(frozen=True)
class ReductionEntry:
    place: Place
    res_ord_normalized: int
    content: int

    @property
    def good_in_given_coords(self) -> bool:
        return self.res_ord_normalized == 0


@dataclass(frozen=True)
class ReductionReport:
    entries: tuple[ReductionEntry, ...]

    @property
    def bad_places(self) -> list[Place]:
        return [e.place for e in self.entries if not e.good_in_given_coords]

    def entry(self, v: Place) -> ReductionEntry:
        for e in self.entries:
            if e.place == v:
                return e
        raise KeyError(v)


def _entry(phi: HomogMap, v: Place) -> ReductionEntry:
    _, m = normalize_at(phi, v)
    return ReductionEntry(v, res_ord(phi, v), m)


def good_reduction_given_coords(phi: HomogMap, v: Place) -> tuple[bool, ReductionEntry]:
    e = _entry(phi, v)
    return e.good_in_given_coords, e


def candidate_places(phi: HomogMap) -> list[Place]:
    """Places where the model can fail to be good: support of Res and of the coefficients, and infinity."""
    r = resultant(phi).value
    if not r:
        raise SingularMap()
    places = support_places([r] + phi.coefficients())
    places.add(Place.infinity(phi.field))
    return sorted(places)


def reduction_report(phi: HomogMap) -> ReductionReport:
    """Every place outside ``candidate_places`` has unit coefficients content and unit resultant."""
    return ReductionReport(tuple(_entry(phi, v) for v in candidate_places(phi)))


# ---------------------------------------------------------------------------
# diagonal search


def diagonal_valuations(phi: HomogMap, qs: Sequence[Fraction], v: Place) -> tuple[Fraction, Fraction]:
    """``(content, normalized res ord)`` at v of ``D^-1 phi D`` for ``D = diag(pi_v^q_i)``.

    Only valuations are needed: the coefficient of ``x^e`` in form j picks
    up ``pi^(e.q - q_j)`` and ``Res`` picks up ``det(D)^(d^N (d-1))``.
    """
    n, d = phi.n_vars, phi.degree
    m = None
    for j, f in enumerate(phi.forms):
        for e, c in f.items():
            o = ord(c, v) + sum(a * q for a, q in zip(e, qs)) - qs[j]
            m = o if m is None or o < m else m
    A = d ** (n - 1) * (d - 1)
    r = ord(resultant(phi).value, v) + A * sum(qs, Fraction(0)) - m * n * d ** (n - 1)
    return m, r


def _exponent_grid(d: int, bound: int) -> list[Fraction]:
    step = Fraction(1, d - 1)
    k = int(bound * (d - 1))
    vals = [i * step for i in range(-k, k + 1)]
    return sorted(vals, key=lambda q: (abs(q), q))


def diagonal_candidates(n_vars: int, d: int, bound: int) -> Iterator[tuple[Fraction, ...]]:
    """Exponent vectors with q_0 = 0, smallest total size first, then lexicographic."""
    grid = _exponent_grid(d, bound)
    cands = [(Fraction(0),) + rest for rest in itertools.product(grid, repeat=n_vars - 1)]
    cands.sort(key=lambda qs: (sum(abs(q) for q in qs), qs))
    return iter(cands)


def diagonal_witnesses(phi: HomogMap, v: Place, bound: int, limit: int | None = None):
    """All exponent vectors in the bounded grid giving nonsingular reduction at v, in search order."""
    if phi.degree < 2:
        raise ValueError("the diagonal search needs degree at least 2")
    if not resultant(phi).value:
        raise SingularMap()
    found = []
    for qs in diagonal_candidates(phi.n_vars, phi.degree, bound):
        _, r = diagonal_valuations(phi, qs, v)
        if r == 0:
            found.append(qs)
            if limit is not None and len(found) >= limit:
                break
    return found


def potential_good_reduction_search(phi: HomogMap, v: Place, exponent_bound: int = 3) -> list[ConjScalar] | None:
    """First diagonal ``diag(pi_v^q_i)`` in the bounded grid giving nonsingular reduction at v.

    Coordinate permutations lie in GL(O_v) and cannot change the resultant
    order, so they are not searched.  None means nothing was found within
    the bound, not that no witness exists.
    """
    found = diagonal_witnesses(phi, v, exponent_bound, limit=1)
    if not found:
        return None
    return [ConjScalar.uniformizer_power(v, q) for q in found[0]]


# ---------------------------------------------------------------------------
# common zeros of reductions


def reduced_common_zero(phin: HomogMap, v: Place) -> list[RatFunc] | None:
    """A constant vector whose reduction is a common zero of the reduced forms of ``phin``.

    ``phin`` must be normalized at v.  Only places of degree one (residue
    field k) are handled; the zero must be k-rational.
    """
    if v.degree != 1:
        return None
    field = phin.field
    n = phin.n_vars
    if n == 2:
        from ..heights import _binary_gcd_data, _poly_to_form
        from ..roots import binary_form_roots

        _, _, G = _binary_gcd_data(phin, v)
        if G.total_degree() <= 0:
            return None
        roots, _ = binary_form_roots(_poly_to_form(G, field, G.total_degree()), field)
        if not roots:
            return None
        return list(roots[0][0].lift)
    reduced = [{e: residue(c, v) for e, c in f.items()} for f in phin.forms]
    reduced = [{e: c.constant_value() for e, c in f.items() if c} for f in reduced]
    if field.is_finite:
        from ..finite import get_field, projective_points_array

        F = get_field(field.p, 1)
        pts = projective_points_array(F, n)
        mask = None
        for f in reduced:
            vals = F.eval_form({e: int(field.const_key(c)) for e, c in f.items()}, pts)
            z = vals == 0
            mask = z if mask is None else mask & z
        hits = mask.nonzero()[0]
        if not len(hits):
            return None
        return [field.const(int(c)) for c in pts[hits[0]]]
    return _rational_common_zero(reduced, n, field)


def _rational_common_zero(reduced, n, field):
    import sympy

    xs = sympy.symbols(f"x0:{n}")
    exprs = [sum(sympy.Rational(str(c)) * sympy.prod([x**k for x, k in zip(xs, e)]) for e, c in f.items()) for f in reduced]
    # charts: x_j = 1 and x_i = 0 for i > j
    for j in range(n - 1, -1, -1):
        subs = {xs[j]: 1}
        subs.update({xs[i]: 0 for i in range(j + 1, n)})
        eqs = [sympy.expand(e.subs(subs)) for e in exprs]
        eqs = [e for e in eqs if e != 0]
        free = list(xs[:j])
        if not eqs:
            return [field.const(0)] * j + [field.one()] + [field.zero()] * (n - j - 1)
        if any(e.is_number for e in eqs):
            continue
        try:
            sols = sympy.solve(eqs, free, dict=True)
        except NotImplementedError:
            continue
        for s in sols:
            vals = [s.get(x, 0) for x in free]
            if all(sympy.sympify(val).is_rational for val in vals):
                consts = [Fraction(int(sympy.Rational(val).p), int(sympy.Rational(val).q)) for val in vals]
                return [field.const(c) for c in consts] + [field.one()] + [field.zero()] * (n - j - 1)
    return None
