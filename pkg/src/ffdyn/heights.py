"""Homogeneous local heights and filled Julia sets at a place of k(t).

``H(x) = lim d^-l log||Phi^l(x)||``.  For a model normalized at v with
``r = res_ord`` the iterates satisfy

    d*log||x|| - r*deg(v) <= log||Phi(x)|| <= d*log||x||,

so the l-th approximation is an upper bound within ``r*deg(v)/(d^l (d-1))``
of the limit.  Long orbits are followed in O_v / pi^P rather than in K, which
keeps coefficient sizes flat; orbits that close up projectively give exact
values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .funcfield import ConstantField, LogAbs, Place, RatFunc, log_abs, ord, residue
from .homog import (
    ConjScalar,
    HomogMap,
    LinearMap,
    ProjPoint,
    conjugate,
    evaluate,
    formal_conjugate_diag,
    normalize_at,
    proportional,
    scale,
)
from .resultant import SingularMap, res_ord, resultant

DEFAULT_ERROR = Fraction(1, 2**20)
MAX_BITS = 20000


class HeightError(ValueError):
    pass


@dataclass(frozen=True)
class HeightEstimate:
    value: Fraction
    error_bound: Fraction
    iterations_used: int
    exact: bool

    def __post_init__(self) -> None:
        if self.exact and self.error_bound:
            raise HeightError("an exact estimate carries no error")

    def interval(self) -> tuple[Fraction, Fraction]:
        return self.value - self.error_bound, self.value + self.error_bound


def log_norm(x: Sequence[Union[RatFunc, ConjScalar, None]], v: Place) -> LogAbs:
    """``max_i log|x_i|_v`` over the nonzero coordinates."""
    vals = []
    for c in x:
        if c is None:
            continue
        if isinstance(c, ConjScalar):
            vals.append(c.log_abs(v))
        elif c:
            vals.append(log_abs(c, v))
    if not vals:
        raise HeightError("the zero vector has no norm")
    return max(vals)


def _min_ord(x: Sequence[RatFunc], v: Place) -> int:
    return min(ord(c, v) for c in x if c)


# ---------------------------------------------------------------------------
# truncated arithmetic in O_v / pi^P


def _invert_t(a: RatFunc) -> RatFunc:
    """``a(1/t)``: moves the infinite place to the place (t)."""
    R = a.field.ring

    def rev(poly, n):
        # t^n * poly(1/t), coefficient lists highest degree first
        coeffs = list(reversed(poly.to_dense())) + [a.field.domain.zero] * (n - poly.degree())
        return R.from_list(coeffs)

    num, den = a.numerator, a.denominator
    if not num:
        return a
    n = max(num.degree(), den.degree())
    # num(1/t) = t^-deg(num) * rev(num); multiply top and bottom by t^n
    return RatFunc.from_polys(a.field, rev(num, n), rev(den, n))


class _LocalRing:
    """Residues modulo ``pi^P`` for a finite place, as polynomials of degree < P*deg(v)."""

    def __init__(self, v: Place, precision: int):
        self.v = v
        self.pi = v.poly
        self.P = precision
        self.modulus = self.pi**precision

    def lift(self, a: RatFunc):
        num, den = a.numerator, a.denominator
        if not num:
            return num
        s, h = den.half_gcdex(self.modulus)
        if h.degree() != 0:
            raise HeightError("element is not integral at the place")
        return (num * s).rem(self.modulus).quo_ground(h.LC)

    def mul(self, a, b):
        return (a * b).rem(self.modulus)

    def ord(self, a) -> int | None:
        """ord_v of a residue, or None when it is zero to the working precision."""
        if not a:
            return None
        n = 0
        while True:
            q, r = divmod(a, self.pi)
            if r:
                return n
            a = q
            n += 1


def _local_setup(phi: HomogMap, x: Sequence[RatFunc], v: Place):
    """Move the problem to a finite place: ``(phi, x, v)`` unchanged or pulled back along t -> 1/t."""
    if not v.is_infinite:
        return phi, list(x), v
    forms = [{e: _invert_t(c) for e, c in f.items()} for f in phi.forms]
    phi2 = HomogMap(phi.field, phi.n_vars, phi.degree, forms)
    x2 = [_invert_t(c) if c else c for c in x]
    return phi2, x2, Place(phi.field, phi.field.ring.gens[0])


# ---------------------------------------------------------------------------
# heights


def _reduce_vector(y: Sequence[RatFunc], v: Place) -> ProjPoint:
    """Residue-field point of a unit-norm vector."""
    return ProjPoint(tuple(residue(c, v) if c else c for c in y))


def _binary_gcd_data(phin: HomogMap, v: Place):
    """Reduced map data for N = 1 at a degree-one place: ``(A, B, G)`` as sympy polys in x0, x1."""
    import sympy

    field = phin.field
    x0, x1 = sympy.symbols("x0 x1")
    dom = field.domain

    def reduced(f):
        terms = {}
        for e, c in f.items():
            r = residue(c, v)
            if r:
                terms[e] = r.constant_value()
        return sympy.Poly.from_dict(terms, x0, x1, domain=dom) if terms else sympy.Poly(0, x0, x1, domain=dom)

    A, B = (reduced(f) for f in phin.forms)
    if A.is_zero:
        G = B
    elif B.is_zero:
        G = A
    else:
        G = A.gcd(B)
    A1 = A.exquo(G) if not A.is_zero else A
    B1 = B.exquo(G) if not B.is_zero else B
    return A1, B1, G


def _poly_to_form(P, field: ConstantField, degree: int) -> dict:
    out = {}
    if not P.is_zero:
        for mono, c in P.terms():
            out[tuple(mono)] = field.const(c)
    return out


def bad_residue_closure(phin: HomogMap, v: Place, limit: int = 400) -> set[ProjPoint] | None:
    """Residue points whose reduced orbit can reach a rational common zero of the reduced forms.

    Defined for N = 1 at places of degree one.  The norm of an orbit only
    drops at steps where the reduction is such a zero, so a unit vector whose
    reduction lies outside this (finite, preimage-closed) set has height 0.
    Returns None when the set is infinite or too large.
    """
    if phin.n_vars != 2 or v.degree != 1:
        return None
    from .roots import RootError, binary_form_roots

    field = phin.field
    A1, B1, G = _binary_gcd_data(phin, v)
    if G.total_degree() <= 0:
        return set()
    deg_g = G.total_degree()
    try:
        bad, _ = binary_form_roots(_poly_to_form(G, field, deg_g), field)
    except RootError:
        return None
    closure = {P for P, _ in bad}
    frontier = list(closure)
    d1 = phin.degree - deg_g
    while frontier:
        P = frontier.pop()
        p0, p1 = (c.constant_value() if c else field.domain.zero for c in P.lift)
        form = {}
        for (e, a) in A1.terms():
            form[tuple(e)] = form.get(tuple(e), field.zero()) + field.const(a * p1)
        for (e, b) in B1.terms():
            form[tuple(e)] = form.get(tuple(e), field.zero()) - field.const(b * p0)
        form = {e: c for e, c in form.items() if c}
        if not form:
            return None
        if d1 == 0:
            continue
        for Q, _ in binary_form_roots(form, field)[0]:
            if Q not in closure:
                closure.add(Q)
                frontier.append(Q)
                if len(closure) > limit:
                    return None
    return closure


def _residue_tail(phi: HomogMap, v: Place, vec, steps: int, max_bits: int | None = MAX_BITS):
    """Follow a unit vector's reduction under the reduced forms (finite place).

    While the reduced image is nonzero each step loses nothing.  Returns
    ``(n, periodic)``: n loss-free steps were verified, and ``periodic`` says
    the residue orbit closed up first, so no loss ever occurs.
    """
    ring = _LocalRing(v, 1)
    R = ring.modulus.ring
    forms = [[(e, ring.lift(c)) for e, c in f.items()] for f in phi.forms]

    def normal(y):
        for c in y:
            if c:
                inv, h = c.half_gcdex(ring.modulus)
                inv = inv.quo_ground(h.LC)
                return tuple((a * inv).rem(ring.modulus) if a else a for a in y)
        return None

    y = normal([c.rem(ring.modulus) if c else c for c in vec])
    seen = {y}
    for n in range(steps):
        out = []
        for f in forms:
            acc = R(0)
            for e, c in f:
                term = c
                for i, k in enumerate(e):
                    for _ in range(k):
                        term = ring.mul(term, y[i])
                acc = acc + term
            out.append(acc.rem(ring.modulus))
        y = normal(out)
        if y is None:
            return n, False
        if y in seen:
            return steps, True
        seen.add(y)
        if max_bits is not None and _coeff_bits(y) > max_bits:
            return n + 1, False
    return steps, False


def lattice_witness(phi: HomogMap, v: Place, max_nodes: int = 24) -> LinearMap | None:
    """A coordinate change over K giving ``phi`` nonsingular reduction at v, or None.

    Walks from the standard lattice to neighbouring lattices ``<p, pi O^2>``
    for residue points p that are holes of the reduction (or the value of a
    constant reduced map), keeping only steps that lower ``res_ord``.  Only
    N = 1 at places of degree one; None means the walk found nothing.
    """
    if phi.n_vars != 2 or v.degree != 1:
        return None
    from .roots import RootError, binary_form_roots

    field = phi.field
    pi = v.uniformizer()
    one, zero = field.one(), field.zero()
    frontier = [(res_ord(phi, v), LinearMap.identity(field, 2))]
    seen = set()
    while frontier and len(seen) < max_nodes:
        frontier.sort(key=lambda item: item[0])
        r, G = frontier.pop(0)
        if r == 0:
            return G
        if G in seen:
            continue
        seen.add(G)
        psin, _ = normalize_at(conjugate(phi, G), v)
        A1, B1, g = _binary_gcd_data(psin, v)
        points = []
        if g.total_degree() > 0:
            try:
                points.extend(P for P, _ in binary_form_roots(_poly_to_form(g, field, g.total_degree()), field)[0])
            except RootError:
                pass
        if A1.total_degree() <= 0 and B1.total_degree() <= 0 and not (A1.is_zero and B1.is_zero):
            a, b = (field.const(P.LC()) if not P.is_zero else zero for P in (A1, B1))
            points.append(ProjPoint((a, b)))
        for P in points:
            p0, p1 = P.lift
            if p1:
                M = LinearMap(field, [[p0 / p1, pi], [one, zero]])
            else:
                M = LinearMap(field, [[one, zero], [zero, pi]])
            G2 = G @ M
            r2 = res_ord(conjugate(phi, G2), v)
            if r2 < r:
                frontier.append((r2, G2))
    return None


def _exact_orbit(
    phi: HomogMap,
    x: Sequence[RatFunc],
    v: Place,
    steps: int,
    closure: set[ProjPoint] | None = None,
    max_terms: int = 120,
):
    """Follow the projective orbit in K until it provably stops losing norm.

    That happens when it repeats (``y_{i+k} = c*y_i``) or when its reduction
    leaves ``closure``.  Returns ``(exact height, steps)`` for the normalized
    ``phi``, or None.
    """
    pi = v.uniformizer()
    d, deg = phi.degree, v.degree
    e0 = _min_ord(x, v)
    y = [c * pi ** (-e0) for c in x]
    seen: list[tuple[ProjPoint, list[RatFunc]]] = [(ProjPoint(tuple(y)), y)]
    es = [e0]

    def escaped(j: int) -> bool:
        return closure is not None and _reduce_vector(seen[j][1], v) not in closure

    if escaped(0):
        return Fraction(-e0 * deg), 0
    for _ in range(steps):
        z = evaluate(phi, y)
        size = sum(c.numerator.degree() + c.denominator.degree() for c in z if c)
        if size > max_terms:
            return None
        e = _min_ord(z, v)
        y = [c * pi ** (-e) for c in z]
        es.append(e)
        P = ProjPoint(tuple(y))
        for i, (Q, yi) in enumerate(seen):
            if Q == P:
                c = proportional(yi, y)
                j = len(seen)  # y = y_j
                k = j - i
                S = sum(d ** (j - s) * es[s] for s in range(i + 1, j + 1))
                h_yi = (Fraction(-S * deg) + log_abs(c, v)) / (d**k - 1)
                E_i = sum(d ** (i - s) * es[s] for s in range(1, i + 1))
                h_y0 = (h_yi - E_i * deg) / Fraction(d**i)
                return h_y0 - e0 * deg, j
        seen.append((P, y))
        j = len(seen) - 1
        if escaped(j):
            E_j = sum(d ** (j - s) * es[s] for s in range(1, j + 1))
            return Fraction(-E_j * deg, d**j) - e0 * deg, j
    return None


def _coeff_bits(polys) -> int:
    best = 0
    for p in polys:
        for c in p.coeffs():
            num = getattr(c, "numerator", None)
            if num is None:
                return 0
            best = max(best, int(num).bit_length() + int(c.denominator).bit_length())
    return best


def _truncated_orbit(
    phi: HomogMap, x: Sequence[RatFunc], v: Place, r: int, ell: int, max_bits: int | None = None
):
    """Orbit of the normalized ``phi`` in O_v / pi^P with ``res_ord = r``.

    Returns ``(e_0, [e_1..], vecs, rings, (phi, v))`` with ``vecs[j]`` the unit
    vector after j steps, known modulo ``rings[j]``, and the problem moved to
    a finite place.  Each step loses at most r digits of precision, so
    starting from ``P = ell*r + r + 1`` every exponent is determined exactly.
    Over Q the coefficients of the residues grow with every step; when
    ``max_bits`` is given the orbit stops early once they exceed it.
    """
    phi, x, v = _local_setup(phi, x, v)
    d = phi.degree
    e0 = _min_ord(x, v)
    pi = v.uniformizer()
    y = [c * pi ** (-e0) for c in x]
    ring = _LocalRing(v, ell * r + r + 1)
    R = ring.modulus.ring
    forms = [[(e, ring.lift(c)) for e, c in f.items()] for f in phi.forms]
    vec = [ring.lift(c) for c in y]
    es, vecs, rings = [], [vec], [ring]
    for _ in range(ell):
        powers = []
        for c in vec:
            row = [R(1)]
            for _ in range(d):
                row.append(ring.mul(row[-1], c))
            powers.append(row)
        out = []
        for f in forms:
            acc = R(0)
            for e, c in f:
                term = c
                for i, k in enumerate(e):
                    if k:
                        term = ring.mul(term, powers[i][k])
                acc = acc + term
            out.append(acc.rem(ring.modulus))
        known = [o for o in (ring.ord(c) for c in out) if o is not None]
        if not known:
            raise HeightError("lost precision while iterating")
        e = min(known)
        if e > r:
            raise HeightError("norm dropped below the resultant bound; is the model normalized?")
        div = ring.pi**e
        ring = _LocalRing(v, ring.P - e)
        vec = [c.exquo(div).rem(ring.modulus) if c else c for c in out]
        es.append(e)
        vecs.append(vec)
        rings.append(ring)
        if max_bits is not None and _coeff_bits(vec) > max_bits:
            break
    return e0, es, vecs, rings, (phi, v)


def _orbit_exponents(
    phi: HomogMap, x: Sequence[RatFunc], v: Place, r: int, ell: int, max_bits: int | None = None
) -> tuple[int, list[int]]:
    """``(e_0, [e_1..e_ell])`` for the normalized ``phi`` with ``res_ord = r``, computed mod pi^P."""
    e0, es, _, _, _ = _truncated_orbit(phi, x, v, r, ell, max_bits)
    return e0, es


# ---------------------------------------------------------------------------
# exact tails from cycles of disks
#
# A disk D(a, s) = {a + pi^s w : w integral} in the chart y_m = 1.  If every
# point of D(a, s) loses exactly E digits under phi and lands in D(a', s),
# which the coefficients of phi(a + pi^s w) as a polynomial in w decide,
# then an orbit that enters a cycle of such disks has a periodic loss
# sequence from then on and its height is a finite geometric sum.


def _chart(vec, ring: _LocalRing, s: int):
    """``(m, a)``: the first unit coordinate m and ``vec / vec_m`` mod pi^s."""
    mod = ring.pi**s
    for m, c in enumerate(vec):
        if c and c.rem(ring.pi):
            break
    else:
        return None
    inv, h = vec[m].half_gcdex(mod)
    inv = inv.quo_ground(h.LC)
    return m, tuple((c * inv).rem(mod) if c else c for c in vec)


def _disk_loss(phi: HomogMap, v: Place, src, dst, s: int, r: int) -> int | None:
    """The loss E shared by every point of the disk ``src`` when phi maps it into ``dst``, else None."""
    m, a = src
    m2, a2 = dst
    ring = _LocalRing(v, r + s + 1)
    mod, R = ring.modulus, ring.modulus.ring
    forms = [[(e, ring.lift(c)) for e, c in f.items()] for f in phi.forms]
    n = len(a)
    one = (0,) * n

    def mul(p, q):
        out = {}
        for e1, c1 in p.items():
            for e2, c2 in q.items():
                e = tuple(i + j for i, j in zip(e1, e2))
                out[e] = out.get(e, R(0)) + c1 * c2
        return {e: c.rem(mod) for e, c in out.items() if c.rem(mod)}

    coords = []
    for i in range(n):
        c = {one: a[i].rem(mod)} if a[i] else {}
        if i != m:
            c[tuple(int(k == i) for k in range(n))] = ring.pi**s
        coords.append(c)
    d = phi.degree
    powers = []
    for c in coords:
        row = [{one: R(1)}]
        for _ in range(d):
            row.append(mul(row[-1], c))
        powers.append(row)
    images = []
    for f in forms:
        acc: dict = {}
        for e, coeff in f:
            term = {one: coeff}
            for i, k in enumerate(e):
                if k:
                    term = mul(term, powers[i][k])
            for k, c in term.items():
                acc[k] = acc.get(k, R(0)) + c
        images.append({k: c.rem(mod) for k, c in acc.items() if c.rem(mod)})
    lead = images[m2]
    if one not in lead:
        return None
    E = ring.ord(lead[one])
    if E > r or any(ring.ord(c) <= E for k, c in lead.items() if k != one):
        return None
    for l in range(n):
        if l == m2:
            continue
        diff = dict(images[l])
        if a2[l]:
            for k, c in lead.items():
                diff[k] = diff.get(k, R(0)) - a2[l] * c
        if any(ring.ord(c.rem(mod)) < E + s for c in diff.values() if c.rem(mod)):
            return None
    return E


def _cycle_tail(phi: HomogMap, v: Place, vecs, rings, es, r: int, max_period: int = 3, max_start: int = 12):
    """``(j, [E_0..E_{k-1}])`` when the orbit provably loses E_0, E_1, ... periodically after step j."""
    for j in range(min(len(vecs), max_start + 1)):
        for s in range(1, r + 2):
            top = min(len(vecs) - 1, j + max_period)
            if any(rings[i].P < s for i in range(j, top + 1)):
                break
            centers = [_chart(vecs[i], rings[i], s) for i in range(j, top + 1)]
            if any(c is None for c in centers):
                break
            for k in range(1, len(centers)):
                if centers[k] != centers[0]:
                    continue
                losses = []
                for i in range(k):
                    E = _disk_loss(phi, v, centers[i], centers[i + 1], s, r)
                    if E is None or (j + i < len(es) and es[j + i] != E):
                        break
                    losses.append(E)
                if len(losses) == k:
                    return j, losses
                break
    return None


def _orbit_log_norms(
    phi: HomogMap, x: Sequence[RatFunc], v: Place, r: int, ell: int, max_bits: int | None = None
) -> list[Fraction]:
    """``log||Phi^j(x)||`` for j = 0..ell (normalized ``phi``); shorter if the bit budget ran out."""
    e0, es = _orbit_exponents(phi, x, v, r, ell, max_bits)
    d = phi.degree
    out = []
    total = e0
    out.append(Fraction(-total * v.degree))
    for e in es:
        total = d * total + e
        out.append(Fraction(-total * v.degree))
    return out


def _approximate(phi: HomogMap, x: Sequence[RatFunc], v: Place, r: int, ell: int) -> Fraction:
    """``d^-ell log||Phi^ell(x)||`` for normalized ``phi``."""
    return _orbit_log_norms(phi, x, v, r, ell)[-1] / phi.degree**ell


def _iterations_for(L: int, d: int, target: Fraction) -> int:
    ell = 0
    while Fraction(L, d**ell * (d - 1)) > target:
        ell += 1
    return ell


def local_height(
    phi: HomogMap,
    x: Sequence[RatFunc],
    v: Place,
    target_error: Fraction = DEFAULT_ERROR,
    exact_steps: int = 6,
    max_bits: int | None = MAX_BITS,
) -> HeightEstimate:
    """The homogeneous local height of ``x`` at ``v``, exact or within ``target_error``.

    Over Q(t) the truncated iteration may run out of its coefficient-size
    budget before reaching ``target_error``; the returned bound is then the
    one actually achieved.
    """
    d = phi.degree
    if d < 2:
        raise HeightError("heights need degree at least 2")
    if len(x) != phi.n_vars:
        raise HeightError("dimension mismatch")
    if all(not c for c in x):
        raise HeightError("the zero vector has no height")
    if not resultant(phi).value:
        raise SingularMap()
    target_error = Fraction(target_error)
    if target_error <= 0:
        raise HeightError("target error must be positive")
    phin, m = normalize_at(phi, v)
    offset = Fraction(-m * v.degree, d - 1)
    r = res_ord(phi, v)
    if r == 0:
        return HeightEstimate(log_norm(x, v) + offset, Fraction(0), 0, True)
    found = _exact_orbit(phin, x, v, exact_steps, closure_for(phin, v))
    if found is not None:
        value, steps = found
        return HeightEstimate(value + offset, Fraction(0), steps, True)
    gamma = lattice_witness(phi, v)
    if gamma is not None:
        return HeightEstimate(height_via_witness(phi, gamma, x, v), Fraction(0), 0, True)
    L = r * v.degree
    ell = _iterations_for(L, d, target_error)
    # a short run usually reaches a cycle of disks; the long one only bounds the error
    for n in sorted({min(ell, 8), ell}):
        e0, es, vecs, rings, (lphi, lv) = _truncated_orbit(phin, x, v, r, n, max_bits)
        tail = _cycle_tail(lphi, lv, vecs, rings, es, r)
        if tail is not None:
            j, losses = tail
            k = len(losses)
            S = Fraction(e0) + sum((Fraction(es[i - 1], d**i) for i in range(1, j + 1)), Fraction(0))
            S += sum(Fraction(E, d ** (j + 1 + q)) for q, E in enumerate(losses)) * Fraction(d**k, d**k - 1)
            return HeightEstimate(-S * v.degree + offset, Fraction(0), j + k, True)
        done, periodic = _residue_tail(lphi, lv, vecs[-1], ell - len(es))
        if periodic or len(es) + done >= ell:
            total = e0
            for e in es:
                total = d * total + e
            g = Fraction(-total * v.degree, d ** len(es))
            used = len(es) + done
            err = Fraction(0) if periodic else Fraction(L, d**used * (d - 1))
            return HeightEstimate(g + offset, err, used, periodic)
    ell = len(es)
    total = e0
    for e in es:
        total = d * total + e
    g = Fraction(-total * v.degree, d**ell)
    return HeightEstimate(g + offset, Fraction(L, d**ell * (d - 1)), ell, False)


def closure_for(phin: HomogMap, v: Place) -> set[ProjPoint] | None:
    key = ("closure", v)
    if key not in phin._cache:
        phin._cache[key] = bad_residue_closure(phin, v)
    return phin._cache[key]


def height_sequence(phi: HomogMap, x: Sequence[RatFunc], v: Place, ell: int) -> list[Fraction]:
    """The upper bounds ``g_1 >= g_2 >= ... >= g_ell`` for the normalized model (no offset)."""
    phin, _ = normalize_at(phi, v)
    r = res_ord(phi, v)
    norms = _orbit_log_norms(phin, x, v, max(r, 1), ell)
    return [n / phi.degree**j for j, n in enumerate(norms) if j]


# ---------------------------------------------------------------------------
# witnesses of good reduction


Witness = Union[LinearMap, Sequence[ConjScalar]]


@dataclass(frozen=True)
class WitnessData:
    """Valuation data of ``G^-1 phi G`` at v: its content exponent and normalized resultant order."""

    content: Fraction
    res_ord: Fraction

    @property
    def good(self) -> bool:
        return self.res_ord == 0


def witness_data(phi: HomogMap, gamma: Witness, v: Place) -> WitnessData:
    d, n = phi.degree, phi.n_vars
    if isinstance(gamma, LinearMap):
        psi = conjugate(phi, gamma)
        _, m = normalize_at(psi, v)
        return WitnessData(Fraction(m), Fraction(res_ord(psi, v)))
    D = [ConjScalar.of(s) for s in gamma]
    formal = formal_conjugate_diag(phi, D)
    m = min(s.ord(v) for f in formal for s in f.values())
    total = sum((s.ord(v) for s in D), Fraction(0))
    A = d ** (n - 1) * (d - 1)
    r = ord(resultant(phi).value, v) + A * total - m * n * d ** (n - 1)
    return WitnessData(m, r)


def _inverse_apply(gamma: Witness, x: Sequence[RatFunc]):
    if isinstance(gamma, LinearMap):
        return gamma.inverse().apply(x)
    return [ConjScalar.of(s).inverse() * ConjScalar(c) if c else None for s, c in zip(gamma, x)]


def height_via_witness(phi: HomogMap, gamma: Witness, x: Sequence[RatFunc], v: Place) -> Fraction:
    """Exact height from a good-reduction witness: ``log||G^-1 x|| + log|c|/(d-1)``."""
    data = witness_data(phi, gamma, v)
    if not data.good:
        raise HeightError("the witness does not give nonsingular reduction")
    return log_norm(_inverse_apply(gamma, x), v) - data.content * v.degree / (phi.degree - 1)


# ---------------------------------------------------------------------------
# filled Julia sets


@dataclass(frozen=True)
class JuliaVerdict:
    status: str  # "Escapes" | "BoundedCertified" | "BoundedSoFar"
    iteration: int | None = None
    witness: object = None
    reason: str = ""


def escape_radius(phi: HomogMap, v: Place) -> Fraction:
    return Fraction(res_ord(phi, v) * v.degree, phi.degree - 1)


def julia_membership(
    phi: HomogMap,
    x: Sequence[RatFunc],
    v: Place,
    max_iter: int = 30,
    witness: Witness | None = None,
    search_witness: bool = True,
) -> JuliaVerdict:
    """Decide whether ``x`` lies in the filled Julia set of the normalized model ``phi`` at ``v``."""
    if phi.degree < 2:
        raise HeightError("filled Julia sets need degree at least 2")
    if min(ord(c, v) for c in phi.coefficients()) != 0:
        raise HeightError("the model must be normalized at the place (content 0)")
    if all(not c for c in x):
        raise HeightError("the zero vector")
    r = res_ord(phi, v)
    radius = Fraction(r * v.degree, phi.degree - 1)
    if witness is None and r == 0:
        witness = LinearMap.identity(phi.field, phi.n_vars)
    if witness is None and search_witness:
        from .arithdyn.reduction import potential_good_reduction_search

        found = potential_good_reduction_search(phi, v, 2)
        if found is not None:
            witness = found
    if witness is not None:
        h = height_via_witness(phi, witness, x, v)
        if h <= 0:
            return JuliaVerdict("BoundedCertified", witness=witness, reason=f"height {h} from witness")
    est = local_height(phi, x, v)
    upper = est.value
    lower = est.value - est.error_bound
    if upper <= 0:
        how = "exact height" if est.exact else "upper bound for the height"
        return JuliaVerdict("BoundedCertified", witness="height", reason=f"{how} {upper} <= 0")
    if lower > 0:
        # log||Phi^j(x)|| >= d^j * H(x), so the orbit leaves the escape radius quickly
        j = 1
        while phi.degree**j * lower <= radius:
            j += 1
        norms = _orbit_log_norms(phi, x, v, max(r, 1), min(j, max_iter))
        for i, n in enumerate(norms):
            if i and n > radius:
                return JuliaVerdict("Escapes", iteration=i, reason=f"log-norm {n} > {radius}")
    return JuliaVerdict("BoundedSoFar", iteration=max_iter, witness=witness)


# ---------------------------------------------------------------------------
# identities


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    lhs: HeightEstimate
    rhs: Fraction
    rhs_error: Fraction

    @property
    def tolerance(self) -> Fraction:
        return self.lhs.error_bound + self.rhs_error

    @property
    def ok(self) -> bool:
        return abs(self.lhs.value - self.rhs) <= self.tolerance


def verify_height_identities(
    phi: HomogMap,
    gamma: LinearMap,
    c: RatFunc,
    x: Sequence[RatFunc],
    v: Place,
    target_error: Fraction = DEFAULT_ERROR,
) -> list[IdentityCheck]:
    """The scaling, content and conjugation identities for heights at ``v``."""
    d = phi.degree
    base = local_height(phi, x, v, target_error)
    cx = [c * a for a in x]
    a = local_height(phi, cx, v, target_error)
    b = local_height(scale(phi, c), x, v, target_error)
    psi = conjugate(phi, gamma)
    lhs_c = local_height(psi, x, v, target_error)
    rhs_c = local_height(phi, gamma.apply(x), v, target_error)
    return [
        IdentityCheck("scaling", a, base.value + log_abs(c, v), base.error_bound),
        IdentityCheck("content", b, base.value + log_abs(c, v) / (d - 1), base.error_bound),
        IdentityCheck("conjugation", lhs_c, rhs_c.value, rhs_c.error_bound),
    ]


# ---------------------------------------------------------------------------
# norm multiplicativity


def norm_defect(phi: HomogMap, x: Sequence[RatFunc], v: Place) -> Fraction:
    """``d*log||x|| - log||Phi(x)||`` for the normalized model; 0 for all x iff good reduction."""
    phin, _ = normalize_at(phi, v)
    return phi.degree * log_norm(x, v) - log_norm(evaluate(phin, x), v)


def norm_violation_point(phi: HomogMap, v: Place) -> list[RatFunc] | None:
    """A unit vector with ``||Phi(x)|| < 1`` for the normalized model, when one exists over the residue field.

    The reduced forms have a common zero exactly when the resultant is not a
    unit; any residue-field-rational common zero lifts to such a vector.
    """
    from .arithdyn.reduction import reduced_common_zero

    phin, _ = normalize_at(phi, v)
    z = reduced_common_zero(phin, v)
    if z is None:
        return None
    if norm_defect(phin, z, v) <= 0:
        raise HeightError("lifted common zero does not violate multiplicativity")
    return z
