"""Fixed-point multiplier spectra of maps of P^1 over k(t).

The elementary symmetric functions of the multipliers at the fixed points
of phi^n are invariant under conjugation over any extension of K, so a
non-constant one shows phi is not isotrivial.  They are computed as the
characteristic polynomial of multiplication by ``phi'(z)`` on
``K[z]/(f)`` where f is the fixed-point polynomial; no roots are taken.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .. import linalg
from ..funcfield import ConstantField, Place, RatFunc, support
from ..homog import HomogMap, LinearMap, conjugate, iterate

UPoly = list[RatFunc]


class MultiplierError(ValueError):
    pass


# dense univariate polynomials over K, low degree first


def _trim(f: UPoly) -> UPoly:
    f = list(f)
    while f and not f[-1]:
        f.pop()
    return f


def _sub(f: UPoly, g: UPoly, zero: RatFunc) -> UPoly:
    n = max(len(f), len(g))
    f = f + [zero] * (n - len(f))
    g = g + [zero] * (n - len(g))
    return _trim([a - b for a, b in zip(f, g)])


def _mul(f: UPoly, g: UPoly, zero: RatFunc) -> UPoly:
    if not f or not g:
        return []
    out = [zero] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = out[i + j] + a * b
    return _trim(out)


def _divmod(f: UPoly, g: UPoly, zero: RatFunc) -> tuple[UPoly, UPoly]:
    g = _trim(g)
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    r = _trim(f)
    q = [zero] * max(len(r) - len(g) + 1, 0)
    lead = g[-1]
    while len(r) >= len(g):
        c = r[-1] / lead
        k = len(r) - len(g)
        q[k] = c
        r = _sub(r, [zero] * k + [c * a for a in g], zero)
    return _trim(q), r


def _deriv(f: UPoly) -> UPoly:
    return _trim([a * i for i, a in enumerate(f)][1:])


def _divide_mod(a: UPoly, b: UPoly, f: UPoly, zero: RatFunc) -> UPoly:
    """``a / b mod f`` as the solution of ``M_b h = a`` with M_b multiplication by b.

    A linear solve over K keeps coefficient growth in check, where the
    extended Euclidean algorithm over k(t) blows up quickly.
    """
    n = len(f) - 1
    cols = []
    cur = _divmod(b, f, zero)[1]
    for _ in range(n):
        cols.append(cur + [zero] * (n - len(cur)))
        cur = _divmod([zero] + cur, f, zero)[1]
    M = [[cols[j][i] for j in range(n)] for i in range(n)]
    rhs = _divmod(a, f, zero)[1]
    rhs = rhs + [zero] * (n - len(rhs))
    try:
        return _trim(linalg.solve(zero.field, M, rhs))
    except ZeroDivisionError:
        raise MultiplierError("not invertible modulo the fixed-point polynomial") from None


# ---------------------------------------------------------------------------


def dehomogenize(form: dict, degree: int, field: ConstantField) -> UPoly:
    """``F(z, 1)`` as a dense list."""
    out = [field.zero()] * (degree + 1)
    for (a, _), c in form.items():
        out[a] = out[a] + c
    return out


def _moves_infinity(phi: HomogMap) -> bool:
    # infinity = (1:0) is fixed iff the second form vanishes there
    e = (phi.degree, 0)
    return bool(phi.forms[1].get(e))


def _unfix_infinity(phi: HomogMap) -> HomogMap:
    """Conjugate by a constant matrix so that (1:0) is not a fixed point."""
    if _moves_infinity(phi):
        return phi
    field = phi.field
    one, z = field.one(), field.zero()
    if field.is_finite:
        pairs = [(a, b) for b in range(field.p) for a in range(field.p)]
    else:
        pairs = [(a, b) for s in range(1, 8) for a in range(-s, s + 1) for b in range(-s, s + 1) if max(abs(a), abs(b)) == s]
    for a, b in pairs:
        # gamma sends (1:0) to (1:b) and (0:1) to (a:1)
        gamma = LinearMap(field, [[one, field.const(a)], [field.const(b), one]])
        if not gamma.det():
            continue
        psi = conjugate(phi, gamma)
        if _moves_infinity(psi):
            return psi
    raise MultiplierError("every k-rational point is fixed; no constant conjugation moves infinity")


def fixed_point_polynomial(phi: HomogMap) -> tuple[UPoly, UPoly, UPoly]:
    """``(f, F, G)`` with ``phi(z) = F/G`` and ``f = z G - F``; infinity must not be fixed."""
    if phi.n_vars != 2:
        raise MultiplierError("multipliers are implemented for P^1 only")
    field, d = phi.field, phi.degree
    F = dehomogenize(phi.forms[0], d, field)
    G = dehomogenize(phi.forms[1], d, field)
    f = _sub([field.zero()] + G, F, field.zero())
    if len(f) != d + 2:
        raise MultiplierError("infinity is a fixed point")
    return f, _trim(F), _trim(G)


def _multiplier_residue(phi: HomogMap):
    """``(f, lam)`` with f the fixed-point polynomial and ``lam = phi'(z) mod f``."""
    psi = _unfix_infinity(phi)
    field = psi.field
    zero, one = field.zero(), field.one()
    f, F, G = fixed_point_polynomial(psi)
    W = _sub(_mul(_deriv(F), G, zero), _mul(F, _deriv(G), zero), zero)
    lam = _divide_mod(W, _mul(G, G, zero), f, zero)
    return f, lam


def multiplier_charpoly(phi: HomogMap) -> list[RatFunc]:
    """Coefficients ``[1, c_1, ..., c_{d+1}]`` of ``prod (T - lambda_P)`` over the fixed points."""
    f, lam = _multiplier_residue(phi)
    field = phi.field
    zero = field.zero()
    n = len(f) - 1
    # column j is lam * z^j mod f
    cols = []
    cur = lam
    for _ in range(n):
        col = cur + [zero] * (n - len(cur))
        cols.append(col)
        cur = _divmod([zero] + cur, f, zero)[1]
    matrix = [[cols[j][i] for j in range(n)] for i in range(n)]
    return linalg.charpoly(field, matrix)


def _root_power_sums(f: UPoly) -> list[RatFunc]:
    """``Tr(z^j)`` in K[z]/(f) for j < deg f, by Newton's identities."""
    n = len(f) - 1
    lead = f[-1]
    a = [f[n - i] / lead for i in range(n + 1)]  # monic: z^n + a_1 z^(n-1) + ...
    field = lead.field
    s = [field.const(n)]
    for k in range(1, n):
        acc = a[k] * k
        for i in range(1, k):
            acc = acc + a[i] * s[k - i]
        s.append(-acc)
    return s


def first_nonconstant_sigma(phi: HomogMap) -> tuple[int, RatFunc] | None:
    """Index and value of the first non-constant ``sigma_i`` of the fixed-point multipliers.

    Works through the power sums ``Tr(lam^k)`` and stops at the first
    non-constant one, which is much cheaper than the full charpoly when the
    answer comes early.  In characteristic p the identities need k < p; past
    that the charpoly is used.
    """
    f, lam = _multiplier_residue(phi)
    field = phi.field
    zero = field.zero()
    n = len(f) - 1
    tr = _root_power_sums(f)
    p = field.p if field.is_finite else None
    sig = [field.one()]
    psums: list[RatFunc] = []
    cur = lam
    for k in range(1, n + 1):
        if p is not None and k >= p:
            cp = multiplier_charpoly(phi)
            full = [c if i % 2 == 0 else -c for i, c in enumerate(cp)]
            for i in range(k, n + 1):
                if full[i] and not full[i].is_constant():
                    return i, full[i]
            return None
        pk = zero
        for j, c in enumerate(cur):
            if c:
                pk = pk + c * tr[j]
        psums.append(pk)
        # k sigma_k = sum_{i=1..k} (-1)^(i-1) sigma_{k-i} p_i
        acc = zero
        for i in range(1, k + 1):
            term = sig[k - i] * psums[i - 1]
            acc = acc + term if i % 2 else acc - term
        sk = acc / field.const(k)
        sig.append(sk)
        if sk and not sk.is_constant():
            return k, sk
        if k < n:
            cur = _divmod(_mul(cur, lam, zero), f, zero)[1]
    return None


def sigma_invariants(phi: HomogMap, n: int = 1) -> list[RatFunc]:
    """``sigma_1 .. sigma_k`` of the multipliers of phi^n at its fixed points."""
    psi = iterate(phi, n) if n > 1 else phi
    cp = multiplier_charpoly(psi)
    return [c if i % 2 == 0 else -c for i, c in enumerate(cp)][1:]


@dataclass(frozen=True)
class MultiplierCertificate:
    """``sigma_index`` of the period-n multiplier spectrum has nonempty support."""

    n: int
    index: int
    value: RatFunc
    poles: tuple[Place, ...]

    def to_json(self) -> dict:
        return {
            "kind": "multiplier",
            "n": self.n,
            "index": self.index,
            "value": str(self.value),
            "poles": [str(v) for v in self.poles],
        }


def multiplier_certificate(phi: HomogMap, max_n: int = 2, max_degree: int = 8) -> MultiplierCertificate | None:
    """First non-constant sigma invariant, scanning n = 1..max_n and indices in order.

    Periods with ``d^n > max_degree`` are skipped: the charpoly over K of the
    period-n fixed-point algebra grows too fast to be worth it.
    """
    for n in range(1, max_n + 1):
        if n > 1 and phi.degree**n > max_degree:
            break
        try:
            hit = first_nonconstant_sigma(iterate(phi, n) if n > 1 else phi)
        except MultiplierError:
            continue
        if hit is not None:
            i, s = hit
            poles = tuple(sorted(v for v, e in support(s) if e < 0))
            return MultiplierCertificate(n, i, s, poles)
    return None


# ---------------------------------------------------------------------------
# independent recomputation through a resultant


def _sympy_poly_in_t(c: RatFunc, T):
    import sympy

    num, den = c.numerator, c.denominator
    nd = [sympy.Integer(int(a)) if c.field.is_finite else sympy.Rational(str(a)) for a in num.to_dense()]
    dd = [sympy.Integer(int(a)) if c.field.is_finite else sympy.Rational(str(a)) for a in den.to_dense()]
    return sum(a * T**i for i, a in enumerate(reversed(nd))), sum(a * T**i for i, a in enumerate(reversed(dd)))


def sigma_via_resultant(phi: HomogMap, n: int = 1) -> list[RatFunc]:
    """The same sigma invariants from ``Res_z(f(z), G(z)^2 T - W(z))``.

    Up to a factor free of T the resultant equals ``prod (T - lambda_P)``.
    """
    import sympy

    from ..funcfield import parse_rat_func

    psi = iterate(phi, n) if n > 1 else phi
    psi = _unfix_infinity(psi)
    field = psi.field
    zero = field.zero()
    f, F, G = fixed_point_polynomial(psi)
    W = _sub(_mul(_deriv(F), G, zero), _mul(F, _deriv(G), zero), zero)
    z, T, t = sympy.symbols("z T t")

    def expr(poly: UPoly):
        terms = []
        for i, c in enumerate(poly):
            if c:
                a, b = _sympy_poly_in_t(c, t)
                terms.append(a / b * z**i)
        return sympy.together(sum(terms))

    fe = sympy.numer(sympy.together(expr(f)))
    ge = sympy.numer(sympy.together(sympy.expand(expr(_mul(G, G, zero))) * T - expr(W)))
    opts = {"modulus": field.p} if field.is_finite else {"domain": "QQ"}
    R = sympy.resultant(sympy.Poly(fe, z, T, t, **opts), sympy.Poly(ge, z, T, t, **opts))
    RT = sympy.Poly(R.as_expr(), T)
    coeffs = RT.all_coeffs()
    # coefficients are polynomials in t; divide inside K, not over Q
    vals = [parse_rat_func(str(sympy.expand(c)).replace("**", "^"), field) for c in coeffs]
    out = []
    for i, c in enumerate(vals[1:], start=1):
        r = c / vals[0]
        out.append(r if i % 2 == 0 else -r)
    return out


def recheck_certificate(phi: HomogMap, cert: MultiplierCertificate) -> bool:
    """Recompute the flagged invariant by the resultant route and test it is non-constant."""
    sig = sigma_via_resultant(phi, cert.n)
    if cert.index > len(sig):
        return False
    s = sig[cert.index - 1]
    return s == cert.value and bool(s) and not s.is_constant()
