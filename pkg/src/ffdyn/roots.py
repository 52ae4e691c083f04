"""K-rational roots of binary forms over k(t).

Over Q(t) the dehomogenized polynomial is factored as a bivariate polynomial
over Q.  sympy cannot factor multivariate polynomials over F_p, so over
F_p(t) linear factors are found by the rational root test in k[t][z]:
a root a/b in lowest terms has ``a | g_0`` and ``b | g_n``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import sympy

from .funcfield import ConstantField, RatFunc
from .homog import ProjPoint

_Z, _T = sympy.symbols("z t")


class RootError(ValueError):
    pass


@dataclass(frozen=True)
class Unsplit:
    """A factor without K-rational roots (or not split further), kept symbolically."""

    degree: int
    multiplicity: int
    factor: str
    irreducible: bool


def _lcm_den(coeffs: Sequence[RatFunc]):
    R = coeffs[0].field.ring
    out = R(1)
    for c in coeffs:
        if c:
            out = out.lcm(c.denominator)
    return out


def _to_poly_list(coeffs: Sequence[RatFunc]):
    """Clear denominators: ``coeffs`` (low degree first in z) as polynomials in k[t]."""
    L = _lcm_den(coeffs)
    return [(c.numerator * L).exquo(c.denominator) if c else L.ring(0) for c in coeffs]


def _eval_poly(polys, r: RatFunc) -> RatFunc:
    field = r.field
    acc = field.zero()
    for p in reversed(polys):
        acc = acc * r + RatFunc.from_polys(field, p)
    return acc


def _divide_linear(coeffs: list[RatFunc], r: RatFunc) -> list[RatFunc]:
    """Synthetic division of ``sum coeffs[i] z^i`` by ``z - r`` (exact)."""
    n = len(coeffs) - 1
    out = [None] * n
    carry = coeffs[n]
    for i in range(n - 1, -1, -1):
        out[i] = carry
        carry = coeffs[i] + carry * r
    if carry:
        raise RootError("not a root")
    return out


def _monic_divisors(poly, field: ConstantField):
    R = field.ring
    if poly.degree() <= 0:
        return [R(1)]
    _, facs = poly.factor_list()
    choices = []
    for f, e in facs:
        f = f.monic()
        choices.append([f**k for k in range(e + 1)])
    out = []
    for combo in itertools.product(*choices):
        d = R(1)
        for c in combo:
            d = d * c
        out.append(d)
    return out


def univariate_roots(coeffs: Sequence[RatFunc]) -> tuple[list[tuple[RatFunc, int]], list[Unsplit]]:
    """Roots in K of ``sum coeffs[i] z^i`` with multiplicities, plus the unsplit remainder."""
    coeffs = list(coeffs)
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    if not coeffs:
        raise RootError("zero polynomial")
    field = coeffs[0].field if coeffs[0] else next(c.field for c in coeffs if c)
    if len(coeffs) == 1:
        return [], []
    if field.kind == "Q":
        return _roots_q(coeffs, field)
    return _roots_fp(coeffs, field)


def _roots_q(coeffs, field):
    polys = _to_poly_list(coeffs)
    terms = {}
    for i, p in enumerate(polys):
        for (j,), c in p.terms():
            terms[(i, j)] = c
    P = sympy.Poly.from_dict(terms, _Z, _T, domain=sympy.QQ)
    _, facs = P.factor_list()
    roots, others = [], []
    for f, e in facs:
        dz = f.degree(_Z)
        if dz == 0:
            continue
        if dz == 1:
            # split f = a1(t) z + a0(t)
            a1 = sympy.Poly(f.as_expr().coeff(_Z, 1), _T, domain=sympy.QQ)
            a0 = sympy.Poly(f.as_expr().coeff(_Z, 0), _T, domain=sympy.QQ)
            R = field.ring
            num = R.from_list([sympy.QQ.convert(c) for c in a0.all_coeffs()]) if not a0.is_zero else R(0)
            den = R.from_list([sympy.QQ.convert(c) for c in a1.all_coeffs()])
            roots.append((-RatFunc.from_polys(field, num, den), e))
        else:
            others.append(Unsplit(dz, e, str(f.as_expr()).replace("**", "^"), True))
    roots.sort(key=lambda re: str(re[0]))
    return roots, others


def _roots_fp(coeffs, field):
    roots: list[tuple[RatFunc, int]] = []
    k = 0
    while not coeffs[0]:
        coeffs = coeffs[1:]
        k += 1
    if k:
        roots.append((field.zero(), k))
    if len(coeffs) > 1:
        polys = _to_poly_list(coeffs)
        nums = _monic_divisors(polys[0], field)
        dens = _monic_divisors(polys[-1], field)
        units = [field.const(u) for u in range(1, field.p)]
        seen = set()
        for a in nums:
            for b in dens:
                if a.gcd(b).degree() > 0:
                    continue
                base = RatFunc.from_polys(field, a, b)
                for u in units:
                    r = u * base
                    if r in seen:
                        continue
                    seen.add(r)
                    mult = 0
                    while len(coeffs) > 1 and not _eval_poly(_to_poly_list(coeffs), r):
                        coeffs = _divide_linear(coeffs, r)
                        mult += 1
                    if mult:
                        roots.append((r, mult))
                    if len(coeffs) == 1:
                        break
                if len(coeffs) == 1:
                    break
            if len(coeffs) == 1:
                break
    others = []
    if len(coeffs) > 1:
        n = len(coeffs) - 1
        text = " + ".join(f"({c})*z^{i}" for i, c in enumerate(coeffs) if c)
        others.append(Unsplit(n, 1, text, n <= 3))
    roots.sort(key=lambda re: str(re[0]))
    return roots, others


def binary_form_roots(form: Mapping[tuple[int, int], RatFunc], field: ConstantField):
    """Points of P^1(K) where the binary form vanishes, with multiplicities.

    Returns ``(roots, unsplit)``; root multiplicities plus unsplit degrees
    times multiplicities add up to the degree of the form.
    """
    form = {e: c for e, c in form.items() if c}
    if not form:
        raise RootError("the zero form has no finite root set")
    n = sum(next(iter(form)))
    coeffs = [form.get((i, n - i), field.zero()) for i in range(n + 1)]
    top = max(i for i, c in enumerate(coeffs) if c)
    roots = []
    if top < n:
        roots.append((ProjPoint((field.one(), field.zero())), n - top))
    zr, others = univariate_roots(coeffs[: top + 1])
    roots.extend((ProjPoint((r, field.one())), m) for r, m in zr)
    return roots, others
