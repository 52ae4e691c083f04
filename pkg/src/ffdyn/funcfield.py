"""Exact arithmetic in the rational function field K = k(t).

The constant field k is either the rationals or a prime field F_p.  Elements
of K are :class:`RatFunc` values backed by sympy's sparse fraction fields;
places are monic irreducible polynomials or the infinite place.  All
absolute values are kept additively: ``log|a|_v = -deg(v) * ord_v(a)`` as an
exact :class:`fractions.Fraction`, weighted by residue degree so the product
formula holds over non-algebraically-closed k.
"""

from __future__ import annotations

import ast
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Iterable, Sequence

from sympy import GF, QQ
from sympy.ntheory import isprime
from sympy.polys.fields import field as _sym_field

LogAbs = Fraction


class FuncFieldError(ValueError):
    """Base class for arithmetic errors in k(t)."""


class ParseError(FuncFieldError):
    pass


class ValuationOfZero(FuncFieldError):
    def __init__(self) -> None:
        super().__init__("valuation of zero")


class DivisionByZero(FuncFieldError, ZeroDivisionError):
    pass


class PoleError(FuncFieldError):
    pass


@dataclass(frozen=True)
class ConstantField:
    """The constant field: ``ConstantField("Q")`` or ``ConstantField("Fp", p)``."""

    kind: str = "Q"
    p: int | None = None

    def __post_init__(self) -> None:
        if self.kind == "Q":
            if self.p is not None:
                raise ValueError("the rationals take no characteristic")
        elif self.kind == "Fp":
            if self.p is None or not isprime(self.p):
                raise ValueError(f"F_p needs a prime p, got {self.p!r}")
        else:
            raise ValueError(f"unknown constant field kind {self.kind!r}")

    @classmethod
    def rationals(cls) -> "ConstantField":
        return cls("Q")

    @classmethod
    def prime(cls, p: int) -> "ConstantField":
        return cls("Fp", p)

    @property
    def characteristic(self) -> int:
        return 0 if self.kind == "Q" else self.p

    @property
    def is_finite(self) -> bool:
        return self.kind == "Fp"

    @property
    def domain(self):
        return _domain(self)

    @property
    def frac_field(self):
        return _frac_field(self)[0]

    @property
    def ring(self):
        return _frac_field(self)[0].ring

    def const(self, c) -> "RatFunc":
        return RatFunc(self, self.frac_field(self.domain.convert(c)))

    def one(self) -> "RatFunc":
        return self.const(1)

    def zero(self) -> "RatFunc":
        return self.const(0)

    def t(self) -> "RatFunc":
        return RatFunc(self, _frac_field(self)[1])

    def to_json(self) -> dict:
        return {"kind": "Q"} if self.kind == "Q" else {"kind": "Fp", "p": self.p}

    @classmethod
    def from_json(cls, data: dict) -> "ConstantField":
        kind = data.get("kind")
        if kind == "Q":
            return cls("Q")
        if kind == "Fp":
            return cls("Fp", int(data["p"]))
        raise ValueError(f"unknown field header {data!r}")

    def __str__(self) -> str:
        return "Q" if self.kind == "Q" else f"F_{self.p}"

    # constants of k -------------------------------------------------------

    def const_key(self, c) -> int | Fraction:
        """Canonical Python value of a domain element (``0..p-1`` or a Fraction)."""
        if self.kind == "Q":
            c = self.domain.convert(c)
            return Fraction(int(c.numerator), int(c.denominator))
        return int(self.domain.convert(c)) % self.p

    def const_str(self, c) -> str:
        return str(self.const_key(c))

    def elements(self) -> list:
        """All elements of a finite constant field, in order 0..p-1."""
        if not self.is_finite:
            raise ValueError("the rationals are infinite")
        return [self.domain(i) for i in range(self.p)]


@lru_cache(maxsize=None)
def _domain(cf: ConstantField):
    return QQ if cf.kind == "Q" else GF(cf.p)


@lru_cache(maxsize=None)
def _frac_field(cf: ConstantField):
    K, t = _sym_field("t", _domain(cf))
    return K, t


def poly_str(f, cf: ConstantField) -> str:
    """Render a sympy univariate polynomial in the expression grammar."""
    dense = f.to_dense()
    deg = len(dense) - 1
    if deg < 0:
        return "0"
    parts: list[str] = []
    for i, c in enumerate(dense):
        e = deg - i
        key = cf.const_key(c)
        if key == 0:
            continue
        neg = cf.kind == "Q" and key < 0
        mag = -key if neg else key
        if e == 0:
            body = str(mag)
        else:
            mono = "t" if e == 1 else f"t^{e}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("-" if neg else "+") + body)
    return "".join(parts)


class RatFunc:
    """An element of k(t), kept as a reduced fraction.

    ``numerator`` and ``denominator`` are sympy polynomials with the
    denominator monic.  Instances are immutable and hashable.
    """

    __slots__ = ("field", "_f", "_norm")

    def __init__(self, field: ConstantField, value) -> None:
        self.field = field
        self._f = value
        self._norm = None

    # construction ---------------------------------------------------------

    @classmethod
    def from_polys(cls, field: ConstantField, num, den=None) -> "RatFunc":
        K = field.frac_field
        if den is None:
            return cls(field, K(num))
        if not den:
            raise ZeroDivisionError("division by zero polynomial")
        return cls(field, K.new(num, den))

    def _coerce(self, other) -> "RatFunc":
        if isinstance(other, RatFunc):
            if other.field != self.field:
                raise FuncFieldError("mixing elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            if isinstance(other, Fraction):
                return self.field.const(other.numerator) / self.field.const(other.denominator)
            return self.field.const(other)
        return NotImplemented

    # properties -----------------------------------------------------------

    @property
    def _normal(self):
        if self._norm is None:
            num, den = self._f.numer, self._f.denom
            lc = den.LC
            self._norm = (num.quo_ground(lc), den.quo_ground(lc))
        return self._norm

    @property
    def numerator(self):
        return self._normal[0]

    @property
    def denominator(self):
        return self._normal[1]

    def is_zero(self) -> bool:
        return not self._f.numer

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_constant(self) -> bool:
        """True when the element lies in k (empty support)."""
        return self._f.numer.degree() <= 0 and self._f.denom.degree() <= 0

    def constant_value(self):
        if not self.is_constant():
            raise FuncFieldError(f"{self} is not constant")
        num, den = self._normal
        return num.LC if num else self.field.domain.zero

    def is_polynomial(self) -> bool:
        return self._f.denom.degree() == 0

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RatFunc(self.field, self._f + other._f)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RatFunc(self.field, self._f - other._f)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RatFunc(self.field, other._f - self._f)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RatFunc(self.field, self._f * other._f)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("division by zero in k(t)")
        return RatFunc(self.field, self._f / other._f)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __neg__(self):
        return RatFunc(self.field, -self._f)

    def __pow__(self, n: int):
        if n < 0:
            if self.is_zero():
                raise ZeroDivisionError("negative power of zero")
            return RatFunc(self.field, (1 / self._f) ** (-n))
        return RatFunc(self.field, self._f**n)

    def inverse(self) -> "RatFunc":
        return self**-1

    # comparison -----------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self._coerce(other)
        if not isinstance(other, RatFunc):
            return NotImplemented
        return self.field == other.field and self._normal == other._normal

    def __hash__(self) -> int:
        num, den = self._normal
        return hash((self.field, tuple(num.to_dense()), tuple(den.to_dense())))

    def __str__(self) -> str:
        num, den = self._normal
        ns = poly_str(num, self.field)
        if den.degree() == 0:
            return ns
        ds = poly_str(den, self.field)
        if len(num.terms()) > 1:
            ns = f"({ns})"
        if len(den.terms()) > 1 or den.degree() >= 1 and "*" in ds:
            ds = f"({ds})"
        return f"{ns}/{ds}"

    def __repr__(self) -> str:
        return f"RatFunc({str(self)!r} over {self.field})"


# ---------------------------------------------------------------------------
# parsing

_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)


def parse_rat_func(text: str, field: ConstantField) -> RatFunc:
    """Parse an expression in integers, ``t``, ``+ - * / ^`` and parentheses.

    >>> str(parse_rat_func("(t^2+1)/(t-1)", ConstantField.rationals()))
    '(t^2+1)/(t-1)'
    """
    src = text.strip().replace("^", "**")
    if not src:
        raise ParseError("empty expression")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None

    def walk(node) -> RatFunc:
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and type(node.value) is int:
            return field.const(node.value)
        if isinstance(node, ast.Name) and node.id == "t":
            return field.t()
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = walk(node.operand)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
            if isinstance(node.op, ast.Pow):
                exp = _int_exponent(node.right)
                base = walk(node.left)
                try:
                    return base**exp
                except ZeroDivisionError:
                    raise DivisionByZero("division by zero polynomial") from None
            left, right = walk(node.left), walk(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if right.is_zero():
                raise DivisionByZero("division by zero polynomial")
            return left / right
        raise ParseError(f"unsupported syntax in {text!r}")

    return walk(tree)


def _int_exponent(node) -> int:
    sign = 1
    while isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        if isinstance(node.op, ast.USub):
            sign = -sign
        node = node.operand
    if isinstance(node, ast.Constant) and type(node.value) is int:
        return sign * node.value
    raise ParseError("exponents must be integer literals")


# ---------------------------------------------------------------------------
# places


@total_ordering
@dataclass(frozen=True, eq=True)
class Place:
    """A place of k(t): a monic irreducible ``poly`` or the infinite place (``poly is None``)."""

    field: ConstantField
    poly: object | None = None

    @classmethod
    def infinity(cls, field: ConstantField) -> "Place":
        return cls(field, None)

    @classmethod
    def finite(cls, field: ConstantField, poly, check: bool = True) -> "Place":
        if isinstance(poly, RatFunc):
            if not poly.is_polynomial():
                raise FuncFieldError(f"{poly} is not a polynomial")
            poly = poly.numerator
        if poly.degree() < 1:
            raise FuncFieldError("a finite place needs a nonconstant polynomial")
        poly = poly.monic()
        if check and not poly.is_irreducible:
            raise FuncFieldError(f"{poly_str(poly, field)} is not irreducible over {field}")
        return cls(field, poly)

    @classmethod
    def parse(cls, text: str, field: ConstantField) -> "Place":
        text = text.strip()
        if text.lower() in ("inf", "infinity", "oo"):
            return cls.infinity(field)
        return cls.finite(field, parse_rat_func(text, field))

    @property
    def is_infinite(self) -> bool:
        return self.poly is None

    @property
    def degree(self) -> int:
        return 1 if self.poly is None else self.poly.degree()

    def uniformizer(self) -> RatFunc:
        """``p`` for a finite place, ``1/t`` at infinity."""
        if self.poly is None:
            return self.field.t().inverse()
        return RatFunc.from_polys(self.field, self.poly)

    def sort_key(self) -> tuple:
        if self.poly is None:
            return (1, 0, ())
        # small coefficients first, a positive one before its negative: t, t+1, t-1, ...
        keys = (self.field.const_key(c) for c in self.poly.to_dense())
        coeffs = tuple((abs(k), k < 0) for k in keys)
        return (0, self.degree, coeffs)

    def __lt__(self, other: "Place") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return "inf" if self.poly is None else poly_str(self.poly, self.field)

    def __repr__(self) -> str:
        return f"Place({str(self)!r})"


def _poly_ord(f, p) -> int:
    n = 0
    while True:
        q, r = divmod(f, p)
        if r:
            return n
        f = q
        n += 1


def ord(a: RatFunc, v: Place) -> int:  # noqa: A001 - the mathematical name
    """Order of vanishing of ``a`` at ``v`` (negative at poles)."""
    if a.is_zero():
        raise ValuationOfZero()
    num, den = a._f.numer, a._f.denom
    if v.poly is None:
        return den.degree() - num.degree()
    return _poly_ord(num, v.poly) - _poly_ord(den, v.poly)


def log_abs(a: RatFunc, v: Place) -> LogAbs:
    """``log|a|_v = -deg(v) * ord_v(a)`` as an exact rational."""
    return Fraction(-v.degree * ord(a, v))


def _monic_factors(f, field: ConstantField) -> list[tuple[object, int]]:
    if f.degree() <= 0:
        return []
    _, facs = f.factor_list()
    return [(g.monic(), e) for g, e in facs]


def support(a: RatFunc) -> list[tuple[Place, int]]:
    """All places where ``a`` has nonzero order, sorted (finite first, then infinity)."""
    if a.is_zero():
        raise ValuationOfZero()
    out: list[tuple[Place, int]] = []
    for g, e in _monic_factors(a._f.numer, a.field):
        out.append((Place(a.field, g), e))
    for g, e in _monic_factors(a._f.denom, a.field):
        out.append((Place(a.field, g), -e))
    inf = Place.infinity(a.field)
    o = ord(a, inf)
    if o:
        out.append((inf, o))
    out.sort(key=lambda pe: pe[0].sort_key())
    return out


def support_places(elements: Iterable[RatFunc]) -> set[Place]:
    places: set[Place] = set()
    for a in elements:
        if not a.is_zero():
            places.update(v for v, _ in support(a))
    return places


def verify_product_formula(a: RatFunc) -> Fraction:
    """Sum of ``deg(v) * ord_v(a)`` over every place; zero for every nonzero ``a``."""
    total = Fraction(0)
    places = {v for v, _ in support(a)}
    places.add(Place.infinity(a.field))
    for v in places:
        total += v.degree * ord(a, v)
    return total


def residue(a: RatFunc, v: Place) -> RatFunc:
    """Image of ``a`` in the residue field at ``v``.

    For a finite place the residue field is ``k[t]/(p)`` and the result is the
    canonical remainder (a polynomial of degree < deg p); at infinity it is a
    constant.
    """
    if a.is_zero():
        return a
    o = ord(a, v)
    if o < 0:
        raise PoleError(f"{a} has a pole at {v}")
    if o > 0:
        return a.field.zero()
    num, den = a._f.numer, a._f.denom
    if v.poly is None:
        return a.field.const(num.LC / den.LC)
    s, h = den.half_gcdex(v.poly)
    # h is a nonzero constant since p does not divide den
    r = (num * s).rem(v.poly).quo_ground(h.LC)
    return RatFunc.from_polys(a.field, r)


def reduce_residue(r: RatFunc, v: Place) -> RatFunc:
    """Canonical form of a polynomial residue class modulo ``v``."""
    if v.poly is None:
        return r
    return RatFunc.from_polys(r.field, r.numerator.rem(v.poly))


# ---------------------------------------------------------------------------
# random elements for property checks


def random_poly(field: ConstantField, rng: random.Random, max_deg: int, coeff_bound: int = 5):
    R = field.ring
    deg = rng.randint(0, max_deg)
    coeffs = [rng.randint(-coeff_bound, coeff_bound) for _ in range(deg + 1)]
    return R.from_list(coeffs)


def random_ratfunc(
    field: ConstantField,
    rng: random.Random,
    max_deg: int = 6,
    coeff_bound: int = 5,
    nonzero: bool = True,
    polynomial: bool = False,
) -> RatFunc:
    R = field.ring
    while True:
        num = random_poly(field, rng, max_deg, coeff_bound)
        den = R(1) if polynomial else random_poly(field, rng, max_deg, coeff_bound)
        if not den or (nonzero and not num):
            continue
        return RatFunc.from_polys(field, num, den)


def random_integral(field: ConstantField, v: Place, rng: random.Random, max_deg: int = 4) -> RatFunc:
    """A random element with ``ord_v >= 0``."""
    while True:
        a = random_ratfunc(field, rng, max_deg, nonzero=False)
        if a.is_zero() or ord(a, v) >= 0:
            return a


def content_places(values: Sequence[RatFunc]) -> list[Place]:
    return sorted(support_places(values), key=Place.sort_key)
