"""Homogeneous polynomial maps K^{N+1} -> K^{N+1} and coordinate changes.

A :class:`HomogMap` is a tuple of N+1 forms of a common degree, each stored
sparsely as ``{exponent tuple: RatFunc}``.  Coordinate changes are either a
:class:`LinearMap` over K or a diagonal of :class:`ConjScalar` values, which
carry fractional powers of uniformizers formally instead of building the
field extension they live in.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from . import linalg
from .funcfield import ConstantField, FuncFieldError, LogAbs, Place, RatFunc, log_abs, ord, parse_rat_func

Exp = tuple[int, ...]
Form = dict[Exp, RatFunc]


class HomogError(ValueError):
    pass


class UnresolvedRadical(HomogError):
    """A formal radical did not cancel, so the result is not defined over K."""


# ---------------------------------------------------------------------------
# forms


def monomials(n_vars: int, degree: int) -> list[Exp]:
    """Exponent vectors of total degree ``degree``, in descending lex order."""
    if n_vars == 1:
        return [(degree,)]
    out = []
    for a in range(degree, -1, -1):
        out.extend((a,) + rest for rest in monomials(n_vars - 1, degree - a))
    return out


def form_add(f: Mapping[Exp, RatFunc], g: Mapping[Exp, RatFunc]) -> Form:
    out = dict(f)
    for e, c in g.items():
        s = out[e] + c if e in out else c
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return out


def form_scale(f: Mapping[Exp, RatFunc], c: RatFunc) -> Form:
    if not c:
        return {}
    return {e: a * c for e, a in f.items()}


def form_mul(f: Mapping[Exp, RatFunc], g: Mapping[Exp, RatFunc]) -> Form:
    out: Form = {}
    for e1, a in f.items():
        for e2, b in g.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            s = out[e] + a * b if e in out else a * b
            if s:
                out[e] = s
            else:
                del out[e]
    return out


def form_eval(f: Mapping[Exp, RatFunc], x: Sequence[RatFunc], field: ConstantField) -> RatFunc:
    acc = field.zero()
    for e, c in f.items():
        term = c
        for xi, k in zip(x, e):
            if k:
                term = term * xi**k
        acc = acc + term
    return acc


def form_degree(f: Mapping[Exp, RatFunc]) -> int | None:
    degs = {sum(e) for e in f}
    if len(degs) > 1:
        raise HomogError("form is not homogeneous")
    return degs.pop() if degs else None


# ---------------------------------------------------------------------------
# maps


class HomogMap:
    """N+1 homogeneous forms of degree d in N+1 variables over k(t)."""

    __slots__ = ("field", "n_vars", "degree", "forms", "_cache")

    def __init__(self, field: ConstantField, n_vars: int, degree: int, forms: Iterable[Mapping[Exp, RatFunc]]):
        forms = tuple({e: c for e, c in f.items() if c} for f in forms)
        if len(forms) != n_vars:
            raise HomogError(f"expected {n_vars} forms, got {len(forms)}")
        if degree < 1:
            raise HomogError("degree must be at least 1")
        for f in forms:
            for e in f:
                if len(e) != n_vars or sum(e) != degree or min(e) < 0:
                    raise HomogError(f"monomial {e} is not of degree {degree} in {n_vars} variables")
        self.field = field
        self.n_vars = n_vars
        self.degree = degree
        self.forms = forms
        self._cache: dict = {}

    @property
    def N(self) -> int:
        return self.n_vars - 1

    @classmethod
    def from_strings(cls, field: ConstantField, forms: Sequence[Mapping[Exp, str]]) -> "HomogMap":
        n = len(forms)
        parsed = [{tuple(e): parse_rat_func(c, field) for e, c in f.items()} for f in forms]
        degree = next(sum(e) for f in parsed for e in f)
        return cls(field, n, degree, parsed)

    @classmethod
    def from_exprs(cls, field: ConstantField, exprs: Sequence[str]) -> "HomogMap":
        """Build a map from strings like ``"x0^2 + t*x1^2"`` (variables x0..xN)."""
        import sympy

        n = len(exprs)
        xs = sympy.symbols(f"x0:{n}")
        t = sympy.Symbol("t")
        forms = []
        for text in exprs:
            expr = sympy.sympify(text.replace("^", "**"), locals={**{str(x): x for x in xs}, "t": t})
            poly = sympy.Poly(sympy.expand(expr), *xs)
            form = {}
            for mono, coeff in poly.terms():
                form[tuple(mono)] = parse_rat_func(str(coeff).replace("**", "^"), field)
            forms.append(form)
        degree = next(sum(e) for f in forms for e in f)
        return cls(field, n, degree, forms)

    def is_degenerate(self) -> bool:
        return any(not f for f in self.forms)

    def coefficients(self) -> list[RatFunc]:
        return [c for f in self.forms for c in f.values()]

    def is_constant(self) -> bool:
        """All coefficients lie in the constant field."""
        return all(c.is_constant() for c in self.coefficients())

    def __eq__(self, other) -> bool:
        if not isinstance(other, HomogMap):
            return NotImplemented
        return (
            self.field == other.field
            and self.n_vars == other.n_vars
            and self.degree == other.degree
            and self.forms == other.forms
        )

    def __hash__(self) -> int:
        return hash((self.field, self.n_vars, self.degree, tuple(frozenset(f.items()) for f in self.forms)))

    def __call__(self, x: Sequence[RatFunc]) -> list[RatFunc]:
        return evaluate(self, x)

    def form_str(self, i: int) -> str:
        f = self.forms[i]
        if not f:
            return "0"
        parts = []
        for e in sorted(f, reverse=True):
            mono = "*".join(
                (f"x{j}" if k == 1 else f"x{j}^{k}") for j, k in enumerate(e) if k
            )
            c = f[e]
            cs = str(c)
            if cs == "1":
                parts.append(mono)
            elif cs == "-1":
                parts.append("-" + mono)
            else:
                if any(ch in cs[1:] for ch in "+-/") or "/" in cs:
                    cs = f"({cs})"
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __str__(self) -> str:
        return "(" + ", ".join(self.form_str(i) for i in range(self.n_vars)) + ")"

    def __repr__(self) -> str:
        return f"HomogMap{self} over {self.field}"


def evaluate(phi: HomogMap, x: Sequence[RatFunc]) -> list[RatFunc]:
    if len(x) != phi.n_vars:
        raise HomogError(f"point has {len(x)} coordinates, map needs {phi.n_vars}")
    # polynomial arithmetic over common denominators; one cancellation per output
    field = phi.field
    nz = [c for c in x if c]
    if not nz:
        return [field.zero() for _ in phi.forms]
    D = nz[0].denominator
    for c in nz[1:]:
        D = D.lcm(c.denominator)
    R = D.ring
    nums = [c.numerator * D.exquo(c.denominator) if c else R(0) for c in x]
    powers = [[R(1)] for _ in x]
    for i, n in enumerate(nums):
        for _ in range(phi.degree):
            powers[i].append(powers[i][-1] * n)
    Dd = D**phi.degree
    out = []
    for f in phi.forms:
        coeffs = [(e, c) for e, c in f.items() if c]
        if not coeffs:
            out.append(field.zero())
            continue
        B = coeffs[0][1].denominator
        for _, c in coeffs[1:]:
            B = B.lcm(c.denominator)
        acc = R(0)
        for e, c in coeffs:
            term = c.numerator * B.exquo(c.denominator)
            for i, k in enumerate(e):
                if k:
                    term = term * powers[i][k]
            acc += term
        out.append(RatFunc.from_polys(field, acc, B * Dd) if acc else field.zero())
    return out


def compose(phi: HomogMap, psi: HomogMap) -> HomogMap:
    """The map ``phi o psi`` of degree ``deg(phi) * deg(psi)``."""
    if phi.n_vars != psi.n_vars:
        raise HomogError("dimension mismatch")
    n = phi.n_vars
    one = {tuple([0] * n): phi.field.one()}
    powers = [[one] for _ in range(n)]
    for i in range(n):
        for _ in range(phi.degree):
            powers[i].append(form_mul(powers[i][-1], psi.forms[i]))
    forms = []
    for f in phi.forms:
        acc: Form = {}
        for e, c in f.items():
            term: Form = {tuple([0] * n): c}
            for i, k in enumerate(e):
                if k:
                    term = form_mul(term, powers[i][k])
            acc = form_add(acc, term)
        forms.append(acc)
    return HomogMap(phi.field, n, phi.degree * psi.degree, forms)


def iterate(phi: HomogMap, ell: int) -> HomogMap:
    if ell < 1:
        raise HomogError("iteration count must be positive")
    key = ("iterate", ell)
    if key in phi._cache:
        return phi._cache[key]
    out = phi
    for _ in range(ell - 1):
        out = compose(phi, out)
    phi._cache[key] = out
    return out


def scale(phi: HomogMap, c: RatFunc) -> HomogMap:
    if not c:
        raise HomogError("cannot scale a map by zero")
    return HomogMap(phi.field, phi.n_vars, phi.degree, [form_scale(f, c) for f in phi.forms])


def coefficient_ords(phi: HomogMap, v: Place) -> list[int]:
    return [ord(c, v) for c in phi.coefficients()]


def normalize_at(phi: HomogMap, v: Place) -> tuple[HomogMap, int]:
    """Scale ``phi`` by a power of the uniformizer so its minimal coefficient order at ``v`` is 0.

    Returns ``(pi^-m * phi, m)``.
    """
    ords = coefficient_ords(phi, v)
    if not ords:
        raise HomogError("the zero map has no normal form")
    m = min(ords)
    if m == 0:
        return phi, 0
    return scale(phi, v.uniformizer() ** (-m)), m


def sup_norm_coeff(phi: Union[HomogMap, Mapping[Exp, RatFunc]], v: Place) -> LogAbs:
    """``log H``: the maximum of ``log|c|_v`` over the coefficients."""
    coeffs = phi.coefficients() if isinstance(phi, HomogMap) else [c for c in phi.values() if c]
    if not coeffs:
        raise HomogError("zero input has no coefficient norm")
    return max(log_abs(c, v) for c in coeffs)


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class ProjPoint:
    """A point of P^N(K) stored by a lift normalised to make the last nonzero coordinate 1."""

    lift: tuple[RatFunc, ...]

    def __post_init__(self) -> None:
        if all(not c for c in self.lift):
            raise HomogError("the zero vector is not a projective point")
        last = next(c for c in reversed(self.lift) if c)
        if last != 1:
            object.__setattr__(self, "lift", tuple(c / last for c in self.lift))

    @property
    def field(self) -> ConstantField:
        return self.lift[0].field

    def __str__(self) -> str:
        return "(" + ":".join(str(c) for c in self.lift) + ")"


def proportional(x: Sequence[RatFunc], y: Sequence[RatFunc]) -> RatFunc | None:
    """The scalar c with ``y = c*x``, or None when x and y are not proportional."""
    c = None
    for a, b in zip(x, y):
        if not a:
            if b:
                return None
            continue
        r = b / a
        if c is None:
            c = r
        elif r != c:
            return None
    return c


# ---------------------------------------------------------------------------
# coordinate changes


class LinearMap:
    """An invertible (N+1)x(N+1) matrix over K acting by ``x -> M x``."""

    __slots__ = ("field", "matrix")

    def __init__(self, field: ConstantField, matrix: Sequence[Sequence[RatFunc]]):
        n = len(matrix)
        if any(len(r) != n for r in matrix):
            raise HomogError("matrix must be square")
        self.field = field
        self.matrix = tuple(tuple(r) for r in matrix)

    @classmethod
    def identity(cls, field: ConstantField, n: int) -> "LinearMap":
        return cls(field, linalg.identity(field, n))

    @classmethod
    def diagonal(cls, entries: Sequence[RatFunc]) -> "LinearMap":
        field = entries[0].field
        n = len(entries)
        z = field.zero()
        return cls(field, [[entries[i] if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def from_strings(cls, field: ConstantField, rows: Sequence[Sequence[str]]) -> "LinearMap":
        return cls(field, [[parse_rat_func(c, field) for c in r] for r in rows])

    @property
    def size(self) -> int:
        return len(self.matrix)

    def det(self) -> RatFunc:
        return linalg.det(self.field, self.matrix)

    def inverse(self) -> "LinearMap":
        return LinearMap(self.field, linalg.inverse(self.field, self.matrix))

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        return LinearMap(self.field, linalg.matmul(self.field, self.matrix, other.matrix))

    def apply(self, x: Sequence[RatFunc]) -> list[RatFunc]:
        return linalg.matvec(self.matrix, x)

    def as_homog(self) -> HomogMap:
        n = self.size
        forms = []
        for row in self.matrix:
            forms.append({tuple(int(i == j) for i in range(n)): c for j, c in enumerate(row) if c})
        return HomogMap(self.field, n, 1, forms)

    def entries(self) -> list[RatFunc]:
        return [c for r in self.matrix for c in r]

    def __eq__(self, other) -> bool:
        return isinstance(other, LinearMap) and self.matrix == other.matrix

    def __hash__(self) -> int:
        return hash(self.matrix)

    def __str__(self) -> str:
        return "[" + ", ".join("[" + ", ".join(str(c) for c in r) + "]" for r in self.matrix) + "]"


def _canonical_exponents(field: ConstantField, base: RatFunc, exponents: Mapping[Place, Fraction]):
    """Move infinite-place radicals onto (t) and fold integer parts into the base."""
    t_place = Place(field, field.ring.gens[0])
    exps: dict[Place, Fraction] = {}
    for v, q in exponents.items():
        q = Fraction(q)
        if v.is_infinite:
            # pi_inf = 1/t
            v, q = t_place, -q
        exps[v] = exps.get(v, Fraction(0)) + q
    out = {}
    for v, q in exps.items():
        whole = q.numerator // q.denominator
        frac = q - whole
        if whole:
            base = base * v.uniformizer() ** whole
        if frac:
            out[v] = frac
    return base, tuple(sorted(out.items(), key=lambda kv: kv[0].sort_key()))


class ConjScalar:
    """The formal product ``base * prod_v pi_v^{q_v}`` with rational exponents.

    Stands in for an element of a radical extension of K.  Only valuations of
    such elements are ever needed; when all exponents are integral the value
    resolves back into K.
    """

    __slots__ = ("field", "base", "exponents")

    def __init__(self, base: RatFunc, exponents: Mapping[Place, Fraction] | None = None):
        if not base:
            raise HomogError("a conjugation scalar must be nonzero")
        self.field = base.field
        self.base, self.exponents = _canonical_exponents(base.field, base, exponents or {})

    @classmethod
    def of(cls, x: Union["ConjScalar", RatFunc, int]) -> "ConjScalar":
        if isinstance(x, ConjScalar):
            return x
        if isinstance(x, int):
            raise HomogError("pass a RatFunc so the field is known")
        return cls(x)

    @classmethod
    def uniformizer_power(cls, v: Place, q: Fraction) -> "ConjScalar":
        return cls(v.field.one(), {v: Fraction(q)})

    @classmethod
    def root(cls, a: RatFunc, n: int) -> "ConjScalar":
        """A formal n-th root of ``a``, correct up to a constant factor in an extension of k."""
        from .funcfield import support

        exps = {v: Fraction(e, n) for v, e in support(a) if not v.is_infinite}
        return cls(a.field.one(), exps)

    def __mul__(self, other) -> "ConjScalar":
        other = ConjScalar.of(other)
        exps = dict(self.exponents)
        for v, q in other.exponents:
            exps[v] = exps.get(v, Fraction(0)) + q
        return ConjScalar(self.base * other.base, exps)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ConjScalar":
        return ConjScalar(self.base**n, {v: q * n for v, q in self.exponents})

    def inverse(self) -> "ConjScalar":
        return self**-1

    def __truediv__(self, other) -> "ConjScalar":
        return self * ConjScalar.of(other).inverse()

    def is_rational(self) -> bool:
        return not self.exponents

    def resolve(self) -> RatFunc:
        if self.exponents:
            raise UnresolvedRadical(f"{self} is not an element of K")
        return self.base

    def ord(self, w: Place) -> Fraction:
        total = Fraction(ord(self.base, w))
        for v, q in self.exponents:
            total += q * ord(v.uniformizer(), w)
        return total

    def log_abs(self, w: Place) -> Fraction:
        return -w.degree * self.ord(w)

    def __eq__(self, other) -> bool:
        if isinstance(other, RatFunc):
            other = ConjScalar(other)
        return isinstance(other, ConjScalar) and self.base == other.base and self.exponents == other.exponents

    def __hash__(self) -> int:
        return hash((self.base, self.exponents))

    def __str__(self) -> str:
        if not self.exponents:
            return str(self.base)
        rad = "*".join(f"({v})^({q})" for v, q in self.exponents)
        return rad if self.base == 1 else f"({self.base})*{rad}"

    def __repr__(self) -> str:
        return f"ConjScalar({self})"


DiagConj = tuple[ConjScalar, ...]


def diag_conj(entries: Sequence[Union[ConjScalar, RatFunc]]) -> DiagConj:
    return tuple(ConjScalar.of(e) for e in entries)


def formal_conjugate_diag(
    phi: HomogMap, D: Sequence[ConjScalar], scalar: ConjScalar | None = None
) -> list[dict[Exp, ConjScalar]]:
    """Coefficients of ``scalar * D^-1 o phi o D`` as formal scalars."""
    if len(D) != phi.n_vars:
        raise HomogError("diagonal has the wrong size")
    inv = [s.inverse() for s in D]
    out = []
    for j, f in enumerate(phi.forms):
        g = {}
        for e, c in f.items():
            s = ConjScalar(c) * inv[j]
            for i, k in enumerate(e):
                if k:
                    s = s * D[i] ** k
            if scalar is not None:
                s = s * scalar
            g[e] = s
        out.append(g)
    return out


def conjugate(
    phi: HomogMap,
    gamma: Union[LinearMap, Sequence[ConjScalar]],
    scalar: Union[RatFunc, ConjScalar, None] = None,
) -> HomogMap:
    """``scalar * gamma^-1 o phi o gamma``.

    ``gamma`` is a :class:`LinearMap` or a diagonal of :class:`ConjScalar`.
    For diagonals the fractional exponents must cancel in every output
    coefficient, otherwise :class:`UnresolvedRadical` is raised.
    """
    if isinstance(gamma, LinearMap):
        if gamma.size != phi.n_vars:
            raise HomogError("dimension mismatch")
        if not gamma.det():
            raise HomogError("singular coordinate change")
        inner = compose(phi, gamma.as_homog())
        out = compose(gamma.inverse().as_homog(), inner)
        if scalar is None:
            return out
        s = ConjScalar.of(scalar)
        forms = [{e: (ConjScalar(c) * s).resolve() for e, c in f.items()} for f in out.forms]
        return HomogMap(phi.field, phi.n_vars, phi.degree, forms)
    D = [ConjScalar.of(s) for s in gamma]
    sc = ConjScalar.of(scalar) if scalar is not None else None
    formal = formal_conjugate_diag(phi, D, sc)
    forms = []
    for f in formal:
        try:
            forms.append({e: s.resolve() for e, s in f.items()})
        except UnresolvedRadical:
            raise UnresolvedRadical("fractional exponents do not cancel in the conjugate") from None
    return HomogMap(phi.field, phi.n_vars, phi.degree, forms)


def apply_diag(D: Sequence[ConjScalar], x: Sequence[RatFunc]) -> list[ConjScalar]:
    return [s * ConjScalar(c) if c else None for s, c in zip(D, x)]


def permutation_matrix(field: ConstantField, perm: Sequence[int]) -> LinearMap:
    n = len(perm)
    one, z = field.one(), field.zero()
    return LinearMap(field, [[one if perm[j] == i else z for j in range(n)] for i in range(n)])


def identity_map(field: ConstantField, n: int, degree: int = 1) -> HomogMap:
    forms = []
    for i in range(n):
        e = tuple(degree if j == i else 0 for j in range(n))
        forms.append({e: field.one()})
    return HomogMap(field, n, degree, forms)


def random_map(
    field: ConstantField,
    n_vars: int,
    degree: int,
    rng,
    max_deg: int = 2,
    density: float = 1.0,
    constant: bool = False,
) -> HomogMap:
    """A random map; coefficients are polynomials in t of degree <= ``max_deg``."""
    from .funcfield import random_ratfunc

    monos = monomials(n_vars, degree)
    while True:
        forms = []
        for _ in range(n_vars):
            f = {}
            for e in monos:
                if rng.random() <= density:
                    c = random_ratfunc(field, rng, 0 if constant else max_deg, 3, nonzero=False, polynomial=True)
                    if c:
                        f[e] = c
            forms.append(f)
        if all(forms):
            return HomogMap(field, n_vars, degree, forms)


def iter_exponents(n_vars: int, degree: int) -> Iterable[Exp]:
    return itertools.chain(monomials(n_vars, degree))


def preimages(phi: HomogMap, Q: Union[ProjPoint, Sequence[RatFunc]]):
    """K-rational preimages of Q for N = 1 with multiplicities, plus unsplit factors.

    Returns ``(roots, unsplit)`` where roots is a list of ``(ProjPoint, mult)``
    and unsplit lists irreducible factors of degree >= 2 over K.  The total
    multiplicity is always d.
    """
    from .arithdyn.preperiodic import preimages as _pre
    from .resultant import SingularMap, resultant

    if phi.n_vars != 2:
        raise HomogError("preimages are implemented for N = 1")
    if not resultant(phi).value:
        raise SingularMap()
    lift = Q.lift if isinstance(Q, ProjPoint) else list(Q)
    return _pre(phi, lift)
