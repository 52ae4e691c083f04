"""Resultants of N+1 forms of a common degree, and their transformation laws.

N = 1 uses the Sylvester matrix, N >= 2 Macaulay's quotient of two
determinants.  Both are normalised so that ``Res(x0^d, ..., xN^d) = 1``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import sympy

from . import linalg
from .funcfield import ConstantField, Place, RatFunc, ord
from .homog import Exp, HomogMap, LinearMap, compose, monomials, normalize_at, random_map, scale


class ResultantError(ValueError):
    pass


class SingularMap(ResultantError):
    def __init__(self, what: str = "map") -> None:
        super().__init__(f"{what} is singular (resultant 0)")


@dataclass(frozen=True)
class ResultantValue:
    value: RatFunc
    degenerate: bool = False

    def __bool__(self) -> bool:
        return bool(self.value)

    def __str__(self) -> str:
        return str(self.value)


@lru_cache(maxsize=None)
def _macaulay_layout(n_vars: int, d: int):
    """Monomial basis of degree D, the row assignment, and the non-reduced index set."""
    D = n_vars * (d - 1) + 1
    basis = monomials(n_vars, D)
    index = {e: k for k, e in enumerate(basis)}
    rows = []
    extraneous = []
    for k, e in enumerate(basis):
        big = [i for i in range(n_vars) if e[i] >= d]
        i = big[0]
        shift = tuple(a - (d if j == i else 0) for j, a in enumerate(e))
        rows.append((i, shift))
        if len(big) >= 2:
            extraneous.append(k)
    return basis, index, rows, extraneous


def _macaulay_matrices(forms, n_vars: int, d: int, zero):
    basis, index, rows, extraneous = _macaulay_layout(n_vars, d)
    n = len(basis)
    M = [[zero] * n for _ in range(n)]
    for r, (i, shift) in enumerate(rows):
        for e, c in forms[i].items():
            col = index[tuple(a + b for a, b in zip(e, shift))]
            M[r][col] = c
    sub = [[M[r][c] for c in extraneous] for r in extraneous]
    return M, sub


def _raw_resultant(phi: HomogMap) -> RatFunc | None:
    """det(M)/det(M'), or None when the extraneous minor vanishes."""
    field = phi.field
    n, d = phi.n_vars, phi.degree
    if d == 1:
        mat = [[f.get(tuple(int(j == k) for j in range(n)), field.zero()) for k in range(n)] for f in phi.forms]
        return linalg.det(field, mat)
    M, sub = _macaulay_matrices(phi.forms, n, d, field.zero())
    den = linalg.det(field, sub)
    if not den:
        return None
    num = linalg.det(field, M)
    return num / den


def _constant_change(field: ConstantField, n: int, rng: random.Random) -> LinearMap:
    while True:
        mat = [[field.const(rng.randint(-3, 3)) for _ in range(n)] for _ in range(n)]
        g = LinearMap(field, mat)
        if g.det():
            return g


def resultant(phi: HomogMap) -> ResultantValue:
    """Res(phi); zero exactly when the forms have a common nontrivial zero over the algebraic closure."""
    if "res" in phi._cache:
        return phi._cache["res"]
    if phi.is_degenerate():
        out = ResultantValue(phi.field.zero(), degenerate=True)
        phi._cache["res"] = out
        return out
    value = _raw_resultant(phi)
    if value is None:
        # the extraneous minor vanished: move to generic coordinates, where
        # Res(phi o A) = det(A)^(d^(N+1)) Res(phi)
        rng = random.Random(0)
        e = phi.degree**phi.n_vars
        for _ in range(50):
            A = _constant_change(phi.field, phi.n_vars, rng)
            value = _raw_resultant(compose(phi, A.as_homog()))
            if value is not None:
                value = value / A.det() ** e
                break
        else:
            raise ResultantError("no generic coordinate change found (constant field too small?)")
    out = ResultantValue(value)
    phi._cache["res"] = out
    return out


def res_ord(phi: HomogMap, v: Place) -> int:
    """ord_v of the resultant of the model of ``phi`` normalized at ``v``."""
    r = resultant(phi).value
    if not r:
        raise SingularMap()
    _, m = normalize_at(phi, v)
    return ord(r, v) - m * phi.n_vars * phi.degree ** (phi.n_vars - 1)


def scaling_exponent(N: int, d: int) -> int:
    return (N + 1) * d**N


SCALING_GRID = {(1, 1), (1, 2), (1, 3), (2, 2)}


def scaling_exponent_check(N: int, d: int, trials: int = 3, seed: int = 0, field: ConstantField | None = None) -> bool:
    """Check ``Res(c*phi) = c^((N+1) d^N) Res(phi)`` on random maps and scalars."""
    if (N, d) not in SCALING_GRID:
        raise ResultantError(f"unsupported grid point (N, d) = ({N}, {d})")
    from .funcfield import random_ratfunc

    field = field or ConstantField("Q")
    rng = random.Random(seed)
    e = scaling_exponent(N, d)
    for _ in range(trials):
        phi = random_map(field, N + 1, d, rng, max_deg=1)
        c = random_ratfunc(field, rng, 2)
        if resultant(scale(phi, c)).value != c**e * resultant(phi).value:
            return False
    return True


# ---------------------------------------------------------------------------
# composition law


@dataclass(frozen=True)
class CompositionExponents:
    N: int
    d: int
    d_prime: int
    a: int
    b: int
    sign: int
    pairs: int


def _int_resultant(phi: HomogMap) -> int:
    r = resultant(phi).value
    if not r.is_constant():
        raise ResultantError("expected a constant resultant")
    q = Fraction(str(r.constant_value()))
    if q.denominator != 1:
        raise ResultantError("expected an integral resultant")
    return q.numerator


def _exclusive_exponent(target: int, own: int, other: int) -> int | None:
    """v_p(target)/v_p(own) for a prime p dividing ``own`` but not ``other``."""
    for p, e in sympy.factorint(abs(own)).items():
        if other % p:
            k = 0
            x = target
            while x % p == 0:
                x //= p
                k += 1
            if k % e:
                raise ResultantError("non-integral composition exponent")
            return k // e
    return None


def fit_composition_exponents(N: int, d: int, d_prime: int, pairs: int = 5, seed: int = 0) -> CompositionExponents:
    """Fit ``Res(phi o phi') = s * Res(phi)^a * Res(phi')^b`` on random integral maps.

    Each pair must have resultants with a prime factor not shared by the
    other, which pins down a and b; every pair is then checked exactly.
    """
    if N < 1 or d < 1 or d_prime < 1:
        raise ResultantError("need N, d, d' >= 1")
    field = ConstantField("Q")
    rng = random.Random(seed)
    found: set[tuple[int, int, int]] = set()
    used = 0
    attempts = 0
    while used < pairs:
        attempts += 1
        if attempts > 200 * pairs:
            raise ResultantError("could not find enough usable random pairs")
        phi = random_map(field, N + 1, d, rng, constant=True)
        psi = random_map(field, N + 1, d_prime, rng, constant=True)
        r1, r2 = _int_resultant(phi), _int_resultant(psi)
        if abs(r1) < 2 or abs(r2) < 2:
            continue
        rc = _int_resultant(compose(phi, psi))
        a = _exclusive_exponent(rc, r1, r2)
        b = _exclusive_exponent(rc, r2, r1)
        if a is None or b is None:
            continue
        base = r1**a * r2**b
        if rc not in (base, -base):
            raise ResultantError(f"composition law fails for exponents ({a}, {b})")
        found.add((a, b, 1 if rc == base else -1))
        used += 1
    if len(found) != 1:
        raise ResultantError(f"inconsistent composition exponents {sorted(found)}")
    a, b, s = found.pop()
    return CompositionExponents(N, d, d_prime, a, b, s, used)


@dataclass(frozen=True)
class ConjugationConstants:
    """``Res(G^-1 phi G) = det(G)^A Res(phi)^B`` and ``d_inf = |Res|^C``, C = -B/A."""

    N: int
    d: int
    A: int
    B: int

    @property
    def C(self) -> Fraction:
        return Fraction(-self.B, self.A)


def conjugation_constants(N: int, d: int, seed: int = 0) -> ConjugationConstants:
    """Derive A, B from the fitted laws for ``phi o G`` and ``G^-1 o (phi o G)``."""
    right = fit_composition_exponents(N, d, 1, pairs=3, seed=seed)
    left = fit_composition_exponents(N, 1, d, pairs=3, seed=seed + 1)
    # Res(G^-1 o (phi o G)) = det(G)^(-left.a) * (Res(phi)^right.a det(G)^right.b)^left.b
    A = right.b * left.b - left.a
    B = right.a * left.b
    return ConjugationConstants(N, d, A, B)


# ---------------------------------------------------------------------------
# brute force common roots


def common_root_oracle(phi: HomogMap, m: int, budget: int = 10**7):
    """Search P^N(F_{p^m}) for a common zero of the forms of ``phi``.

    Coefficients must be constants in F_p.  Returns a root as a tuple of
    field-element codes (see :class:`ffdyn.finite.GF`) or None.
    """
    from .finite import GF, projective_points_array

    field = phi.field
    if field.kind != "Fp":
        raise ResultantError("the common-root search needs a finite constant field")
    n = phi.n_vars
    if phi.is_degenerate():
        return tuple([1] + [0] * (n - 1))
    for f in phi.forms:
        for c in f.values():
            if not c.is_constant():
                raise ResultantError("the common-root search needs constant coefficients")
    q = field.p**m
    if q**n > budget:
        raise ResultantError(f"search space {q}^{n} exceeds the budget {budget}")
    F = GF(field.p, m)
    pts = projective_points_array(F, n)
    mask = None
    for f in phi.forms:
        vals = F.eval_form({e: int(field.const_key(c.constant_value())) for e, c in f.items()}, pts)
        z = vals == 0
        mask = z if mask is None else mask & z
    hits = mask.nonzero()[0]
    if len(hits):
        return tuple(int(a) for a in pts[hits[0]])
    return None


def macaulay_size(N: int, d: int) -> int:
    return comb(N + 1 + (N + 1) * (d - 1), N)
