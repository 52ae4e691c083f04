"""Isotriviality of automorphisms of P^N over k(t).

A linear map is isotrivial iff after scaling to determinant 1 its
eigenvalues are constants.  Taking the (N+1)-th root of det is avoided by
testing the root-free invariants ``e_i^(N+1) / D^i``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .. import linalg
from ..funcfield import RatFunc
from ..homog import ConjScalar, HomogError, LinearMap


@dataclass(frozen=True)
class CharPolyInvariants:
    D: RatFunc
    e: tuple[RatFunc, ...]
    normalized: tuple[RatFunc, ...]

    @property
    def constant(self) -> bool:
        return all(x.is_constant() for x in self.normalized)


def charpoly_invariants(M: LinearMap) -> CharPolyInvariants:
    """``det(T I - M) = T^n - e_1 T^(n-1) + ... + (-1)^n e_n`` with ``e_n = D``."""
    field = M.field
    D = M.det()
    if not D:
        raise HomogError("singular linear map")
    cp = linalg.charpoly(field, M.matrix)
    n = M.size
    e = tuple(c if i % 2 == 0 else -c for i, c in enumerate(cp))[1:]
    normalized = tuple(e[i - 1] ** n / D**i for i in range(1, n + 1))
    return CharPolyInvariants(D, e, normalized)


@dataclass(frozen=True)
class LinearWitness:
    """``scalar * (basis * diag)^-1 M (basis * diag)`` equals the constant matrix ``model``."""

    basis: LinearMap
    diag: tuple[ConjScalar, ...]
    scalar: ConjScalar
    model: tuple[tuple[RatFunc, ...], ...]

    def gamma_entries(self) -> list[list[ConjScalar | None]]:
        """Entries of ``basis * diag`` as formal scalars (None for zero)."""
        return [
            [ConjScalar(c) * self.diag[j] if c else None for j, c in enumerate(row)]
            for row in self.basis.matrix
        ]


def _conj_formal(M: LinearMap, W: LinearMap, diag, scalar) -> list[list[RatFunc]]:
    """Entries of ``scalar * diag^-1 W^-1 M W diag``, which must lie in K."""
    C = W.inverse() @ M @ W
    n = M.size
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            c = C.matrix[i][j]
            if not c:
                row.append(c)
                continue
            s = ConjScalar(c) * diag[j] / diag[i] * scalar
            row.append(s.resolve())
        out.append(row)
    return out


def _krylov(M: LinearMap, w):
    cols = [list(w)]
    for _ in range(M.size - 1):
        cols.append(M.apply(cols[-1]))
    return LinearMap(M.field, [[cols[j][i] for j in range(M.size)] for i in range(M.size)])


def _cyclic_basis(M: LinearMap, tries: int = 40) -> LinearMap | None:
    field, n = M.field, M.size
    one, zero = field.one(), field.zero()
    span = range(-2, 3) if not field.is_finite else range(field.p)
    count = 0
    for coeffs in itertools.product(span, repeat=n):
        if not any(coeffs):
            continue
        count += 1
        if count > tries:
            break
        w = [field.const(c) for c in coeffs]
        W = _krylov(M, w)
        if W.det():
            return W
    # standard basis vectors and their sums as a last resort
    for r in range(1, n + 1):
        for sub in itertools.combinations(range(n), r):
            w = [one if i in sub else zero for i in range(n)]
            W = _krylov(M, w)
            if W.det():
                return W
    return None


def linear_witness(M: LinearMap, inv: CharPolyInvariants) -> LinearWitness | None:
    """Conjugate a cyclic (or scalar) matrix with constant invariants to a constant matrix.

    With c a formal (N+1)-th root of det, the Krylov basis brings M to the
    companion matrix of its characteristic polynomial, and
    ``diag(1, c^-1, ..., c^-N)`` followed by the scalar 1/c makes every
    entry a constant.
    """
    n = M.size
    field = M.field
    c = ConjScalar.root(inv.D, n)
    scalar = c.inverse()
    W = _cyclic_basis(M)
    if W is not None:
        diag = tuple(c ** (-k) for k in range(n))
    elif all((M.matrix[i][j] == 0) == (i != j) and M.matrix[i][i] == M.matrix[0][0] for i in range(n) for j in range(n)):
        W = LinearMap.identity(field, n)
        diag = tuple(ConjScalar(field.one()) for _ in range(n))
    else:
        return None
    try:
        model = _conj_formal(M, W, diag, scalar)
    except HomogError:
        return None
    if not all(not x or x.is_constant() for row in model for x in row):
        return None
    return LinearWitness(W, diag, scalar, tuple(tuple(r) for r in model))


def recheck_linear_witness(M: LinearMap, w: LinearWitness) -> bool:
    try:
        model = _conj_formal(M, w.basis, w.diag, w.scalar)
    except HomogError:
        return False
    return [list(r) for r in w.model] == model and all(not x or x.is_constant() for r in model for x in r)


def linear_support_exponents(w: LinearWitness, v) -> list[list[Fraction | None]]:
    return [[None if s is None else s.ord(v) for s in row] for row in w.gamma_entries()]
