"""Dense linear algebra over k(t), delegating to sympy's DomainMatrix."""

from __future__ import annotations

from typing import Sequence

from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError as NonInvertibleMatrixError

from .funcfield import ConstantField, RatFunc

Matrix = list[list[RatFunc]]


def _to_dm(field: ConstantField, rows: Sequence[Sequence[RatFunc]]) -> DomainMatrix:
    n, m = len(rows), len(rows[0]) if rows else 0
    dom = field.frac_field.to_domain()
    return DomainMatrix([[a._f for a in row] for row in rows], (n, m), dom)


def _from_dm(field: ConstantField, M: DomainMatrix) -> Matrix:
    return [[RatFunc(field, a) for a in row] for row in M.to_list()]


def identity(field: ConstantField, n: int) -> Matrix:
    one, zero = field.one(), field.zero()
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def det(field: ConstantField, rows: Sequence[Sequence[RatFunc]]) -> RatFunc:
    """Determinant over k(t).

    Large matrices are handled fraction-free: each row is scaled to clear
    denominators, the determinant is taken over k[t] (or over k when every
    entry is constant), and the row scalings are divided back out.
    """
    n = len(rows)
    if n == 0:
        return field.one()
    if n <= 4:
        return RatFunc(field, _to_dm(field, rows).det())
    R = field.ring
    if all(a.is_constant() for row in rows for a in row):
        dom = field.domain
        dm = DomainMatrix([[a.constant_value() for a in row] for row in rows], (n, n), dom)
        return field.const(dm.det())
    scale = R(1)
    poly_rows = []
    for row in rows:
        lcm = R(1)
        for a in row:
            if not a.is_zero():
                lcm = lcm.lcm(a.denominator)
        scale *= lcm
        poly_rows.append([(a.numerator * lcm).exquo(a.denominator) if a else R(0) for a in row])
    dm = DomainMatrix(poly_rows, (n, n), R.to_domain())
    return RatFunc.from_polys(field, dm.det(), scale)


def inverse(field: ConstantField, rows: Sequence[Sequence[RatFunc]]) -> Matrix:
    dm = _to_dm(field, rows)
    if dm.rank() < len(rows):
        raise ZeroDivisionError("singular matrix")
    return _from_dm(field, dm.inv())


def solve(field: ConstantField, rows: Sequence[Sequence[RatFunc]], b: Sequence[RatFunc]) -> list[RatFunc]:
    """The solution of ``A x = b`` for invertible A."""
    rhs = _to_dm(field, [[c] for c in b])
    try:
        x = _to_dm(field, rows).lu_solve(rhs)
    except NonInvertibleMatrixError:
        raise ZeroDivisionError("singular matrix") from None
    return [row[0] for row in _from_dm(field, x)]


def matmul(field: ConstantField, A: Sequence[Sequence[RatFunc]], B: Sequence[Sequence[RatFunc]]) -> Matrix:
    return _from_dm(field, _to_dm(field, A) * _to_dm(field, B))


def matvec(A: Sequence[Sequence[RatFunc]], x: Sequence[RatFunc]) -> list[RatFunc]:
    out = []
    for row in A:
        acc = None
        for a, b in zip(row, x):
            if a and b:
                acc = a * b if acc is None else acc + a * b
        out.append(acc if acc is not None else x[0].field.zero())
    return out


def rank(field: ConstantField, rows: Sequence[Sequence[RatFunc]]) -> int:
    return _to_dm(field, rows).rank()


def nullspace(field: ConstantField, rows: Sequence[Sequence[RatFunc]]) -> Matrix:
    """Basis (as row vectors) of the right kernel."""
    return _from_dm(field, _to_dm(field, rows).nullspace()) if rows else []


def charpoly(field: ConstantField, rows: Sequence[Sequence[RatFunc]]) -> list[RatFunc]:
    """Coefficients ``[1, c_1, ..., c_n]`` of ``det(T*I - A)``, highest degree first.

    Reduces to upper Hessenberg form by similarity, then runs the standard
    Hessenberg recurrence.  Works over any field, including F_p(t).
    """
    n = len(rows)
    H = [list(r) for r in rows]
    zero = field.zero()
    for k in range(1, n - 1):
        piv = next((i for i in range(k, n) if H[i][k - 1]), None)
        if piv is None:
            continue
        if piv != k:
            H[k], H[piv] = H[piv], H[k]
            for r in H:
                r[k], r[piv] = r[piv], r[k]
        p = H[k][k - 1]
        for i in range(k + 1, n):
            if not H[i][k - 1]:
                continue
            m = H[i][k - 1] / p
            H[i] = [a - m * b for a, b in zip(H[i], H[k])]
            for r in H:
                r[k] = r[k] + m * r[i]
    # polys[j] holds the char poly of the leading j x j block, lowest degree first
    polys: list[list[RatFunc]] = [[field.one()]]
    for j in range(1, n + 1):
        # (T - h_jj) * p_{j-1}
        prev = polys[j - 1]
        cur = [zero] + list(prev)
        hjj = H[j - 1][j - 1]
        for i, c in enumerate(prev):
            cur[i] = cur[i] - hjj * c
        prod = field.one()
        for i in range(j - 1, 0, -1):
            prod = prod * H[i][i - 1]
            if not prod:
                break
            coef = prod * H[i - 1][j - 1]
            if coef:
                for e, c in enumerate(polys[i - 1]):
                    cur[e] = cur[e] - coef * c
        polys.append(cur)
    return list(reversed(polys[n]))
