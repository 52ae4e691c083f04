"""Small finite fields F_{p^m} with table arithmetic, and brute force over them.

Elements are integer codes ``sum c_i p^i`` for the coefficient vector of a
residue class modulo a fixed primitive polynomial, so codes below p are the
prime-field constants.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

Exp = tuple[int, ...]
GFForm = dict[Exp, int]


class FiniteFieldError(ValueError):
    pass


def _digits(code: int, p: int, m: int) -> list[int]:
    out = []
    for _ in range(m):
        code, r = divmod(code, p)
        out.append(r)
    return out


def _code(digits: Sequence[int], p: int) -> int:
    return sum(c * p**i for i, c in enumerate(digits))


def _find_primitive(p: int, m: int) -> tuple[list[int], list[int]]:
    """A monic degree-m polynomial (low-first coefficients) with x primitive, and the power table."""
    q = p**m
    if m == 1:
        for g in range(1, p):
            seen, x = [], 1
            for _ in range(p - 1):
                seen.append(x)
                x = x * g % p
            if len(set(seen)) == p - 1:
                return [-g % p, 1], seen
    for tail in itertools.product(range(p), repeat=m):
        if tail[0] == 0:
            continue
        poly = list(tail) + [1]
        powers = []
        cur = [1] + [0] * (m - 1)
        for _ in range(q - 1):
            powers.append(_code(cur, p))
            # multiply by x and reduce
            top = cur[-1]
            cur = [0] + cur[:-1]
            cur = [(c - top * poly[i]) % p for i, c in enumerate(cur)]
        if len(set(powers)) == q - 1:
            return poly, powers
    raise FiniteFieldError(f"no primitive polynomial of degree {m} over F_{p}")


class GF:
    """F_{p^m} with exp/log and addition tables."""

    def __init__(self, p: int, m: int = 1):
        if m < 1:
            raise FiniteFieldError("extension degree must be positive")
        self.p, self.m, self.q = p, m, p**m
        q = self.q
        if q > 5000:
            raise FiniteFieldError(f"F_{p}^{m} is too large for table arithmetic")
        self.modulus, powers = _find_primitive(p, m)
        self.exp = np.array(powers + powers, dtype=np.int64)
        self.log = np.zeros(q, dtype=np.int64)
        for i, c in enumerate(powers):
            self.log[c] = i
        digits = np.array([_digits(c, p, m) for c in range(q)], dtype=np.int64)
        weights = p ** np.arange(m, dtype=np.int64)
        self.add_table = (((digits[:, None, :] + digits[None, :, :]) % p) * weights).sum(axis=2)
        self.neg_table = (((-digits) % p) * weights).sum(axis=1)

    def __repr__(self) -> str:
        return f"GF({self.p}^{self.m})"

    def elements(self) -> range:
        return range(self.q)

    # scalar and vectorised operations share code: numpy handles both
    def add(self, a, b):
        return self.add_table[a, b]

    def neg(self, a):
        return self.neg_table[a]

    def sub(self, a, b):
        return self.add_table[a, self.neg_table[b]]

    def mul(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        out = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def pow(self, a, k: int):
        a = np.asarray(a)
        if k == 0:
            return np.ones_like(a)
        out = self.exp[(self.log[a] * k) % (self.q - 1)]
        return np.where(a == 0, 0, out)

    def inv(self, a):
        a = np.asarray(a)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero in a finite field")
        return self.exp[(self.q - 1 - self.log[a]) % (self.q - 1)]

    def from_prime(self, c: int) -> int:
        return int(c) % self.p

    def eval_form(self, form: Mapping[Exp, int], pts: np.ndarray) -> np.ndarray:
        """Evaluate a form (coefficient codes) at every row of ``pts``."""
        acc = np.zeros(len(pts), dtype=np.int64)
        for e, c in form.items():
            term = np.full(len(pts), c, dtype=np.int64)
            for i, k in enumerate(e):
                if k:
                    term = self.mul(term, self.pow(pts[:, i], k))
            acc = self.add(acc, term)
        return acc

    def normalize_rows(self, vecs: np.ndarray) -> np.ndarray:
        """Scale each row so its last nonzero entry is 1; zero rows raise."""
        nz = vecs != 0
        if not nz.any(axis=1).all():
            raise FiniteFieldError("zero vector has no projective class")
        n = vecs.shape[1]
        last = n - 1 - np.argmax(nz[:, ::-1], axis=1)
        piv = vecs[np.arange(len(vecs)), last]
        return self.mul(vecs, self.inv(piv)[:, None])


@lru_cache(maxsize=None)
def get_field(p: int, m: int = 1) -> GF:
    return GF(p, m)


def projective_points_array(F: GF, n_vars: int) -> np.ndarray:
    """All points of P^{n_vars-1}(F), normalised with last nonzero coordinate 1.

    Ordered by the position of that coordinate, then lexicographically; for
    P^1 this lists (z:1) for z = 0..q-1 followed by (1:0).
    """
    q = F.q
    blocks = []
    for j in range(n_vars - 1, -1, -1):
        if j:
            head = np.array(list(itertools.product(range(q), repeat=j)), dtype=np.int64)
        else:
            head = np.zeros((1, 0), dtype=np.int64)
        block = np.zeros((len(head), n_vars), dtype=np.int64)
        block[:, :j] = head
        block[:, j] = 1
        blocks.append(block)
    return np.concatenate(blocks)


def point_keys(F: GF, pts: np.ndarray) -> np.ndarray:
    w = F.q ** np.arange(pts.shape[1], dtype=np.int64)
    return (pts * w).sum(axis=1)


# ---------------------------------------------------------------------------
# forms over F_q as python dicts


def form_mul(F: GF, f: GFForm, g: GFForm) -> GFForm:
    out: GFForm = {}
    for e1, a in f.items():
        for e2, b in g.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            out[e] = int(F.add(out.get(e, 0), F.mul(a, b)))
    return {e: c for e, c in out.items() if c}


def form_add(F: GF, f: GFForm, g: GFForm) -> GFForm:
    out = dict(f)
    for e, c in g.items():
        out[e] = int(F.add(out.get(e, 0), c))
    return {e: c for e, c in out.items() if c}


def form_scale(F: GF, f: GFForm, c: int) -> GFForm:
    return {e: int(F.mul(a, c)) for e, a in f.items() if c}


def compose_linear(F: GF, forms: Sequence[GFForm], mat: Sequence[Sequence[int]]) -> list[GFForm]:
    """Forms of ``phi o gamma`` where gamma is the matrix ``mat``."""
    n = len(mat)
    lin = [{tuple(int(k == j) for k in range(n)): int(mat[i][j]) for j in range(n) if mat[i][j]} for i in range(n)]
    cache: dict[tuple[int, int], GFForm] = {}

    def power(i: int, k: int) -> GFForm:
        if k == 0:
            return {tuple([0] * n): 1}
        if (i, k) not in cache:
            cache[(i, k)] = form_mul(F, power(i, k - 1), lin[i])
        return cache[(i, k)]

    out = []
    for f in forms:
        acc: GFForm = {}
        for e, c in f.items():
            term: GFForm = {tuple([0] * n): c}
            for i, k in enumerate(e):
                if k:
                    term = form_mul(F, term, power(i, k))
            acc = form_add(F, acc, term)
        out.append(acc)
    return out


def linear_after(F: GF, mat: Sequence[Sequence[int]], forms: Sequence[GFForm]) -> list[GFForm]:
    """Forms of ``gamma o phi``."""
    out = []
    for row in mat:
        acc: GFForm = {}
        for a, f in zip(row, forms):
            if a:
                acc = form_add(F, acc, form_scale(F, f, int(a)))
        out.append(acc)
    return out


def proportional_forms(F: GF, f: Sequence[GFForm], g: Sequence[GFForm]) -> bool:
    lam = None
    for a, b in zip(f, g):
        if set(a) != set(b):
            return False
        for e, c in a.items():
            r = int(F.mul(b[e], F.inv(c)))
            if lam is None:
                lam = r
            elif r != lam:
                return False
    return lam is not None


# ---------------------------------------------------------------------------
# PGL enumeration


def _det_mod(F: GF, mat: Sequence[Sequence[int]]) -> int:
    n = len(mat)
    if n == 1:
        return int(mat[0][0])
    total = 0
    for j in range(n):
        if mat[0][j]:
            minor = [r[:j] + r[j + 1 :] for r in mat[1:]]
            term = int(F.mul(mat[0][j], _det_mod(F, minor)))
            total = int(F.add(total, term if j % 2 == 0 else F.neg(term)))
    return total


def pgl_size(q: int, n: int) -> int:
    """|PGL_n(F_q)|."""
    order = 1
    for i in range(n):
        order *= q**n - q**i
    return order // (q - 1)


def enumerate_pgl(F: GF, n: int, budget: int = 500_000) -> Iterable[tuple[tuple[int, ...], ...]]:
    """Matrices representing PGL_n(F), scaled so the first nonzero entry (row-major) is 1."""
    size = pgl_size(F.q, n)
    if size > budget:
        raise FiniteFieldError(f"|PGL_{n}(F_{F.q})| = {size} exceeds the budget {budget}")
    for flat in itertools.product(range(F.q), repeat=n * n):
        first = next((c for c in flat if c), 0)
        if first != 1:
            continue
        mat = tuple(tuple(flat[i * n : (i + 1) * n]) for i in range(n))
        if _det_mod(F, [list(r) for r in mat]):
            yield mat


def matmul_mod(F: GF, A, B) -> tuple[tuple[int, ...], ...]:
    n = len(A)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = 0
            for k in range(n):
                acc = int(F.add(acc, F.mul(A[i][k], B[k][j])))
            row.append(acc)
        out.append(row)
    return normalize_matrix(F, out)


def normalize_matrix(F: GF, mat) -> tuple[tuple[int, ...], ...]:
    flat = [int(c) for r in mat for c in r]
    first = next(c for c in flat if c)
    inv = int(F.inv(first))
    n = len(mat)
    flat = [int(F.mul(c, inv)) for c in flat]
    return tuple(tuple(flat[i * n : (i + 1) * n]) for i in range(n))


def apply_matrix(F: GF, mat, pts: np.ndarray) -> np.ndarray:
    n = len(mat)
    out = np.zeros_like(pts)
    for i in range(n):
        acc = np.zeros(len(pts), dtype=np.int64)
        for j in range(n):
            if mat[i][j]:
                acc = F.add(acc, F.mul(mat[i][j], pts[:, j]))
        out[:, i] = acc
    return F.normalize_rows(out)
