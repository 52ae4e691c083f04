"""Stabilizers of endomorphisms of P^N over a finite field, by exhaustive search over PGL."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..finite import (
    FiniteFieldError,
    GF,
    apply_matrix,
    compose_linear,
    get_field,
    enumerate_pgl,
    linear_after,
    matmul_mod,
    normalize_matrix,
    point_keys,
    projective_points_array,
    proportional_forms,
)
from ..homog import HomogMap
from .preperiodic import map_codes, preperiodic_points

Matrix = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class StabilizerReport:
    q: int
    elements: tuple[Matrix, ...]
    searched: int
    is_group: bool
    injective: bool
    sets: tuple[tuple[int, int, int], ...]  # (n, m, size) of the PrePer sets used

    def __len__(self) -> int:
        return len(self.elements)


def commutes(F: GF, forms, mat: Matrix) -> bool:
    """``gamma^-1 phi gamma = phi`` as maps, i.e. ``phi o gamma`` proportional to ``gamma o phi``."""
    return proportional_forms(F, compose_linear(F, forms, mat), linear_after(F, mat, forms))


def _inverse_mod(F: GF, mat: Matrix) -> Matrix:
    """Inverse in PGL by search over the (small) group generated by mat."""
    cur = normalize_matrix(F, mat)
    ident = normalize_matrix(F, [[int(i == j) for j in range(len(mat))] for i in range(len(mat))])
    prev = ident
    for _ in range(F.q ** (len(mat) ** 2)):
        if cur == ident:
            return prev
        prev = cur
        cur = matmul_mod(F, cur, mat)
    raise FiniteFieldError("element of infinite order in a finite group")


def is_group(F: GF, elems) -> bool:
    s = set(elems)
    n = len(next(iter(s)))
    ident = normalize_matrix(F, [[int(i == j) for j in range(n)] for i in range(n)])
    if ident not in s:
        return False
    for a in s:
        if _inverse_mod(F, a) not in s:
            return False
        for b in s:
            if matmul_mod(F, a, b) not in s:
                return False
    return True


def permutation_images(F: GF, elems, pts: np.ndarray) -> list[tuple[int, ...]]:
    """For each element, the permutation it induces on ``pts`` (as indices); raises if a set is not preserved."""
    keys = point_keys(F, pts)
    index = {int(k): i for i, k in enumerate(keys)}
    out = []
    for g in elems:
        img = point_keys(F, apply_matrix(F, g, pts))
        try:
            out.append(tuple(index[int(k)] for k in img))
        except KeyError:
            raise FiniteFieldError("a stabilizer element does not preserve a preperiodic set") from None
    return out


def _extra_sets(size: int):
    """(n, m) pairs by increasing n + m; every point of a set of this size is in one of them."""
    for total in range(2, 2 * size + 1):
        for n in range(1, min(total, size) + 1):
            m = total - n
            if m <= size:
                yield n, m


def stabilizer(phi: HomogMap, extension: int = 1, budget: int = 500_000, preper=((1, 0), (2, 0), (1, 1))) -> StabilizerReport:
    """All gamma in PGL_{N+1}(F_q) with ``gamma^-1 phi gamma = phi``.

    The induced permutations of PrePer_{n,m} sets are used to check that the
    stabilizer embeds in the product of permutation groups.  The listed sets
    come first; while they are too small to separate the elements, larger
    (n, m) are added.  Every point of P^N(F_q) is preperiodic and PGL acts
    faithfully on them, so this stops.
    """
    if phi.n_vars > 3:
        raise FiniteFieldError("stabilizer search supports N <= 2")
    p = phi.field.p if phi.field.is_finite else None
    if p is None:
        raise FiniteFieldError("stabilizers are computed over finite fields only")
    F = get_field(p, extension)
    forms = map_codes(phi, F)
    elems = []
    count = 0
    for mat in enumerate_pgl(F, phi.n_vars, budget):
        count += 1
        if commutes(F, forms, mat):
            elems.append(mat)
    group = is_group(F, elems)
    all_pts = projective_points_array(F, phi.n_vars)
    perms = [() for _ in elems]
    sizes = []
    covered: set = set()
    pairs = itertools.chain(preper, (nm for nm in _extra_sets(len(all_pts)) if nm not in preper))
    for k, (n, m) in enumerate(pairs):
        if k >= len(preper) and (len(set(perms)) == len(perms) or len(covered) == len(all_pts)):
            break
        S = set(preperiodic_points(phi, n, m, (p, extension)).points)
        if k >= len(preper) and S <= covered:
            continue
        covered |= S
        idx = [i for i in range(len(all_pts)) if tuple(int(c) for c in all_pts[i]) in S]
        sizes.append((n, m, len(idx)))
        if idx:
            for j, pi in enumerate(permutation_images(F, elems, all_pts[idx])):
                perms[j] = perms[j] + (pi,)
    injective = len(set(perms)) == len(perms)
    return StabilizerReport(F.q, tuple(elems), count, group, injective, tuple(sizes))


def format_element(mat: Matrix) -> str:
    if len(mat) == 2:
        (a, b), (c, d) = mat
        num = _lin(a, b)
        den = _lin(c, d)
        if den == "1":
            return f"z -> {num}"
        wrap = lambda s: s if s.isalnum() else f"({s})"  # noqa: E731
        return f"z -> {wrap(num)}/{wrap(den)}"
    return str([list(r) for r in mat])


def _lin(a: int, b: int) -> str:
    parts = []
    if a:
        parts.append("z" if a == 1 else f"{a}*z")
    if b or not parts:
        parts.append(str(b))
    return " + ".join(parts)
