"""Preimages and preperiodic points, over K = k(t) for P^1 and exhaustively over F_q."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from ..funcfield import RatFunc
from ..homog import HomogMap, ProjPoint, evaluate, identity_map, iterate, proportional
from ..roots import Unsplit, binary_form_roots


class PreperiodicError(ValueError):
    pass


@dataclass(frozen=True)
class PreperSet:
    n: int
    m: int
    points: tuple
    unsplit: tuple[Unsplit, ...] = ()
    field_desc: str = "K"
    extra: dict = dc_field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.points)


def _same_point(x: Sequence[RatFunc], y: Sequence[RatFunc]) -> bool:
    return proportional(x, y) is not None


def orbit_relation(phi: HomogMap, x: Sequence[RatFunc], n: int, m: int) -> bool:
    """``phi^(n+m)(x) = phi^m(x)`` in projective space, by direct iteration."""
    y = list(x)
    for _ in range(m):
        y = evaluate(phi, y)
    z = y
    for _ in range(n):
        z = evaluate(phi, z)
    return _same_point(y, z)


def _cross_form(A: HomogMap, B: HomogMap) -> dict:
    """The binary form ``A0*B1 - A1*B0`` whose zeros are the points with ``A(x) ~ B(x)``."""
    from ..homog import form_add, form_mul, form_scale

    f = form_mul(A.forms[0], B.forms[1])
    g = form_mul(A.forms[1], B.forms[0])
    return form_add(f, form_scale(g, -A.field.one()))


def preimages(phi: HomogMap, Q: Sequence[RatFunc]):
    """K-rational points P with phi(P) = Q, for N = 1.  Returns ``(roots, unsplit)``."""
    if phi.n_vars != 2:
        raise PreperiodicError("preimages are implemented for P^1 only")
    from ..homog import form_add, form_scale

    q0, q1 = Q
    form = form_add(form_scale(phi.forms[0], q1), form_scale(phi.forms[1], -q0))
    form = {e: c for e, c in form.items() if c}
    if not form:
        raise PreperiodicError("degenerate preimage equation")
    return binary_form_roots(form, phi.field)


def preperiodic_points(phi: HomogMap, n: int, m: int = 0, search_field=None) -> PreperSet:
    """Points with ``phi^(n+m)(P) = phi^m(P)``.

    ``search_field=None`` works over K (N = 1 only); ``search_field=(p, e)``
    enumerates P^N(F_{p^e}) for maps with constant coefficients in F_p.
    """
    if n < 1 or m < 0:
        raise PreperiodicError("need n >= 1 and m >= 0")
    if search_field is not None:
        return _preperiodic_finite(phi, n, m, search_field)
    if phi.n_vars != 2:
        raise PreperiodicError("over K only P^1 is supported")
    A = iterate(phi, n + m)
    B = iterate(phi, m) if m else identity_map(phi.field, 2)
    form = _cross_form(A, B)
    if not form:
        raise PreperiodicError("every point satisfies the relation (identity iterate)")
    roots, unsplit = binary_form_roots(form, phi.field)
    points = []
    for P, _ in roots:
        if not orbit_relation(phi, P.lift, n, m):
            raise PreperiodicError(f"root {P} fails direct verification")
        points.append(P)
    points.sort(key=lambda P: str(P))
    return PreperSet(n, m, tuple(points), tuple(unsplit), str(phi.field) + "(t)")


# ---------------------------------------------------------------------------
# finite fields


def map_codes(phi: HomogMap, F) -> list[dict]:
    """Coefficient codes of a map with constant coefficients over F_p."""
    if not phi.field.is_finite or not phi.is_constant():
        raise PreperiodicError("finite-field enumeration needs a map with constant coefficients in F_p")
    if phi.field.p != F.p:
        raise PreperiodicError("characteristic mismatch")
    return [{e: int(phi.field.const_key(c.constant_value())) for e, c in f.items()} for f in phi.forms]


def finite_map_action(F, forms, pts: np.ndarray) -> np.ndarray:
    """Images of the rows of ``pts`` (normalised); raises when a point maps to zero."""
    vals = np.stack([F.eval_form(f, pts) for f in forms], axis=1)
    if not vals.any(axis=1).all():
        raise PreperiodicError("the reduced map has a common zero over the search field")
    return F.normalize_rows(vals)


def point_index(F, pts: np.ndarray):
    from ..finite import point_keys

    keys = point_keys(F, pts)
    return {int(k): i for i, k in enumerate(keys)}


def finite_successor(F, forms, pts: np.ndarray) -> np.ndarray:
    """``succ[i]`` = index of the image of point i."""
    from ..finite import point_keys

    index = point_index(F, pts)
    imgs = finite_map_action(F, forms, pts)
    return np.array([index[int(k)] for k in point_keys(F, imgs)], dtype=np.int64)


def _preperiodic_finite(phi: HomogMap, n: int, m: int, search_field) -> PreperSet:
    from ..finite import get_field, projective_points_array

    p, e = search_field
    if phi.n_vars > 3:
        raise PreperiodicError("exhaustive search supports N <= 2")
    F = get_field(p, e)
    forms = map_codes(phi, F)
    pts = projective_points_array(F, phi.n_vars)
    succ = finite_successor(F, forms, pts)
    idx = np.arange(len(pts))
    for _ in range(m):
        idx = succ[idx]
    a = idx.copy()
    for _ in range(n):
        idx = succ[idx]
    hits = np.nonzero(a == idx)[0]
    points = tuple(tuple(int(c) for c in pts[i]) for i in hits)
    return PreperSet(n, m, points, (), f"F_{p}^{e}", {"succ": succ})


def periodic_count(phi: HomogMap, n: int, search_field) -> int:
    """``|Per_n|`` over F_q: points with ``phi^n(P) = P``."""
    return len(preperiodic_points(phi, n, 0, search_field))


def format_finite_point(pt: Sequence[int], F=None) -> str:
    if len(pt) == 2:
        return "inf" if pt[1] == 0 else str(pt[0])
    return "(" + ":".join(str(c) for c in pt) + ")"


def format_point(P) -> str:
    if isinstance(P, ProjPoint):
        if len(P.lift) == 2:
            return "inf" if not P.lift[1] else str(P.lift[0])
        return str(P)
    return format_finite_point(P)
