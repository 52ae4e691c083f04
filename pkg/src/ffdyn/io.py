"""JSON formats for maps, points, places and formal scalars.

Every number is written as an exact string in the funcfield grammar so that
files round-trip without loss.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .funcfield import ConstantField, Place, RatFunc, parse_rat_func
from .homog import ConjScalar, HomogError, HomogMap, LinearMap


class FormatError(ValueError):
    pass


def _load(source) -> Any:
    if isinstance(source, (dict, list)):
        return source
    try:
        return json.loads(Path(source).read_text())
    except OSError as exc:
        raise FormatError(f"cannot read {source}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{source}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def field_from_json(data) -> ConstantField:
    try:
        return ConstantField.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad field header {data!r}: {exc}") from None


# ---------------------------------------------------------------------------
# maps


def map_to_json(phi: HomogMap) -> dict:
    forms = []
    for f in phi.forms:
        terms = sorted(f.items(), key=lambda kv: tuple(-a for a in kv[0]))
        forms.append([{"exp": list(e), "coeff": str(c)} for e, c in terms if c])
    return {"field": phi.field.to_json(), "n_vars": phi.n_vars, "degree": phi.degree, "forms": forms}


def map_from_json(data) -> HomogMap:
    data = _load(data)
    if not isinstance(data, dict):
        raise FormatError("a map file must hold a JSON object")
    missing = [k for k in ("field", "n_vars", "degree", "forms") if k not in data]
    if missing:
        raise FormatError(f"map file is missing {', '.join(missing)}")
    field = field_from_json(data["field"])
    n, d = int(data["n_vars"]), int(data["degree"])
    if len(data["forms"]) != n:
        raise FormatError(f"expected {n} forms, found {len(data['forms'])}")
    forms = []
    for i, terms in enumerate(data["forms"]):
        f: dict = {}
        for term in terms:
            e = tuple(int(a) for a in term["exp"])
            if len(e) != n or sum(e) != d or min(e) < 0:
                raise FormatError(f"form {i}: exponent {list(e)} is not a degree-{d} monomial in {n} variables")
            c = parse_rat_func(str(term["coeff"]), field)
            f[e] = f.get(e, field.zero()) + c
        forms.append(f)
    try:
        return HomogMap(field, n, d, forms)
    except HomogError as exc:
        raise FormatError(str(exc)) from None


def map_hash(phi: HomogMap) -> str:
    """SHA-256 of the canonical JSON form of the map."""
    text = json.dumps(map_to_json(phi), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


# ---------------------------------------------------------------------------
# points, matrices, places


def vector_from_json(vec: Sequence, field: ConstantField) -> list[RatFunc]:
    return [parse_rat_func(str(c), field) for c in vec]


def vector_to_json(vec: Sequence[RatFunc]) -> list[str]:
    return [str(c) for c in vec]


def points_from_json(source, field: ConstantField) -> list[list[RatFunc]]:
    data = _load(source)
    if isinstance(data, dict):
        data = data.get("points", [])
    if not isinstance(data, list) or not all(isinstance(v, list) for v in data):
        raise FormatError("a points file must be a JSON list of vectors")
    return [vector_from_json(v, field) for v in data]


def parse_point(text: str, field: ConstantField) -> list[RatFunc]:
    """``"t,1"`` or a JSON list ``["t", "1"]``."""
    text = text.strip()
    if text.startswith("["):
        return vector_from_json(json.loads(text), field)
    return [parse_rat_func(c, field) for c in text.split(",")]


def matrix_from_json(rows, field: ConstantField) -> LinearMap:
    return LinearMap(field, [vector_from_json(r, field) for r in rows])


def place_from_str(text: str, field: ConstantField) -> Place:
    return Place.parse(text, field)


# ---------------------------------------------------------------------------
# formal scalars


def scalar_to_json(s: ConjScalar) -> dict:
    return {"base": str(s.base), "exponents": [[str(v), str(q)] for v, q in s.exponents]}


def scalar_from_json(data, field: ConstantField) -> ConjScalar:
    if isinstance(data, str):
        return ConjScalar(parse_rat_func(data, field))
    exps = {Place.parse(v, field): Fraction(q) for v, q in data.get("exponents", [])}
    return ConjScalar(parse_rat_func(str(data.get("base", "1")), field), exps)


def witness_from_json(data: dict, phi: HomogMap):
    """Rebuild a Witness or LinearWitness written by ``witness_to_json``."""
    from .arithdyn.isotriviality import Witness
    from .arithdyn.linear import LinearWitness

    field = phi.field
    diag = tuple(scalar_from_json(s, field) for s in data["diag"])
    scalar = scalar_from_json(data["scalar"], field)
    if data["kind"] == "linear":
        basis = matrix_from_json(data["basis"], field)
        model = tuple(tuple(parse_rat_func(c, field) for c in row) for row in data["model"])
        return LinearWitness(basis, diag, scalar, model)
    linear = None if data.get("linear") is None else matrix_from_json(data["linear"], field)
    model = map_from_json(data["model"])
    return Witness(data["kind"], linear, diag, scalar, model)


def witness_to_json(w) -> dict:
    from .arithdyn.linear import LinearWitness

    if isinstance(w, LinearWitness):
        return {
            "kind": "linear",
            "basis": [vector_to_json(r) for r in w.basis.matrix],
            "diag": [scalar_to_json(s) for s in w.diag],
            "scalar": scalar_to_json(w.scalar),
            "model": [vector_to_json(r) for r in w.model],
        }
    return {
        "kind": w.kind,
        "linear": None if w.linear is None else [vector_to_json(r) for r in w.linear.matrix],
        "diag": [scalar_to_json(s) for s in w.diag],
        "scalar": scalar_to_json(w.scalar),
        "model": map_to_json(w.model),
    }


def gamma_from_json(data, field: ConstantField):
    """A Julia-set witness: ``{"matrix": [[...]]}`` or ``{"diag": [scalar, ...]}``."""
    data = _load(data)
    if "matrix" in data:
        return matrix_from_json(data["matrix"], field)
    if "diag" in data:
        return tuple(scalar_from_json(s, field) for s in data["diag"])
    raise FormatError("a witness file needs a 'matrix' or a 'diag' entry")


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
