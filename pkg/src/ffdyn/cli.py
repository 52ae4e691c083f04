"""Command-line front end.

Exit codes: 0 when the answer is decisive, 2 when it is an honest Unknown or
otherwise inconclusive, 1 on any error.  ``--json`` prints the report as
canonical JSON (sorted keys), so identical inputs give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Any, Callable

from . import __version__
from .funcfield import ConstantField, FuncFieldError, Place, log_abs, ord, support
from .homog import HomogError, HomogMap, evaluate, normalize_at
from .io import (
    FormatError,
    dumps,
    field_from_json,
    gamma_from_json,
    map_from_json,
    map_hash,
    parse_point,
    points_from_json,
    vector_to_json,
    witness_from_json,
    witness_to_json,
    _load,
)
from .resultant import ResultantError, res_ord, resultant

OK, ERROR, UNKNOWN = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which is reserved for Unknown here
    def error(self, message: str):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# helpers


def _s(x) -> str:
    return str(x)


def _places(args, phi: HomogMap) -> list[Place] | None:
    if not getattr(args, "place", None):
        return None
    return [Place.parse(p, phi.field) for p in args.place]


def _point_list(args, field: ConstantField) -> list:
    pts = [parse_point(p, field) for p in (args.point or [])]
    if getattr(args, "points", None):
        pts += points_from_json(args.points, field)
    if not pts:
        raise UsageError("give at least one --point or a --points file")
    return pts


# ---------------------------------------------------------------------------
# subcommands; each returns (exit code, result dict)


def cmd_eval(args, phi: HomogMap):
    rows = []
    for x in _point_list(args, phi.field):
        if len(x) != phi.n_vars:
            raise UsageError(f"point has {len(x)} coordinates, the map needs {phi.n_vars}")
        rows.append({"x": vector_to_json(x), "image": vector_to_json(evaluate(phi, x))})
    return OK, {"evaluations": rows}


def cmd_res(args, phi: HomogMap):
    R = resultant(phi).value
    out: dict[str, Any] = {"resultant": _s(R), "singular": not R}
    if R:
        out["support"] = [
            {"place": _s(v), "degree": v.degree, "ord": e, "log_abs": _s(log_abs(R, v))} for v, e in support(R)
        ]
    return OK, out


def cmd_places(args, phi: HomogMap):
    """Valuation data of coefficients and resultant at every place that can matter."""
    from .arithdyn.reduction import candidate_places

    R = resultant(phi).value
    places = _places(args, phi) or candidate_places(phi)
    rows = []
    for v in places:
        _, m = normalize_at(phi, v)
        rows.append(
            {
                "place": _s(v),
                "degree": v.degree,
                "content": m,
                "ord_res": ord(R, v),
                "res_ord_normalized": res_ord(phi, v),
                "log_abs_res": _s(log_abs(R, v)),
            }
        )
    total = sum(v.degree * e for v, e in support(R))
    return OK, {"places": rows, "product_formula_sum": total}


def cmd_reduction(args, phi: HomogMap):
    from .arithdyn.reduction import potential_good_reduction_search, reduced_common_zero, reduction_report
    from .io import scalar_to_json

    rep = reduction_report(phi)
    rows = []
    inconclusive = False
    for e in rep.entries:
        row = {
            "place": _s(e.place),
            "content": e.content,
            "res_ord_normalized": e.res_ord_normalized,
            "good_in_given_coords": e.good_in_given_coords,
        }
        if not e.good_in_given_coords:
            if phi.degree >= 2:
                w = potential_good_reduction_search(phi, e.place, args.bound)
                row["potential_good_reduction"] = None if w is None else [scalar_to_json(s) for s in w]
                inconclusive |= w is None
            phin, _ = normalize_at(phi, e.place)
            try:
                z = reduced_common_zero(phin, e.place)
            except (HomogError, ValueError, NotImplementedError):
                z = None
            row["reduced_common_zero"] = None if z is None else vector_to_json(z)
        rows.append(row)
    out = {
        "places": rows,
        "bad_places": [_s(v) for v in rep.bad_places],
        "exponent_bound": args.bound,
    }
    if inconclusive:
        out["note"] = "no diagonal witness within the bound at some bad place; not a proof of absence"
    return (UNKNOWN if inconclusive else OK), out


def _verdict_json(verdict, phi: HomogMap) -> dict:
    out: dict[str, Any] = {"status": verdict.status}
    if verdict.witness is not None:
        out["witness"] = witness_to_json(verdict.witness)
    if verdict.certificate is not None:
        out["certificate"] = verdict.certificate.to_json()
    rep = dict(verdict.report)
    if rep:
        out["report"] = _plain(rep)
    return out


def _plain(x):
    """Reports may hold places, fractions and field elements; make them JSON."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    return str(x)


def _recheck(phi: HomogMap, data: dict) -> tuple[bool, str]:
    from .arithdyn.isotriviality import Certificate, recheck_certificate_for, recheck_witness

    status = data.get("status")
    if status == "Isotrivial":
        w = witness_from_json(data["witness"], phi)
        return recheck_witness(phi, w), "witness"
    if status == "NonIsotrivial":
        cert = dict(data["certificate"])
        kind = cert.pop("kind")
        return recheck_certificate_for(phi, Certificate(kind, cert)), f"certificate ({kind})"
    return False, "nothing to recheck for an Unknown verdict"


def cmd_isotrivial(args, phi: HomogMap):
    from .arithdyn.isotriviality import Witness, gamma_integrality, isotriviality

    if isinstance(args.recheck, str):
        # validate a saved report without running any search
        saved = _load(args.recheck)
        result = saved.get("result", saved)
        want = saved.get("provenance", {}).get("map_sha256")
        if want is not None and want != map_hash(phi):
            raise UsageError("the report was produced for a different map")
        ok, what = _recheck(phi, result)
        return (OK if ok else ERROR), {"status": result.get("status"), "recheck": {"checked": what, "valid": ok}}
    verdict = isotriviality(phi, bound=args.bound, npm=args.npm)
    out = _verdict_json(verdict, phi)
    if isinstance(verdict.witness, Witness) and phi.degree >= 2:
        out["gamma_integrality"] = [
            {"place": _s(c.place), "min_entry_ord": _s(c.min_entry_ord), "det_ord": _s(c.det_ord), "ok": c.ok}
            for c in gamma_integrality(phi, verdict.witness)
        ]
    if args.recheck:
        ok, what = _recheck(phi, out)
        out["recheck"] = {"checked": what, "valid": ok}
        if verdict.decisive and not ok:
            return ERROR, out
    return (OK if verdict.decisive else UNKNOWN), out


def cmd_iterate_check(args, phi: HomogMap):
    from .arithdyn.isotriviality import iterate_isotriviality

    rep = iterate_isotriviality(phi, args.r, bound=args.bound, npm=args.npm)
    out = {
        "r": rep.r,
        "base": rep.base.status,
        "iterate": rep.iterate.status,
        "agree": rep.agree,
        "transfer": [
            {"place": _s(c.place), "iterate_good": c.iterate_good, "rescaled_good": c.rescaled_good, "ok": c.ok}
            for c in rep.transfer
        ],
    }
    if not rep.ok:
        return ERROR, out
    return (OK if rep.agree else UNKNOWN), out


def cmd_height(args, phi: HomogMap):
    from .heights import local_height

    v = Place.parse(args.place_at, phi.field)
    target = Fraction(args.error)
    rows = []
    code = OK
    for x in _point_list(args, phi.field):
        est = local_height(phi, x, v, target)
        rows.append(
            {
                "x": vector_to_json(x),
                "value": _s(est.value),
                "error_bound": _s(est.error_bound),
                "exact": est.exact,
                "iterations": est.iterations_used,
            }
        )
        if est.error_bound > target:
            code = UNKNOWN
    return code, {"place": _s(v), "target_error": _s(target), "heights": rows}


def cmd_julia(args, phi: HomogMap):
    from .capacity import CapacityError, julia_diameter
    from .heights import julia_membership
    from .arithdyn.reduction import potential_good_reduction_search

    v = Place.parse(args.place_at, phi.field)
    if args.normalize:
        phi, _ = normalize_at(phi, v)
    gamma = gamma_from_json(args.witness, phi.field) if args.witness else None
    out: dict[str, Any] = {"place": _s(v)}
    code = OK
    if gamma is None and phi.degree >= 2:
        if res_ord(phi, v) == 0:
            gamma = None  # the identity
        else:
            found = potential_good_reduction_search(phi, v, args.bound)
            gamma = tuple(found) if found is not None else False
    if gamma is False:
        out["diameter"] = None
        out["note"] = "no good-reduction witness found; the diameter is not computed"
        code = UNKNOWN
    else:
        try:
            jd = julia_diameter(phi, gamma, v)
            out["diameter"] = {
                "log_d_inf_witness": _s(jd.via_witness),
                "log_d_inf_resultant": _s(jd.via_resultant),
                "C": _s(jd.C),
                "agree": jd.agree,
            }
            if not jd.agree:
                code = ERROR
        except CapacityError as exc:
            raise UsageError(str(exc)) from None
    if args.point or args.points:
        rows = []
        for x in _point_list(args, phi.field):
            jv = julia_membership(phi, x, v, max_iter=args.max_iter)
            rows.append({"x": vector_to_json(x), "status": jv.status, "iteration": jv.iteration, "reason": jv.reason})
            if jv.status == "BoundedSoFar" and code == OK:
                code = UNKNOWN
        out["membership"] = rows
    return code, out


def _field_option(text: str) -> ConstantField:
    if text == "Q":
        return ConstantField.rationals()
    if text.startswith("Fp:") and text[3:].isdigit():
        return ConstantField.prime(int(text[3:]))
    raise UsageError(f"field must be Q or Fp:<p>, not {text!r}")


def _parse_range(text: str) -> list[int]:
    if ":" in text:
        a, b = text.split(":")
        return list(range(int(a), int(b) + 1))
    return [int(text)]


def cmd_tdiam(args, _phi):
    from .capacity import DegenerateSubset, PointSet, m_diameter

    data = _load(args.points_file)
    if isinstance(data, dict) and "field" in data:
        field = field_from_json(data["field"])
    else:
        field = _field_option(args.field)
    pts = points_from_json(data, field)
    v = Place.parse(args.place_at, field)
    E = PointSet.of(pts, v)
    Ms = _parse_range(args.M)
    rows = []
    prev = None
    monotone = True
    for M in Ms:
        try:
            r = m_diameter(E, M, budget=args.budget)
        except DegenerateSubset:
            rows.append({"M": M, "log_dM": None, "degenerate": True})
            continue
        if prev is not None and r.log_dM > prev:
            monotone = False
        prev = r.log_dM
        rows.append(
            {
                "M": M,
                "log_dM": _s(r.log_dM),
                "J_M": r.J_M,
                "attaining_subset": list(r.attaining_subset),
                "degenerate_skipped": r.degenerate_skipped,
            }
        )
    return OK, {"place": _s(v), "n_points": len(pts), "diameters": rows, "monotone": monotone}


def _field_spec(text: str | None, phi: HomogMap):
    if text is None:
        return None
    if "^" in text:
        p, e = text.split("^")
    else:
        p, e = text, "1"
    p, e = int(p), int(e)
    if not phi.field.is_finite or phi.field.p != p:
        raise UsageError(f"search field characteristic {p} does not match the map's field {phi.field}")
    return p, e


def cmd_preper(args, phi: HomogMap):
    from .arithdyn.preperiodic import format_finite_point, format_point, preperiodic_points

    sf = _field_spec(args.over, phi)
    S = preperiodic_points(phi, args.n, args.m, sf)
    pts = [format_finite_point(P) for P in S.points] if sf else [format_point(P) for P in S.points]
    out: dict[str, Any] = {"n": S.n, "m": S.m, "field": S.field_desc, "points": pts, "count": len(pts)}
    if S.unsplit:
        out["unsplit"] = [
            {"factor": u.factor, "degree": u.degree, "multiplicity": u.multiplicity, "irreducible": u.irreducible}
            for u in S.unsplit
        ]
    return OK, out


def cmd_stabilizer(args, phi: HomogMap):
    from .arithdyn.stabilizer import format_element, stabilizer

    rep = stabilizer(phi, extension=args.extension, budget=args.budget)
    out = {
        "q": rep.q,
        "searched": rep.searched,
        "elements": [format_element(g) for g in rep.elements],
        "matrices": [[list(r) for r in g] for g in rep.elements],
        "order": len(rep),
        "is_group": rep.is_group,
        "embeds_in_permutations": rep.injective,
        "preperiodic_sets": [{"n": n, "m": m, "size": k} for n, m, k in rep.sets],
    }
    return (OK if rep.is_group and rep.injective else ERROR), out


def cmd_verify(args, _phi):
    from .verify import run_suite

    rep = run_suite(args.seed, args.inject)
    return (OK if rep["ok"] else ERROR), rep


# ---------------------------------------------------------------------------
# argument parsing


def _add_points(p):
    p.add_argument("--point", action="append", help="a vector, e.g. 't,1' or '[\"t\",\"1\"]' (repeatable)")
    p.add_argument("--points", help="JSON file with a list of vectors")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ffdyn", description="Dynamics of endomorphisms of P^N over k(t).")
    parser.add_argument("--version", action="version", version=f"ffdyn {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the report as JSON")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, help_: str, takes_map: bool = True):
        p = sub.add_parser(name, help=help_, parents=[common])
        if takes_map:
            p.add_argument("map", help="map file in the JSON map format")
        return p

    p = add("eval", "evaluate the map at points")
    _add_points(p)
    add("res", "resultant and its support")
    p = add("places", "valuation data at the places that matter")
    p.add_argument("--place", action="append", help="restrict to these places (repeatable)")
    p = add("reduction", "good reduction per place and potential good reduction search")
    p.add_argument("--bound", type=int, default=3, help="exponent bound for the diagonal search")
    p = add("isotrivial", "decide isotriviality with a witness or certificate")
    p.add_argument("--bound", type=int, default=3)
    p.add_argument("--npm", type=int, default=4, help="bound on n+m for preperiodic points")
    p.add_argument(
        "--recheck",
        nargs="?",
        const=True,
        default=False,
        metavar="REPORT",
        help="re-validate the evidence; with a saved JSON report, check it without searching",
    )
    p = add("iterate-check", "compare the verdicts for the map and an iterate")
    p.add_argument("-r", type=int, required=True)
    p.add_argument("--bound", type=int, default=3)
    p.add_argument("--npm", type=int, default=4)
    p = add("height", "homogeneous local height at a place")
    _add_points(p)
    p.add_argument("--at", dest="place_at", required=True, help="place: 'inf' or a monic irreducible polynomial")
    p.add_argument("--error", default="1/1048576", help="target error bound (exact rational)")
    p = add("julia", "filled Julia set: diameter and membership")
    _add_points(p)
    p.add_argument("--at", dest="place_at", required=True)
    p.add_argument("--witness", help="JSON file with {'matrix': ...} or {'diag': ...}")
    p.add_argument("--bound", type=int, default=3)
    p.add_argument("--max-iter", type=int, default=30)
    p.add_argument("--normalize", action="store_true", help="divide out the content at the place first")
    p = add("tdiam", "M-diameters of a finite point set", takes_map=False)
    p.add_argument("points_file", help="JSON list of vectors, or {'field': ..., 'points': [...]}")
    p.add_argument("--at", dest="place_at", required=True)
    p.add_argument("-M", required=True, help="M or a range a:b")
    p.add_argument("--field", default="Q", help="Q or Fp:<p> when the file has no field header")
    p.add_argument("--budget", type=int, default=200_000)
    p = add("preper", "periodic and preperiodic points")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-m", type=int, default=0)
    p.add_argument("--over", help="enumerate over F_{p^e}, written p or p^e (constant maps only)")
    p = add("stabilizer", "stabilizer in PGL over a finite field")
    p.add_argument("--extension", type=int, default=1)
    p.add_argument("--budget", type=int, default=500_000)
    p = add("verify", "seeded randomized invariant battery", takes_map=False)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--inject", choices=["resultant-sign"], help="fault injection for testing the battery")
    return parser


COMMANDS: dict[str, Callable] = {
    "eval": cmd_eval,
    "res": cmd_res,
    "places": cmd_places,
    "reduction": cmd_reduction,
    "isotrivial": cmd_isotrivial,
    "iterate-check": cmd_iterate_check,
    "height": cmd_height,
    "julia": cmd_julia,
    "tdiam": cmd_tdiam,
    "preper": cmd_preper,
    "stabilizer": cmd_stabilizer,
    "verify": cmd_verify,
}

_OPTION_SKIP = {"command", "json", "map"}


def dispatch(argv: list[str] | None = None) -> tuple[int, dict]:
    """Parse, run and wrap the result with provenance.  Never raises for user errors."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return ERROR, {"error": f"usage: {exc}"}
    phi = None
    prov: dict[str, Any] = {"tool": "ffdyn", "version": __version__, "command": args.command}
    try:
        if getattr(args, "map", None):
            phi = map_from_json(args.map)
            prov["map_sha256"] = map_hash(phi)
            prov["field"] = str(phi.field)
        prov["options"] = {k: v for k, v in sorted(vars(args).items()) if k not in _OPTION_SKIP}
        code, result = COMMANDS[args.command](args, phi)
    except (UsageError, FormatError, FuncFieldError, HomogError, ResultantError, ValueError, ZeroDivisionError) as exc:
        return ERROR, {"error": f"{type(exc).__name__}: {exc}", "provenance": prov, "json": args.json}
    return code, {"result": result, "provenance": prov, "json": args.json}


# ---------------------------------------------------------------------------
# text rendering


def _render(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_render(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, dict):
                inner = _render(v, indent + 1)
                lines.append(f"{pad}- " + inner[0].lstrip())
                lines.extend(inner[1:])
            elif isinstance(v, list) and all(not isinstance(a, (dict, list)) for a in v):
                lines.append(f"{pad}- [" + ", ".join(_scalar(a) for a in v) + "]")
            elif isinstance(v, list):
                lines.append(f"{pad}- " + json.dumps(v, sort_keys=True))
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(pad + _scalar(obj))
    return lines


def _scalar(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (dict, list)):
        return "[]" if isinstance(v, list) else "{}"
    return str(v)


def main(argv: list[str] | None = None) -> int:
    code, rep = dispatch(argv)
    as_json = rep.pop("json", False)
    if "error" in rep:
        if as_json:
            sys.stdout.write(dumps(rep))
        print(f"error: {rep['error']}", file=sys.stderr)
        return code
    if as_json:
        sys.stdout.write(dumps(rep))
    else:
        lines = _render(rep["result"])
        prov = rep["provenance"]
        lines.append(f"# ffdyn {prov['version']} {prov['command']}" + (f" map {prov['map_sha256'][:12]}" if "map_sha256" in prov else ""))
        print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
