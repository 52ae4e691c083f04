"""Deciding isotriviality of endomorphisms of P^N over k(t), with checkable evidence.

Isotrivial verdicts carry a conjugation ``scalar * Gamma^-1 phi Gamma``
whose coefficients are all constants.  NonIsotrivial verdicts carry a
certificate that is recomputed by an independent route.  Anything else is
Unknown, with the per-place report attached.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

from .. import linalg
from ..funcfield import Place, RatFunc, ord, support
from ..homog import (
    ConjScalar,
    HomogError,
    HomogMap,
    LinearMap,
    conjugate,
    formal_conjugate_diag,
    iterate,
    normalize_at,
    proportional,
)
from ..resultant import SingularMap, resultant
from .linear import CharPolyInvariants, LinearWitness, charpoly_invariants, linear_witness, recheck_linear_witness
from .multipliers import MultiplierCertificate, multiplier_certificate, recheck_certificate
from .preperiodic import PreperiodicError, preperiodic_points
from .reduction import candidate_places, diagonal_witnesses, reduction_report


class IsotrivialityError(ValueError):
    pass


@dataclass(frozen=True)
class Witness:
    """``model = scalar * D^-1 L^-1 phi L D`` has constant coefficients."""

    kind: str
    linear: LinearMap | None
    diag: tuple[ConjScalar, ...]
    scalar: ConjScalar
    model: HomogMap

    def gamma_entries(self) -> list[list[ConjScalar | None]]:
        n = len(self.diag)
        if self.linear is None:
            return [[self.diag[i] if i == j else None for j in range(n)] for i in range(n)]
        return [
            [ConjScalar(c) * self.diag[j] if c else None for j, c in enumerate(row)] for row in self.linear.matrix
        ]

    def det_ord(self, v: Place) -> Fraction:
        total = sum((s.ord(v) for s in self.diag), Fraction(0))
        if self.linear is not None:
            total += ord(self.linear.det(), v)
        return total

    def to_json(self) -> dict:
        from ..io import witness_to_json

        return witness_to_json(self)


@dataclass(frozen=True)
class Certificate:
    kind: str
    data: dict

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.data}


@dataclass(frozen=True)
class IsotrivialityVerdict:
    status: str  # "Isotrivial", "NonIsotrivial" or "Unknown"
    witness: Witness | LinearWitness | None = None
    certificate: Certificate | None = None
    report: dict = dc_field(default_factory=dict)

    @property
    def decisive(self) -> bool:
        return self.status != "Unknown"


# ---------------------------------------------------------------------------
# formal checks


def _formal_model(phi: HomogMap, linear, diag, scalar):
    psi = conjugate(phi, linear) if linear is not None else phi
    return formal_conjugate_diag(psi, diag, scalar)


def _constant_model(phi: HomogMap, formal) -> HomogMap | None:
    forms = []
    for f in formal:
        g = {}
        for e, s in f.items():
            if not s.is_rational() or not s.base.is_constant():
                return None
            g[e] = s.base
        forms.append(g)
    return HomogMap(phi.field, phi.n_vars, phi.degree, forms)


def recheck_witness(phi: HomogMap, w: Witness | LinearWitness) -> bool:
    """Recompute the conjugation from the witness alone and test constancy."""
    if isinstance(w, LinearWitness):
        return recheck_linear_witness(as_linear(phi), w)
    try:
        formal = _formal_model(phi, w.linear, w.diag, w.scalar)
    except HomogError:
        return False
    model = _constant_model(phi, formal)
    return model is not None and model == w.model and bool(resultant(model).value)


def recheck_certificate_for(phi: HomogMap, cert: Certificate) -> bool:
    """Re-validate a certificate from its JSON data and the map alone."""
    if cert.kind == "multiplier":
        return recheck_multiplier_data(phi, cert.data)
    if cert.kind == "preperiodic_model":
        return _recheck_preperiodic(phi, cert.data)
    if cert.kind == "linear_invariant":
        return _recheck_linear_invariant(as_linear(phi), cert.data)
    return False


def recheck_multiplier_data(phi: HomogMap, data: dict) -> bool:
    from ..funcfield import parse_rat_func
    from .multipliers import sigma_via_resultant

    sig = sigma_via_resultant(phi, int(data["n"]))
    i = int(data["index"])
    if not 1 <= i <= len(sig):
        return False
    s = sig[i - 1]
    return s == parse_rat_func(data["value"], phi.field) and not s.is_constant()


# ---------------------------------------------------------------------------
# step 1: per-place diagonal witnesses, assembled globally


def _formal_valuations(formal, res_ord_base, A, qsum, n, d, v: Place):
    m = min(s.ord(v) for f in formal for s in f.values())
    return m, res_ord_base + A * qsum - m * n * d ** (n - 1)


def diagonal_assembly(phi: HomogMap, bound: int, per_place: int = 4, max_combos: int = 512):
    """Try to glue per-place diagonal witnesses into one conjugation defined over a radical extension.

    Returns ``(witness or None, place_report)``.
    """
    report = reduction_report(phi)
    bad = report.bad_places
    n, d = phi.n_vars, phi.degree
    rows = {}
    options = []
    for v in bad:
        ws = diagonal_witnesses(phi, v, bound, limit=per_place)
        rows[str(v)] = {
            "res_ord_normalized": report.entry(v).res_ord_normalized,
            "local_witness": None if not ws else [str(q) for q in ws[0]],
        }
        if v.is_infinite:
            options.append((v, [tuple(Fraction(0) for _ in range(n))] + ws))
        else:
            if not ws:
                return None, rows
            options.append((v, ws))
    one = phi.field.one()
    places = set(candidate_places(phi))
    places.add(Place(phi.field, phi.field.ring.gens[0]))
    places = sorted(places)
    A = d ** (n - 1) * (d - 1)
    R = resultant(phi).value
    count = 0
    for combo in itertools.product(*[ws for _, ws in options]):
        count += 1
        if count > max_combos:
            break
        D = [ConjScalar(one) for _ in range(n)]
        for (v, _), qs in zip(options, combo):
            for i, q in enumerate(qs):
                if q:
                    D[i] = D[i] * ConjScalar.uniformizer_power(v, q)
        formal = formal_conjugate_diag(phi, D)
        good = True
        scalar = ConjScalar(one)
        for w in places:
            qsum = sum((s.ord(w) for s in D), Fraction(0))
            m, r = _formal_valuations(formal, ord(R, w), A, qsum, n, d, w)
            if r != 0:
                good = False
                break
            if m and not w.is_infinite:
                scalar = scalar * ConjScalar.uniformizer_power(w, -m)
        if not good:
            continue
        model = _constant_model(phi, formal_conjugate_diag(phi, D, scalar))
        if model is not None:
            kind = "identity" if all(s == ConjScalar(one) for s in D) else "diagonal"
            return Witness(kind, None, tuple(D), scalar, model), rows
    return None, rows


# ---------------------------------------------------------------------------
# step 2: preperiodic coordinates (N = 1)


def _collect_preperiodic(phi: HomogMap, npm: int, max_degree: int):
    pts = []
    tried = []
    d = phi.degree
    for s in range(1, npm + 1):
        for m in range(0, s):
            nn = s - m
            if d**s + d**m > max_degree:
                continue
            try:
                P = preperiodic_points(phi, nn, m)
            except PreperiodicError:
                continue
            tried.append((nn, m))
            for x in P.points:
                if x not in pts:
                    pts.append(x)
            if len(pts) >= 2:
                return pts, tried
    return pts, tried


def _cycle_data(psi: HomogMap, e: list[RatFunc], limit: int):
    """First ``(i, j, c)`` with ``psi^i(e) = c psi^j(e)``, i < j."""
    from ..homog import evaluate

    orbit = [list(e)]
    for j in range(1, limit + 1):
        orbit.append(evaluate(psi, orbit[-1]))
        for i in range(j):
            c = proportional(orbit[j], orbit[i])
            if c is not None:
                return i, j, c
    return None


def preperiodic_model(phi: HomogMap, npm: int = 4, max_degree: int = 40):
    """Move two K-rational preperiodic points to (1:0), (0:1) and rescale the lifts.

    Returns ``(linear, diag, formal_coeffs, info)`` or None when fewer than two
    K-rational preperiodic points were found within the bounds.
    """
    if phi.n_vars != 2:
        return None, {}
    pts, tried = _collect_preperiodic(phi, npm, max_degree)
    info = {"searched": [f"n={a},m={b}" for a, b in tried], "points": [str(p) for p in pts]}
    if len(pts) < 2:
        return None, info
    P0, P1 = pts[0], pts[1]
    info["lifts"] = [P0.lift, P1.lift]
    field = phi.field
    L = LinearMap(field, [[P0.lift[0], P1.lift[0]], [P0.lift[1], P1.lift[1]]])
    psi = conjugate(phi, L)
    d = phi.degree
    diag = []
    cyc = []
    for k in range(2):
        e = [field.one() if i == k else field.zero() for i in range(2)]
        data = _cycle_data(psi, e, 2 * npm + 2)
        if data is None:
            raise IsotrivialityError("a preperiodic point failed to cycle")
        i, j, c = data
        cyc.append({"i": i, "j": j, "c": str(c)})
        diag.append(ConjScalar.root(c, d**j - d**i))
    info["cycles"] = cyc
    formal = formal_conjugate_diag(psi, diag)
    return (L, tuple(diag), formal), info


def _nonconstant_coefficient(formal):
    for j, f in enumerate(formal):
        for e, s in sorted(f.items()):
            if not s.is_rational() or not s.base.is_constant():
                return j, e, s
    return None


def _recheck_preperiodic(phi: HomogMap, data: dict) -> bool:
    from ..funcfield import parse_rat_func

    field = phi.field
    lifts = [[parse_rat_func(c, field) for c in P] for P in data["lifts"]]
    L = LinearMap(field, [[lifts[0][0], lifts[1][0]], [lifts[0][1], lifts[1][1]]])
    if not L.det():
        return False
    psi = conjugate(phi, L)
    d = phi.degree
    diag = []
    # the basis vectors must be preperiodic, with the recorded cycle data
    for k, cyc in enumerate(data["cycles"]):
        e = [field.one() if i == k else field.zero() for i in range(2)]
        got = _cycle_data(psi, e, int(cyc["j"]))
        if got is None or (got[0], got[1]) != (int(cyc["i"]), int(cyc["j"])):
            return False
        if got[2] != parse_rat_func(cyc["c"], field):
            return False
        diag.append(ConjScalar.root(got[2], d ** got[1] - d ** got[0]))
    return _nonconstant_coefficient(formal_conjugate_diag(psi, diag)) is not None


# ---------------------------------------------------------------------------
# linear maps


def linear_isotriviality(M: LinearMap) -> IsotrivialityVerdict:
    inv = charpoly_invariants(M)
    rep = {
        "D": str(inv.D),
        "e": [str(x) for x in inv.e],
        "normalized": [str(x) for x in inv.normalized],
    }
    if inv.constant:
        w = linear_witness(M, inv)
        return IsotrivialityVerdict("Isotrivial", w, None, rep)
    i = next(k for k, x in enumerate(inv.normalized, start=1) if not x.is_constant())
    cert = Certificate(
        "linear_invariant",
        {"index": i, "value": str(inv.normalized[i - 1])},
    )
    return IsotrivialityVerdict("NonIsotrivial", None, cert, rep)


def _principal_minor_sum(M: LinearMap, k: int) -> RatFunc:
    field = M.field
    total = field.zero()
    for sub in itertools.combinations(range(M.size), k):
        total = total + linalg.det(field, [[M.matrix[i][j] for j in sub] for i in sub])
    return total


def _recheck_linear_invariant(M: LinearMap, data: dict) -> bool:
    """e_i as the sum of principal i-minors, independently of the characteristic polynomial code."""
    from ..funcfield import parse_rat_func

    i = int(data["index"])
    e = _principal_minor_sum(M, i)
    val = e**M.size / M.det() ** i
    return val == parse_rat_func(data["value"], M.field) and not val.is_constant()


def as_linear(phi: HomogMap) -> LinearMap:
    n = phi.n_vars
    z = phi.field.zero()
    rows = [[f.get(tuple(int(k == j) for k in range(n)), z) for j in range(n)] for f in phi.forms]
    return LinearMap(phi.field, rows)


# ---------------------------------------------------------------------------
# the pipeline


def isotriviality(phi: HomogMap, bound: int = 3, npm: int = 4, multipliers: bool = True) -> IsotrivialityVerdict:
    if phi.degree == 1:
        return linear_isotriviality(as_linear(phi))
    if not resultant(phi).value:
        raise SingularMap()
    report: dict = {"bound": bound, "npm": npm}
    w, rows = diagonal_assembly(phi, bound)
    report["places"] = rows
    if w is not None:
        return IsotrivialityVerdict("Isotrivial", w, None, report)
    if phi.n_vars == 2:
        pm, info = preperiodic_model(phi, npm)
        report["preperiodic"] = info
        if pm is not None:
            L, diag, formal = pm
            model = _constant_model(phi, formal)
            if model is not None:
                w = Witness("preperiodic", L, diag, ConjScalar(phi.field.one()), model)
                return IsotrivialityVerdict("Isotrivial", w, None, report)
            j, e, s = _nonconstant_coefficient(formal)
            pm_cert = Certificate(
                "preperiodic_model",
                {
                    "points": info["points"][:2],
                    "cycles": info["cycles"],
                    "lifts": [[str(c) for c in P] for P in info["lifts"]],
                    "coefficient": {"form": j, "monomial": list(e), "value": str(s)},
                },
            )
            # already decisive; the multiplier scan can be far more expensive on iterates
            return IsotrivialityVerdict("NonIsotrivial", None, pm_cert, report)
        if multipliers:
            mc = multiplier_certificate(phi)
            if mc is not None:
                data = mc.to_json()
                data.pop("kind")
                report["obstructed_places"] = [str(v) for v in mc.poles]
                return IsotrivialityVerdict("NonIsotrivial", None, Certificate("multiplier", data), report)
    return IsotrivialityVerdict("Unknown", None, None, report)


# ---------------------------------------------------------------------------
# Gamma integrality for two good models


@dataclass(frozen=True)
class GammaCheck:
    place: Place
    min_entry_ord: Fraction
    det_ord: Fraction

    @property
    def ok(self) -> bool:
        return self.min_entry_ord >= 0 and self.det_ord == 0


def gamma_integrality(phi: HomogMap, w: Witness) -> list[GammaCheck]:
    """At each listed place where phi has nonsingular reduction, the rescaled Gamma lies in GL(O_v).

    With ``model = s * Gamma^-1 phi Gamma`` and ``phi = pi^m phi_v`` the
    rescaling is ``a Gamma`` where ``a^(d-1) = s pi^m``.
    """
    if phi.degree < 2:
        raise IsotrivialityError("the integrality statement needs degree at least two")
    from ..resultant import res_ord

    n, d = phi.n_vars, phi.degree
    places = set(candidate_places(phi))
    for row in w.gamma_entries():
        for s in row:
            if s is not None:
                places |= {v for v, _ in support(s.base)} | {v for v, _ in s.exponents}
    places |= {v for v, _ in w.scalar.exponents} | {v for v, _ in support(w.scalar.base)}
    out = []
    for v in sorted(places):
        if res_ord(phi, v) != 0:
            continue
        _, m = normalize_at(phi, v)
        a = (w.scalar.ord(v) + m) / (d - 1)
        entries = [s.ord(v) + a for row in w.gamma_entries() for s in row if s is not None]
        out.append(GammaCheck(v, min(entries), w.det_ord(v) + n * a))
    return out


# ---------------------------------------------------------------------------
# iterates


@dataclass(frozen=True)
class TransferCheck:
    place: Place
    iterate_good: bool
    rescaled_good: bool | None

    @property
    def ok(self) -> bool:
        return not self.iterate_good or bool(self.rescaled_good)


def good_reduction_transfer(phi: HomogMap, r: int) -> list[TransferCheck]:
    """If phi^r is good at v in the given coordinates, so is ``a * phi`` with ``a = pi^(-m_r (d-1)/(d^r-1))``."""
    from ..resultant import res_ord

    n, d = phi.n_vars, phi.degree
    phir = iterate(phi, r)
    R = resultant(phi).value
    out = []
    places = set(candidate_places(phi)) | set(candidate_places(phir))
    for v in sorted(places):
        good_r = res_ord(phir, v) == 0
        if not good_r:
            out.append(TransferCheck(v, False, None))
            continue
        _, mr = normalize_at(phir, v)
        shift = Fraction(mr * (d - 1), d**r - 1)
        coeff_min = min(ord(c, v) for c in phi.coefficients())
        rescaled_res = ord(R, v) - shift * n * d ** (n - 1)
        out.append(TransferCheck(v, True, coeff_min == shift and rescaled_res == 0))
    return out


@dataclass(frozen=True)
class IterateReport:
    r: int
    base: IsotrivialityVerdict
    iterate: IsotrivialityVerdict
    transfer: tuple[TransferCheck, ...]

    @property
    def agree(self) -> bool | None:
        if not (self.base.decisive and self.iterate.decisive):
            return None
        return self.base.status == self.iterate.status

    @property
    def ok(self) -> bool:
        return self.agree is not False and all(c.ok for c in self.transfer)


def iterate_isotriviality(phi: HomogMap, r: int, bound: int = 3, npm: int = 4) -> IterateReport:
    if r < 1:
        raise IsotrivialityError("r must be positive")
    if phi.degree < 2:
        raise IsotrivialityError("iterates need degree at least two")
    base = isotriviality(phi, bound, npm)
    it = base if r == 1 else isotriviality(iterate(phi, r), bound, npm)
    return IterateReport(r, base, it, tuple(good_reduction_transfer(phi, r)))
