"""Good reduction, isotriviality and finiteness checks for maps over k(t)."""

from .isotriviality import (
    Certificate,
    IsotrivialityVerdict,
    Witness,
    gamma_integrality,
    isotriviality,
    iterate_isotriviality,
    linear_isotriviality,
    recheck_certificate_for,
    recheck_witness,
)
from .multipliers import multiplier_certificate, sigma_invariants
from .preperiodic import PreperSet, preimages, preperiodic_points
from .reduction import (
    ReductionReport,
    candidate_places,
    good_reduction_given_coords,
    potential_good_reduction_search,
    reduced_common_zero,
    reduction_report,
)
from .stabilizer import StabilizerReport, stabilizer

__all__ = [
    "Certificate",
    "IsotrivialityVerdict",
    "PreperSet",
    "ReductionReport",
    "StabilizerReport",
    "Witness",
    "candidate_places",
    "gamma_integrality",
    "good_reduction_given_coords",
    "isotriviality",
    "iterate_isotriviality",
    "linear_isotriviality",
    "multiplier_certificate",
    "potential_good_reduction_search",
    "preimages",
    "preperiodic_points",
    "recheck_certificate_for",
    "recheck_witness",
    "reduced_common_zero",
    "reduction_report",
    "sigma_invariants",
    "stabilizer",
]
