"""Exact dynamics of endomorphisms of projective space over k(t)."""

__version__ = "0.1.0"

from .funcfield import ConstantField, Place, RatFunc, log_abs, ord, parse_rat_func, support  # noqa: E402
from .homog import ConjScalar, HomogMap, LinearMap, ProjPoint, compose, conjugate, evaluate, iterate  # noqa: E402
from .resultant import resultant  # noqa: E402

__all__ = [
    "ConjScalar",
    "ConstantField",
    "HomogMap",
    "LinearMap",
    "Place",
    "ProjPoint",
    "RatFunc",
    "compose",
    "conjugate",
    "evaluate",
    "iterate",
    "log_abs",
    "ord",
    "parse_rat_func",
    "resultant",
    "support",
]
