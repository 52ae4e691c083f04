import random

import pytest

from ffdyn.funcfield import ConstantField, Place, parse_rat_func
from ffdyn.homog import HomogMap

Q = ConstantField.rationals()
F3 = ConstantField.prime(3)
F5 = ConstantField.prime(5)
F7 = ConstantField.prime(7)


def K(text, field=Q):
    return parse_rat_func(text, field)


def vec(texts, field=Q):
    return [parse_rat_func(s, field) for s in texts]


def hmap(exprs, field=Q):
    return HomogMap.from_exprs(field, exprs)


def place(text, field=Q):
    return Place.parse(text, field)


@pytest.fixture
def rng():
    return random.Random(20240611)
