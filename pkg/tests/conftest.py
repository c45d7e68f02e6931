from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from orbitrep.dynamics import MapSpec
from orbitrep.numeric import parse_scalar, rational, surd

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SQRT2_MINUS_1 = surd(-1, 1, 2)

# (beta, alpha) cases used across modules
BATTERY = {
    "doubling": ("2", "0"),
    "tripling": ("3", "0"),
    "three_halves": ("3/2", "0"),
    "doubling_quarter": ("2", "1/4"),
    "featured": ("2", "sqrt(2)-1"),
    "silver": ("1+sqrt(2)", "0"),
}


def spec_of(beta: str, alpha: str) -> MapSpec:
    return MapSpec(parse_scalar(beta), parse_scalar(alpha))


@pytest.fixture(params=sorted(BATTERY))
def battery_spec(request) -> MapSpec:
    return spec_of(*BATTERY[request.param])


fractions = st.fractions(min_value=-20, max_value=20, max_denominator=60)
unit_fractions = st.fractions(min_value=0, max_value=1, max_denominator=200).filter(lambda f: f < 1)


@st.composite
def q_sqrt2(draw):
    """Elements of Q(sqrt 2) as (scalar, a, b)."""
    a = draw(fractions)
    b = draw(fractions)
    return surd(a, b, 2), a, b


@st.composite
def unit_points(draw, d: int = 2):
    """Exact points in [0, 1[ from Q or Q(sqrt d)."""
    a = draw(st.fractions(min_value=-3, max_value=3, max_denominator=40))
    b = draw(st.fractions(min_value=-3, max_value=3, max_denominator=40))
    from orbitrep.numeric import mod1

    return mod1(surd(a, b, d))


def as_fraction(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


__all__ = ["BATTERY", "SQRT2_MINUS_1", "as_fraction", "rational", "spec_of"]
