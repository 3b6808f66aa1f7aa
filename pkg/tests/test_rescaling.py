import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rgevt.distributions import Case
from rgevt.errors import DomainError, ParameterError, UnknownIdentifierError
from rgevt.rescaling import (
    RescalingGroup,
    check_flow_equation,
    check_group_law,
    generator,
    parse_group,
    rescale,
    rescale_derivative,
)

GRIDS = {
    Case.CASE0: np.linspace(-5, 5, 100),
    Case.CASE1_MINUS: np.linspace(-5, 0, 100),
    Case.CASE1_PLUS: np.linspace(0, 5, 100),
    Case.CASE2: np.linspace(0, 1, 100),
}
INTERIOR = {
    Case.CASE1_MINUS: np.linspace(-5, -1e-3, 200),
    Case.CASE1_PLUS: np.linspace(1e-3, 5, 200),
    Case.CASE2: np.linspace(1e-3, 1 - 1e-3, 200),
}


def test_examples():
    assert rescale(RescalingGroup(Case.CASE2, 2), math.log(4), 0.25) == pytest.approx(0.5, abs=1e-15)
    assert rescale(RescalingGroup(Case.CASE0, 2), 3, 1.0) == 2.5
    for case, grid in GRIDS.items():
        np.testing.assert_allclose(rescale(RescalingGroup(case, 1.3), 0.0, grid), grid, atol=1e-15)


def test_generator_examples():
    g = RescalingGroup(Case.CASE2, 1)
    assert generator(g, math.exp(-1)) == pytest.approx(math.exp(-1), rel=1e-15)
    for alpha in (0.5, 1, 3):
        g = RescalingGroup(Case.CASE2, alpha)
        assert generator(g, 0.0) == 0.0 and generator(g, 1.0) == 0.0


@pytest.mark.parametrize("case", list(Case))
def test_generator_matches_richardson_difference(case):
    g = RescalingGroup(case, 1.7)
    x = GRIDS[case][1:-1]
    def fd(h):
        return (np.asarray(rescale(g, h, x), float) - x) / h
    # two levels of Richardson extrapolation on a first-order difference
    h = 1e-3
    a1 = 2 * fd(h / 2) - fd(h)
    a2 = 2 * fd(h / 4) - fd(h / 2)
    rich = (4 * a2 - a1) / 3
    np.testing.assert_allclose(rich, generator(g, x), atol=1e-8)


@pytest.mark.parametrize("case", list(Case))
@pytest.mark.parametrize("s1,s2", [(0.7, 1.3), (-2.0, 0.5), (1.5, -1.5), (3.0, 3.0)])
def test_group_law(case, s1, s2):
    assert check_group_law(RescalingGroup(case, 2), s1, s2, GRIDS[case]) <= 1e-12


def test_inverse_pairs_give_identity():
    for case, grid in GRIDS.items():
        g = RescalingGroup(case, 0.8)
        for s in (0.3, 2.0, 5.0):
            back = rescale(g, -s, rescale(g, s, grid))
            np.testing.assert_allclose(back, grid, atol=1e-12)
    assert check_group_law(RescalingGroup(Case.CASE1_PLUS, 1), 1.1, -1.1, GRIDS[Case.CASE1_PLUS]) <= 1e-14
    assert check_group_law(RescalingGroup(Case.CASE0, 1), 0.4, 2.9, GRIDS[Case.CASE0]) <= 1e-14


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(list(Case)), st.floats(-5, 5), st.floats(0, 1), st.floats(0.2, 4))
def test_support_preservation(case, s, frac, alpha):
    g = RescalingGroup(case, alpha)
    x = {Case.CASE0: -50 + 100 * frac, Case.CASE1_MINUS: -50 * frac,
         Case.CASE1_PLUS: 50 * frac, Case.CASE2: frac}[case]
    y = float(rescale(g, s, x))
    assert bool(g.support.contains(y))


@pytest.mark.parametrize("case", list(Case))
def test_monotone_and_property_i(case):
    g = RescalingGroup(case, 1.2)
    grid = GRIDS[case]
    for s in (0.5, 2.0):
        y = np.asarray(rescale(g, s, grid), float)
        assert np.all(np.diff(y) > 0)
    if case in INTERIOR:
        x = INTERIOR[case]
        assert np.all(np.asarray(rescale(g, 0.5, x)) > x)
        assert np.all(np.asarray(generator(g, x)) > 0)
    else:
        assert np.all(np.asarray(rescale(g, 0.5, grid)) > grid)


def test_generator_vanishes_only_on_boundary():
    assert generator(RescalingGroup(Case.CASE1_MINUS, 1), 0.0) == 0.0
    assert generator(RescalingGroup(Case.CASE1_PLUS, 1), 0.0) == 0.0
    for case, x in INTERIOR.items():
        assert np.all(np.asarray(generator(RescalingGroup(case, 1), x)) != 0)


@pytest.mark.parametrize("case", list(Case))
@pytest.mark.parametrize("s", [0.0, 1.0, 2.0])
def test_flow_equation(case, s):
    grid = GRIDS[case] if case is not Case.CASE2 else np.linspace(0.01, 0.99, 100)
    assert check_flow_equation(RescalingGroup(case, 1.5), s, grid) <= 1e-8


def test_derivative_matches_finite_difference():
    g = RescalingGroup(Case.CASE2, 2)
    x = np.linspace(0.05, 0.95, 30)
    h = 1e-6
    fd = (np.asarray(rescale(g, 1.0, x + h)) - np.asarray(rescale(g, 1.0, x - h))) / (2 * h)
    np.testing.assert_allclose(rescale_derivative(g, 1.0, x), fd, rtol=1e-7)


def test_domain_errors():
    with pytest.raises(DomainError):
        rescale(RescalingGroup(Case.CASE2, 1), 1.0, 1.5)
    with pytest.raises(DomainError):
        generator(RescalingGroup(Case.CASE1_PLUS, 1), -1.0)
    with pytest.raises(ParameterError):
        RescalingGroup(Case.CASE2, 0)


def test_parse_group():
    g = parse_group("case2:alpha=2")
    assert g.case is Case.CASE2 and g.alpha == 2
    assert parse_group("case1+:alpha=0.5").case is Case.CASE1_PLUS
    with pytest.raises(UnknownIdentifierError):
        parse_group("case3:alpha=1")
    with pytest.raises(ParameterError):
        parse_group("case2:alpha=two")
