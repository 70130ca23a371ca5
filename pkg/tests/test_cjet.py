"""Jet arithmetic: seeds, ring operations, analytic composition, truncation honesty."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergman_lab.cjet import (
    MAX_ORDER,
    Jet,
    constant_jet,
    coordinate_jets,
    divide,
    jet_space,
    seed_coordinates,
    squared_norm_jet,
)
from bergman_lab.errors import DivisionByZeroJet, DomainError

from oracles import fd_derivative, mp_log_kernel_ball


def test_space_sizes():
    assert jet_space(1).size == math.comb(2 + MAX_ORDER, MAX_ORDER)
    assert jet_space(2).size == 70
    assert jet_space(3).size == 210


def test_coordinate_seeds():
    z = (0.5, 0.0)
    seeds = seed_coordinates(z)
    assert len(seeds) == 4
    z1 = seeds[0]
    assert z1.value == 0.5
    assert z1.derivative((1, 0), (0, 0)) == 1.0
    assert z1.derivative((0, 1), (0, 0)) == 0.0
    assert z1.derivative((0, 0), (1, 0)) == 0.0
    zb1 = seeds[2]
    assert zb1.value == 0.5
    assert zb1.derivative((0, 0), (1, 0)) == 1.0
    assert zb1.derivative((1, 0), (0, 0)) == 0.0


def test_monomial_product_leibniz():
    zs, zbs = coordinate_jets((0.5, 0.0))
    p = zs[0] * zbs[0]
    assert p.value == 0.25
    assert p.derivative((1, 0), (0, 0)) == 0.5
    assert p.derivative((0, 0), (1, 0)) == 0.5
    assert p.derivative((1, 0), (1, 0)) == 1.0
    assert p.derivative((2, 0), (0, 0)) == 0.0


def test_fourth_power_against_fd_oracle():
    # d1 d1 db1 db1 of |z1|^4 at (0.5, 0): oracle first, then frozen value
    def f(z):
        s = (z[0] * z[0].conjugate()).real
        return s * s

    ref = fd_derivative(f, (0.5, 0.0), (2, 0), (2, 0))
    assert abs(ref - 4.0) < 1e-9
    zs, zbs = coordinate_jets((0.5, 0.0))
    p = zs[0] * zbs[0]
    q = p * p
    assert abs(q.derivative((2, 0), (2, 0)) - ref) < 1e-9


def test_geometric_series_reciprocal():
    # 1/(1 - z1 zb1) at 0: term-wise geometric-series oracle sum_k (z zb)^k
    zs, zbs = coordinate_jets((0.0, 0.0))
    g = (1.0 - zs[0] * zbs[0]).reciprocal()
    # (z zb)^k contributes k!^2 to the (k,k) mixed derivative
    assert abs(g.derivative((1, 0), (1, 0)) - 1.0) < 1e-14
    assert abs(g.derivative((2, 0), (2, 0)) - 4.0) < 1e-14
    assert abs(g.derivative((1, 0), (0, 1))) < 1e-14


def test_constant_division_and_power():
    c = constant_jet(8.0, (0.3, 0.1))
    one = c / c
    assert one.value == 1.0
    assert np.max(np.abs(one.coeffs[1:])) == 0.0
    half = c.power(-1.0 / 3.0)
    assert abs(half.value - 0.5) < 1e-15
    assert np.max(np.abs(half.coeffs[1:])) == 0.0
    lg = c.log()
    assert abs(lg.value - math.log(8.0)) < 1e-15
    assert np.max(np.abs(lg.coeffs[1:])) == 0.0


def test_log_of_one_minus_norm():
    lg = (1.0 - squared_norm_jet((0.0, 0.0))).log()
    for j in range(2):
        ej = tuple(1 if i == j else 0 for i in range(2))
        z0 = (0, 0)
        assert abs(lg.derivative(ej, z0)) < 1e-15
        for k in range(2):
            ek = tuple(1 if i == k else 0 for i in range(2))
            expected = -1.0 if j == k else 0.0
            assert abs(lg.derivative(ej, ek) - expected) < 1e-14


def test_division_floor():
    c = constant_jet(0.0, (0.0,))
    with pytest.raises(DivisionByZeroJet):
        c.reciprocal()
    small = constant_jet(1e-9, (0.0,))
    with pytest.raises(DivisionByZeroJet):
        small.reciprocal(floor=1e-6)
    divide(constant_jet(1.0, (0.0,)), small)  # default floor admits it


def test_domain_errors():
    with pytest.raises(DomainError):
        constant_jet(-1.0, (0.0,)).log()
    with pytest.raises(DomainError):
        constant_jet(-2.0, (0.0,)).power(0.5)
    # integer powers only need a nonzero value
    j = constant_jet(-2.0, (0.0,)).power(-2)
    assert abs(j.value - 0.25) < 1e-15


def test_order_tracking():
    zs, zbs = coordinate_jets((0.2, 0.1))
    f = (1.0 - zs[0] * zbs[0]).reciprocal()
    assert f.order == MAX_ORDER
    d = f.partial_z(0)
    assert d.order == MAX_ORDER - 1
    with pytest.raises(ValueError):
        d.derivative((2, 0), (2, 0))
    dddd = f.partial_z(0).partial_z(0).partial_zbar(0).partial_zbar(0)
    assert dddd.order == 0
    with pytest.raises(ValueError):
        dddd.partial_z(0)


def test_base_point_mismatch():
    a = constant_jet(1.0, (0.0, 0.0))
    b = constant_jet(1.0, (0.1, 0.0))
    with pytest.raises(ValueError):
        a + b


def test_real_function_conjugation_symmetry():
    # |z|^2-built kernel expressions represent real functions
    n = 2
    z = (0.31 + 0.2j, -0.4 + 0.05j)
    s = 1.0 - squared_norm_jet(z)
    k = s.power(-(n + 1)) * (math.factorial(n) / math.pi ** n)
    assert k.conjugation_symmetry_residual() < 1e-12 * abs(k.value)
    assert k.log().conjugation_symmetry_residual() < 1e-13


def test_composite_against_fd_random_points():
    """Every coefficient of log K on the ball matches FD + Richardson to 1e-5."""
    rng = np.random.default_rng(7)
    fn = mp_log_kernel_ball(2)
    for _ in range(3):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        z = tuple(v / np.linalg.norm(v) * rng.uniform(0.2, 0.7))
        s = 1.0 - squared_norm_jet(z)
        jet = (s.power(-3) * (2.0 / math.pi ** 2)).log()
        from oracles import compare_jet_with_fd

        worst, idx = compare_jet_with_fd(jet, fn)
        assert worst < 1e-5, (z, idx, worst)


# -- property-based algebra ---------------------------------------------------

_coeff = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)


@st.composite
def jets(draw, dim=2, min_value=0.0):
    sp = jet_space(dim)
    re = draw(st.lists(_coeff, min_size=sp.size, max_size=sp.size))
    im = draw(st.lists(_coeff, min_size=sp.size, max_size=sp.size))
    c = np.array(re) + 1j * np.array(im)
    if min_value > 0.0 and abs(c[0]) < min_value:
        c[0] = min_value * (1.0 + 1.0j)
    return Jet(dim, (0.1, -0.2), c)


@settings(max_examples=40, deadline=None)
@given(jets(), jets(), jets())
def test_ring_axioms(a, b, c):
    scale = 1.0 + max(np.max(np.abs(j.coeffs)) for j in (a, b, c)) ** 3
    assert np.max(np.abs(((a + b) + c).coeffs - (a + (b + c)).coeffs)) < 1e-13 * scale
    assert np.max(np.abs((a * b).coeffs - (b * a).coeffs)) < 1e-13 * scale
    assert np.max(np.abs(((a * b) * c).coeffs - (a * (b * c)).coeffs)) < 1e-12 * scale
    assert (
        np.max(np.abs((a * (b + c)).coeffs - (a * b + a * c).coeffs)) < 1e-12 * scale
    )


@settings(max_examples=40, deadline=None)
@given(jets(min_value=0.5))
def test_reciprocal_roundtrip(a):
    one = a * a.reciprocal()
    target = np.zeros_like(one.coeffs)
    target[0] = 1.0
    scale = 1.0 + np.max(np.abs(a.coeffs)) ** 5
    assert np.max(np.abs(one.coeffs - target)) < 1e-11 * scale


@settings(max_examples=40, deadline=None)
@given(jets(), jets())
def test_conjugation_is_multiplicative(a, b):
    lhs = (a * b).conj()
    rhs = a.conj() * b.conj()
    scale = 1.0 + np.max(np.abs(a.coeffs)) * np.max(np.abs(b.coeffs))
    assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-13 * scale


@settings(max_examples=30, deadline=None)
@given(jets(), jets())
def test_leibniz_rule(a, b):
    lhs = (a * b).partial_z(0)
    rhs = a.partial_z(0) * b + a * b.partial_z(0)
    scale = 1.0 + np.max(np.abs(a.coeffs)) * np.max(np.abs(b.coeffs))
    assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-12 * scale
