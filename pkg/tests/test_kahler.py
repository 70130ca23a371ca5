"""Bergman metric, curvature routes, sectional curvature, covariant calculus."""

import numpy as np
import pytest

from bergman_lab.cjet import constant_jet, coordinate_jets, squared_norm_jet
from bergman_lab.domains import affine_pushforward, kernel_ball
from bergman_lab.errors import DegeneratePlane, NotPositiveDefinite
from bergman_lab.fields import field_from_constant, real_field
from bergman_lab.kahler import (
    BergmanMetricField,
    bergman_metric,
    curvature_hessian,
    curvature_kobayashi,
    curvature_symmetry_residual,
    hol_sectional,
)

from conftest import interior_points


def test_metric_at_center():
    for n in (2, 3):
        m = bergman_metric(kernel_ball(n, (0.0,) * n).log())
        assert np.allclose(m.g, (n + 1) * np.eye(n), atol=1e-14)
        assert np.allclose(m.g_inv @ m.g, np.eye(n), atol=1e-13)


def test_metric_closed_form_off_center():
    # closed-form Hessian of -(n+1) log(1-|z|^2) at (0.5, 0)
    m = bergman_metric(kernel_ball(2, (0.5, 0.0)).log())
    s = 0.75
    assert m.g[0, 0].real == pytest.approx(3.0 * (1.0 / s + 0.25 / s ** 2), rel=1e-12)
    assert m.g[1, 1].real == pytest.approx(3.0 / s, rel=1e-12)
    assert abs(m.g[0, 1]) < 1e-14


def test_metric_dg_index_symmetry():
    m = bergman_metric(kernel_ball(2, (0.3, 0.2 - 0.4j)).log())
    # d_r g_{jk} = d_j g_{rk}: holomorphic derivatives of log K commute
    assert np.max(np.abs(m.dg - np.transpose(m.dg, (1, 0, 2)))) < 1e-13


def test_not_positive_definite_detected():
    # -log K of the ball has a negative-definite Hessian
    jet = -1.0 * kernel_ball(2, (0.1, 0.0)).log()
    with pytest.raises(NotPositiveDefinite):
        bergman_metric(jet)


def test_curvature_routes_agree_on_ball():
    rng = np.random.default_rng(11)
    for z in interior_points(rng, 2, 4, rmax=0.8):
        kj = kernel_ball(2, z)
        m = bergman_metric(kj.log())
        Rh = curvature_hessian(m)
        Rk = curvature_kobayashi(kj, m)
        assert Rh.source == "hessian_route"
        assert Rk.source == "kobayashi_route"
        diff = np.max(np.abs(Rh.R - Rk.R)) / (1.0 + np.max(np.abs(Rh.R)))
        assert diff < 1e-9
        assert curvature_symmetry_residual(Rk) < 1e-12 * (1 + np.max(np.abs(Rk.R)))
        assert curvature_symmetry_residual(Rh) < 1e-12 * (1 + np.max(np.abs(Rh.R)))


def test_flat_model_zero_curvature():
    # synthetic log K = |z|^2: constant metric jets, so curvature cancels
    jet = squared_norm_jet((0.4, -0.2 + 0.1j))
    m = bergman_metric(jet)
    assert np.allclose(m.g, np.eye(2), atol=1e-15)
    R = curvature_hessian(m)
    assert np.max(np.abs(R.R)) < 1e-14


def test_hol_sectional_constant_on_ball():
    rng = np.random.default_rng(5)
    for n in (2, 3):
        for z in interior_points(rng, n, 5, rmax=0.8):
            kj = kernel_ball(n, z)
            m = bergman_metric(kj.log())
            R = curvature_kobayashi(kj, m)
            Z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            k = hol_sectional(m, R, Z)
            assert abs(k + 4.0 / (n + 1)) < 1e-10


def test_hol_sectional_scale_invariance():
    kj = kernel_ball(2, (0.4, 0.1))
    m = bergman_metric(kj.log())
    R = curvature_kobayashi(kj, m)
    Z = np.array([0.3 + 1j, -0.2])
    k1 = hol_sectional(m, R, Z)
    k2 = hol_sectional(m, R, 2.0 * Z)
    k3 = hol_sectional(m, R, (0.7 - 0.3j) * Z)
    assert k1 == pytest.approx(k2, abs=1e-13)
    assert k1 == pytest.approx(k3, abs=1e-13)
    with pytest.raises(DegeneratePlane):
        hol_sectional(m, R, np.zeros(2))


def test_affine_image_curvature_invariant():
    # biholomorphic invariance: diag(2,1) image of the ball keeps k = -4/3
    from bergman_lab.domains import AffineMap, DomainSpec

    spec = DomainSpec(
        kind="affine_image", dim=2, affine=AffineMap(((2, 0), (0, 1)), (0, 0))
    )
    for z in [(0.0, 0.0), (0.8, 0.3), (-0.5, 0.25j)]:
        kj = affine_pushforward(spec, z)
        m = bergman_metric(kj.log())
        R = curvature_kobayashi(kj, m)
        assert hol_sectional(m, R, (1.0, 0.4)) == pytest.approx(-4.0 / 3.0, abs=1e-10)


def test_covariant_derivative_center_constant_fields():
    mf = BergmanMetricField(kernel_ball(2, (0.0, 0.0)).log())
    X = field_from_constant((1.0, 0.3j), (0.0, 0.0))
    Y = field_from_constant((0.2, -1.0), (0.0, 0.0))
    d = mf.covariant_derivative(X, Y)
    assert np.max(np.abs(d.h_values())) < 1e-15


def _poly_field(rng, base, mf):
    zs, _ = coordinate_jets(base)
    comps = []
    for _ in range(2):
        acc = constant_jet(complex(rng.standard_normal(), rng.standard_normal()), base)
        for zj in zs:
            acc = acc + zj * complex(rng.standard_normal(), rng.standard_normal())
        comps.append(acc)
    return real_field(comps)


def test_metric_compatibility_and_torsion_free():
    rng = np.random.default_rng(2)
    for z in interior_points(rng, 2, 3, rmax=0.7):
        mf = BergmanMetricField(kernel_ball(2, z).log())
        X, Y, Z = (_poly_field(rng, z, mf) for _ in range(3))
        lhs = X.apply(mf.metric_bilinear(Y, Z)).value.real
        rhs = mf.metric_value(mf.covariant_derivative(X, Y), Z) + mf.metric_value(
            Y, mf.covariant_derivative(X, Z)
        )
        assert abs(lhs - rhs) < 1e-9 * (1.0 + abs(lhs))
        t = mf.covariant_derivative(X, Y) - mf.covariant_derivative(Y, X) - X.bracket(Y)
        assert np.max(np.abs(t.h_values())) < 1e-8


def test_operator_route_matches_tensor_route():
    z = (0.35, -0.2)
    kj = kernel_ball(2, z)
    mf = BergmanMetricField(kj.log())
    Z = (0.8, 0.5 - 0.4j)
    X = field_from_constant(Z, z)
    k_op = mf.sectional(X, X.J())
    m = bergman_metric(kj.log())
    k_tensor = hol_sectional(m, curvature_kobayashi(kj, m), Z)
    assert k_op == pytest.approx(k_tensor, abs=1e-10)
