"""Boundary scans: level location, extrapolation, invariants along rays."""

import math

import numpy as np
import pytest

from bergman_lab.asympt import (
    RaySpec,
    geometric_epsilons,
    locate_level,
    scan,
)
from bergman_lab.asympt import _fit_limit  # synthetic-fit oracle check
from bergman_lab.domains import defining_function
from bergman_lab.errors import InsufficientRows, RootNotBracketed


def test_locate_level_closed_form(ball2):
    a = ball2.phi_scale()
    eps = 0.3
    z = locate_level(ball2, (1.0, 0.0), eps)
    assert abs(z[0]) == pytest.approx(math.sqrt(1.0 - eps / a), rel=1e-12)
    phi = defining_function(ball2.kernel(z).jet).value.real
    assert abs(phi + eps) < 1e-12 * (1 + eps)


def test_locate_level_series(reinhardt40):
    z = locate_level(reinhardt40, (1.0, 1.0), 0.5)
    phi = defining_function(reinhardt40.kernel(z, check_tail=False).jet).value.real
    assert abs(phi + 0.5) < 1e-10


def test_locate_level_too_deep(ball2):
    a = ball2.phi_scale()
    with pytest.raises(RootNotBracketed):
        locate_level(ball2, (1.0, 0.0), a + 0.1)  # deeper than the anchor value


def test_synthetic_linear_fit_exact():
    eps = np.array([0.4, 0.3, 0.2, 0.1])
    vals = -1.25 + 3.0 * eps
    limit, resid = _fit_limit(eps, vals, quadratic=False)
    assert limit == pytest.approx(-1.25, abs=1e-13)
    assert resid < 1e-13


def test_geometric_epsilons():
    grid = geometric_epsilons(0.4, 0.05, 0.7)
    assert grid[0] == 0.4
    assert grid[-1] == pytest.approx(0.05)
    assert all(b < a for a, b in zip(grid, grid[1:]))
    with pytest.raises(ValueError):
        geometric_epsilons(0.1, 0.4)


def test_rayspec_validation():
    with pytest.raises(ValueError):
        RaySpec(anchor=(0, 0), direction=(1, 0), epsilons=())
    with pytest.raises(ValueError):
        RaySpec(anchor=(0, 0), direction=(1, 0), epsilons=(0.1, 0.2))
    with pytest.raises(ValueError):
        RaySpec(anchor=(0, 0), direction=(1, 0), epsilons=(0.2, 0.1), plane="bogus")


def test_ball_scan_constant_columns(ball2):
    ray = RaySpec(
        anchor=(0, 0),
        direction=(0.8, 0.6),
        epsilons=geometric_epsilons(0.4, 1e-3, 0.5),
        plane="horizontal_random",
        seed=21,
    )
    rep = scan(ball2, ray)
    kh = np.array([r.k_g_horizontal for r in rep.rows])
    k0 = np.array([r.k_g_sigma0 for r in rep.rows])
    assert np.var(kh / np.mean(kh)) < 1e-12
    assert np.var(k0 / np.mean(k0)) < 1e-12
    assert rep.passed
    assert rep.extrapolated_horizontal == pytest.approx(-4.0 / 3.0, abs=1e-6)
    # rows sorted by decreasing epsilon
    eps = [r.epsilon for r in rep.rows]
    assert eps == sorted(eps, reverse=True)


def test_ball_scan_invariants(ball2):
    ray = RaySpec(
        anchor=(0, 0),
        direction=(1.0, 0.0),
        epsilons=geometric_epsilons(0.3, 1e-3, 0.6),
        plane="sigma0",
        seed=2,
    )
    rep = scan(ball2, ray)
    last = rep.rows[-1]
    # phi/f -> 1 and f^2 phi h -> 0 at the boundary
    assert abs(last.phi_over_f - 1.0) < 10.0 * last.epsilon
    assert abs(last.f2_phi_h) < 10.0 * last.epsilon
    # intermediate combinations approach their limits
    assert rep.extrapolated_L1 == pytest.approx(8.0 / 3.0, abs=1e-2)
    assert rep.extrapolated_L2 == pytest.approx(-16.0 / 3.0, abs=1e-2)


def test_ball3_sigma0_limit(ball3):
    ray = RaySpec(
        anchor=(0, 0, 0),
        direction=(1.0, 0.3, -0.2),
        epsilons=geometric_epsilons(0.3, 1e-3, 0.5),
        plane="sigma0",
        seed=5,
    )
    rep = scan(ball3, ray)
    assert rep.extrapolated_sigma0 == pytest.approx(-1.0, abs=1e-6)
    assert rep.extrapolated_L1 == pytest.approx(2.0, abs=1e-2)
    assert rep.extrapolated_L2 == pytest.approx(-4.0, abs=1e-2)


def test_fixed_plane_scan(ball2):
    ray = RaySpec(
        anchor=(0, 0),
        direction=(1.0, 0.2),
        epsilons=(0.3, 0.2, 0.1),
        plane="horizontal_fixed",
        fixed_direction=(1.0,),
        seed=0,
    )
    rep = scan(ball2, ray)
    assert rep.passed


def test_series_scan_drops_unconverged_rows(reinhardt40):
    # degree 40 cannot resolve the deep rows; they must drop with warnings
    ray = RaySpec(
        anchor=(0, 0),
        direction=(1.0, 1.0),
        epsilons=(0.6, 0.5, 0.42, 0.05),
        plane="sigma0",
        seed=1,
    )
    rep = scan(reinhardt40, ray)
    assert len(rep.rows) == 3
    assert any("0.05" in w for w in rep.warnings)


def test_insufficient_rows(reinhardt40):
    ray = RaySpec(
        anchor=(0, 0),
        direction=(1.0, 1.0),
        epsilons=(0.08, 0.05),
        plane="sigma0",
        seed=1,
    )
    with pytest.raises(InsufficientRows):
        scan(reinhardt40, ray)


def test_scan_jobs_deterministic(ball2):
    ray = RaySpec(
        anchor=(0, 0),
        direction=(1.0, 0.5),
        epsilons=geometric_epsilons(0.3, 0.02, 0.5),
        plane="horizontal_random",
        seed=3,
    )
    serial = scan(ball2, ray)
    parallel = scan(ball2, ray, jobs=2)
    assert serial.rows == parallel.rows
    assert serial.extrapolated_horizontal == parallel.extrapolated_horizontal
