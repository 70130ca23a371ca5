import numpy as np
import pytest

from bergman_lab.domains import (
    AffineBallDomain,
    AffineMap,
    BallDomain,
    DomainSpec,
    ReinhardtDomain,
    perturbed_reinhardt_spec,
)


@pytest.fixture(scope="session")
def ball2():
    return BallDomain(2)


@pytest.fixture(scope="session")
def ball3():
    return BallDomain(3)


@pytest.fixture(scope="session")
def affine_domain():
    spec = DomainSpec(
        kind="affine_image",
        dim=2,
        affine=AffineMap(((2.0, 0.0), (0.0, 1.0)), (0.0, 0.0)),
    )
    return AffineBallDomain(spec)


@pytest.fixture(scope="session")
def reinhardt40():
    """Shipped perturbed Reinhardt domain at the default degree."""
    return ReinhardtDomain(perturbed_reinhardt_spec(degree=40, series_tol=1e-3))


@pytest.fixture(scope="session")
def reinhardt128():
    """High-degree model for deep-collar scans of the same domain."""
    return ReinhardtDomain(perturbed_reinhardt_spec(degree=128, series_tol=1e-8))


def interior_points(rng, n, count, rmax=0.7):
    """Random points in the ball of radius rmax (generic, away from axes)."""
    pts = []
    for _ in range(count):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        pts.append(tuple(v * rng.uniform(0.15, rmax)))
    return pts
