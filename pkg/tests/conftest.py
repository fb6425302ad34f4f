import numpy as np
import pytest

from koba.domains import ball, ellipsoid, graph_domain, profile_domain
from koba.moduli import LinearModulus, LogFamilyModulus


@pytest.fixture(scope="session")
def disc():
    return ball(1)


@pytest.fixture(scope="session")
def ball2():
    return ball(2)


@pytest.fixture(scope="session")
def ellipsoid21():
    return ellipsoid([2.0, 1.0])


@pytest.fixture(scope="session")
def log_graph():
    return graph_domain(LogFamilyModulus(1.0), n=2)


@pytest.fixture(scope="session")
def linear_profile():
    return profile_domain(LinearModulus(1.0), alpha=1.0, tau=0.25)


def interior_points(domain, count, seed):
    """Uniform-ish interior samples by rejection inside the bounding ball."""
    rng = np.random.default_rng(seed)
    dim = 2 * domain.n
    out = []
    while len(out) < count:
        pts = domain.anchor + domain.bounding_radius * (
            2.0 * rng.random((4 * count, dim)) - 1.0
        )
        pts = pts[np.asarray(domain.rho(pts)) < 0.0]
        out.extend(pts)
    return np.asarray(out[:count])
