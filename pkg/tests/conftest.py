import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from twistfol import gallery
from twistfol.maps import TwistMapSpec

settings.register_profile("twistfol", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("twistfol")

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="session")
def conjugated():
    """Shear-conjugated integrable map with rho(r) = r and its pushed foliation."""
    psi = gallery.shear_conjugator(0.05, 0.5)
    fmap, fol = gallery.integrable_family(conjugator=psi)
    return fmap, fol, psi


@pytest.fixture(scope="session")
def cubic_conjugated():
    rho = lambda r: np.asarray(r) + 0.5 * np.asarray(r) ** 3
    drho = lambda r: 1.0 + 1.5 * np.asarray(r) ** 2
    psi = gallery.shear_conjugator(0.05, 0.5)
    fmap, fol = gallery.integrable_family(rho, drho, psi)
    return fmap, fol


@pytest.fixture(scope="session")
def strange():
    return gallery.strange_twist_map()


@pytest.fixture(scope="session")
def linear_eps_params():
    """Strange parameters with the piecewise-linear eps(c) = |c|/(8 pi)."""
    k = 1.0 / (8.0 * np.pi)
    eps = lambda c: k * np.abs(np.asarray(c, float))

    def d_eps(c, side=None):
        c = np.asarray(c, float)
        s = np.where(c < 0, -1.0, 1.0) if side is None else np.asarray(side, float)
        return s * k + 0.0 * c

    def dd_eps(c, side=None):
        return 0.0 * np.asarray(c, float)

    return gallery.strange_params(epsilon=eps, d_epsilon=d_eps, dd_epsilon=dd_eps)


@pytest.fixture(scope="session")
def appendix_a():
    return gallery.appendix_a_family()


@pytest.fixture(scope="session")
def shear_map():
    """The integrable twist F(x, r) = (x + r, r) without extras."""
    return TwistMapSpec(lambda x, r: (np.asarray(x) + r, np.asarray(r) + 0.0 * np.asarray(x)),
                        lambda x, r: (np.asarray(x) - r, np.asarray(r) + 0.0 * np.asarray(x)),
                        name="shear")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
