import numpy as np
import pytest

from wignerlab import make_phase_space
from wignerlab.hilbert import CompositeSystem
from wignerlab.tolerances import TolerancePolicy


@pytest.fixture(scope="session")
def lab64():
    """Default d=1 laboratory: generous domain, unit covariance."""
    return make_phase_space(1, 64, 10.0, [[1.0]])


@pytest.fixture(scope="session")
def lab32():
    # n = 32 with unit covariance cannot satisfy both box tails at 1e-12
    tol = TolerancePolicy(domain_tail_mass=1e-10, imaginary_residue=1e-6)
    return make_phase_space(1, 32, 7.0, [[1.0]], tol)


@pytest.fixture(scope="session")
def lab_quartic():
    """Largest grid stable under the quartic flow at dt = 1e-3.

    The domain edge carries the transform's static e^(-L^2/4) floor, so the
    escape guard and imaginary-residue policy are opened up accordingly.
    """
    tol = TolerancePolicy(boundary_mass=1e-3, imaginary_residue=1e-7)
    return make_phase_space(1, 64, 6.0, [[0.5]], tol)


@pytest.fixture(scope="session")
def lab_cat():
    """Roomier box for cat states (needs slack beyond the hump separation)."""
    tol = TolerancePolicy(boundary_mass=5e-3, imaginary_residue=1e-6)
    return make_phase_space(1, 64, 8.0, [[1.0]], tol)


@pytest.fixture(scope="session")
def spec32c():
    """Per-factor spec for two-mode composites."""
    tol = TolerancePolicy(imaginary_residue=1e-5, domain_tail_mass=1e-9,
                          boundary_mass=1e-4)
    return make_phase_space(1, 32, 7.2, [[1.0]], tol)


@pytest.fixture(scope="session")
def sys2(spec32c):
    return CompositeSystem((("A", spec32c), ("B", spec32c)))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
