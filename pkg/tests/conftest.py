import pytest
from flint import fmpq
from hypothesis import HealthCheck, settings

from carext.boundary import boundary_map
from carext.curves import lc_witness
from carext.exact import RationalPoint
from carext.instances import identity_instance, mobius_instance, polynomial_instance

settings.register_profile("carext", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("carext")


class Setup:
    """An instance with its boundary map, shared across a test module."""

    def __init__(self, inst):
        self.inst = inst
        self.J = inst.curve
        self.W = lc_witness(self.J)
        self.bm = boundary_map(inst.phi, self.J, self.W)


@pytest.fixture(scope="session")
def identity_setup():
    return Setup(identity_instance())


@pytest.fixture(scope="session")
def mobius_setup():
    return Setup(mobius_instance(RationalPoint(fmpq(1, 4))))


@pytest.fixture(scope="session")
def polynomial_setup():
    return Setup(polynomial_instance(RationalPoint(fmpq(1, 4))))
