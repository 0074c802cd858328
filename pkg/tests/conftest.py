import numpy as np
import pytest

from squarepeg import Curve
from squarepeg.acceptance import AcceptanceSuite


@pytest.fixture(scope="session")
def suite():
    """Shared acceptance suite, so expensive enumerations run once per session."""
    return AcceptanceSuite()


@pytest.fixture(scope="session")
def curves(suite):
    return {label: Curve(spec) for label, spec in suite.constructions().items()}


@pytest.fixture(scope="session")
def reports(suite):
    def get(label):
        return suite.report(label, suite.constructions()[label])[0]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
