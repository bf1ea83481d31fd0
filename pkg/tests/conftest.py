import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1234))


def random_agreement(rng, h, w, n_observers=12):
    from salientrank.core import AgreementMap

    return AgreementMap(
        rng.integers(0, n_observers + 1, size=(h, w)), n_observers=n_observers
    )
