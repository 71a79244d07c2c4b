import warnings

import numpy as np
import pytest

import critfield as cf


@pytest.fixture(scope="session")
def grid64():
    return cf.TorusGrid(8.0, 64)


@pytest.fixture(scope="session")
def grid256():
    return cf.TorusGrid(4.0, 256)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def make_solver_cfg(*args, **kwargs) -> cf.SolverConfig:
    """SolverConfig builder that silences the L/h sizing advisories."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return cf.SolverConfig(*args, **kwargs)
