import os

import numpy as np
import pytest
from scipy import sparse

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def data_path(name):
    return os.path.join(DATA_DIR, name)


@pytest.fixture
def worked_dense():
    """The hand-checkable 3x2 system: GGS solves it in exactly 2 steps."""
    return np.array([[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]], order="F")


@pytest.fixture
def worked_csc(worked_dense):
    return sparse.csc_array(worked_dense)


@pytest.fixture
def worked_rhs():
    return np.array([1.0, 2.0, 3.0])
