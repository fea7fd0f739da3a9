import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kdqlab.protocol import DriveParams, make_initial_state  # noqa: E402

LATTICE = [k * math.pi / 6 for k in range(13)]  # Omega t values


@pytest.fixture
def drive():
    return DriveParams.dimensionless()


@pytest.fixture
def plus(drive):
    return make_initial_state(drive, "plus")


@pytest.fixture
def minus(drive):
    return make_initial_state(drive, "minus")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
