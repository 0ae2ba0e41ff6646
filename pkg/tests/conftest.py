import os

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")
os.environ.setdefault("LEBESGUE_LAB_THREADS", "2")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
