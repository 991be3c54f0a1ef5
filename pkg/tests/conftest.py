import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=200, deadline=None, derandomize=True)
settings.load_profile("default")

from sumuncertainty.core import RandomSource  # noqa: E402


@pytest.fixture
def rng():
    return RandomSource(20261016, 0)
