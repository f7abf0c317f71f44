import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

SEED = int(os.environ.get("DC_SEED", "20250809"))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(SEED)


def make_rng(salt: int = 0) -> random.Random:
    return random.Random(SEED + salt)
