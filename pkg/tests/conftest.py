import numpy as np
import pytest

from grouptrellis import TestMatrix

# 3 tests x 6 elements worked example used throughout the docs and tests
TOY_ENTRIES = np.array(
    [
        [1, 1, 0, 1, 0, 0],
        [0, 1, 1, 0, 1, 0],
        [1, 0, 1, 0, 0, 1],
    ],
    dtype=np.uint8,
)


@pytest.fixture
def toy_matrix():
    return TestMatrix(TOY_ENTRIES.copy())
