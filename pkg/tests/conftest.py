import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_iq(rng, n, precision=None):
    from gnssperf.buffers import IqBuffer, Precision

    precision = precision or Precision.SINGLE
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return IqBuffer(z.astype(precision.complex_dtype), 1.0, precision)
