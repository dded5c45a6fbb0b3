from __future__ import annotations

import pytest

from finsler.jets import TangentPoint
from finsler.metrics import builtin_info, sample_points

ZOO = ["euclid", "polar", "riem-diag", "randers", "quartic"]


@pytest.fixture(scope="session")
def zoo_points():
    """Five seeded sample points per zoo metric, n = 2."""
    out = {}
    for name in ZOO:
        info = builtin_info(name)
        out[name] = (info, sample_points(2, 5, 7, info))
    return out


@pytest.fixture
def polar_point():
    return TangentPoint((2.0, 0.0), (1.0, 1.0))


@pytest.fixture
def randers_witness():
    info = builtin_info("randers")
    return info.field, info.witness_point
