import functools

import pytest

from emden import SystemParams, find_threshold


@functools.lru_cache(maxsize=None)
def cached_threshold(n, p, bisect_tol=1e-8, r_max=1e3):
    return find_threshold(SystemParams(n, p), bisect_tol=bisect_tol, r_max=r_max)


@pytest.fixture
def threshold():
    return cached_threshold
