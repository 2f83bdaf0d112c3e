import pytest

from warpquery import counters


@pytest.fixture(autouse=True)
def _fresh_counters():
    counters.reset()
    yield
