import pytest

from opalg.sampling import rng_for


@pytest.fixture
def rng(request):
    """A generator keyed by the test's own name, so tests do not share streams."""
    return rng_for(20240611, request.node.name)
