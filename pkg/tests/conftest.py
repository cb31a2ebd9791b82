import pytest
from hypothesis import HealthCheck, settings

from graphparse import build_english_model
from graphparse.engine import available_kernels

settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
    deadline=None,
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def english():
    return build_english_model()


@pytest.fixture(params=sorted(available_kernels()))
def kernel(request):
    return request.param
