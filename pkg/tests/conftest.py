import pytest

from levysim._backend import compiled_available

BACKENDS = ["python"] + (["cython"] if compiled_available() else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param
