import pytest

from infill_stub import StubInfillServer


@pytest.fixture
def stub_infill():
    server = StubInfillServer()
    yield server
    server.close()
