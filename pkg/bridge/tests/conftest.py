import pytest

pytest.importorskip("halluc_bridge")

from fastapi.testclient import TestClient  # noqa: E402

from halluc_bridge import StubBackend, create_app  # noqa: E402

from bridge_helpers import wait_ready  # noqa: E402


@pytest.fixture
def client():
    app = create_app(StubBackend())
    with TestClient(app) as c:
        wait_ready(c)
        yield c
