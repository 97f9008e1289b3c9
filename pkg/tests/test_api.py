"""Unit tests for FastAPI endpoints."""
import inspect

import numpy as np
import pytest
from fastapi.testclient import TestClient

from avecert.core.config import settings
from avecert.main import app
from avecert.services.reference_cases import GAVME_2X2, GAVME_3X3, GAVME_3X3_SOLUTION, SYLVESTER_SCALAR

# Create test client
client = TestClient(app)
HEADERS = {"X-API-Key": settings.API_KEY}


def bundle(inst):
    return inst.model_dump(mode="json", exclude_none=True)


@pytest.fixture(autouse=True)
def reset_rate_limit():
    """Every test starts with a fresh rate-limit window."""
    app.state.limiter.reset()
    yield


def test_read_root():
    """Test that GET / returns 200 and the service banner."""
    response = client.get("/")

    assert response.status_code == 200
    data = response.json()
    assert "message" in data
    assert "version" in data
    assert data["status"] == "healthy"
    assert "unique-solvability" in data["message"]


def test_health_check():
    """Test GET /health endpoint."""
    response = client.get("/health")

    assert response.status_code == 200
    data = response.json()
    assert data["status"] == "healthy"
    assert data["enum_cap"] == settings.ENUM_CAP
    assert data["kron_cap"] == settings.KRON_CAP


def test_check_certificates():
    """POST /check returns one certificate per condition."""
    response = client.post(f"{settings.API_V1_PREFIX}/check", json=bundle(GAVME_2X2), headers=HEADERS)

    assert response.status_code == 200
    certs = {c["condition_id"]: c for c in response.json()}
    assert certs["GAVME_SPECTRAL"]["verdict"] == "CERTIFIED"
    assert certs["GAVME_SPECTRAL"]["witnesses"]["rho_abs_AinvB"] == pytest.approx(0.38826, abs=1e-4)
    assert certs["CLASSIC_I"]["verdict"] == "NOT_CERTIFIED"


def test_check_missing_api_key():
    """Test that POST /check requires an API key."""
    response = client.post(f"{settings.API_V1_PREFIX}/check", json=bundle(GAVME_2X2))

    assert response.status_code == 401
    assert "detail" in response.json()


def test_check_invalid_api_key():
    """Test that POST /check rejects an invalid API key."""
    response = client.post(
        f"{settings.API_V1_PREFIX}/check",
        json=bundle(GAVME_2X2),
        headers={"X-API-Key": "invalid-key"}
    )

    assert response.status_code == 403
    assert "detail" in response.json()


def test_check_malformed_bundle():
    """A bundle without B is rejected with 422."""
    response = client.post(
        f"{settings.API_V1_PREFIX}/check",
        json={"type": "GAVE", "A": [[1.0]], "f": [1.0]},
        headers=HEADERS
    )

    assert response.status_code == 422
    assert response.json()["error"] == "ParseError"


def test_check_dimension_mismatch():
    response = client.post(
        f"{settings.API_V1_PREFIX}/check",
        json={"type": "GAVE", "A": [[1.0, 0.0], [0.0, 1.0]], "B": [[1.0]]},
        headers=HEADERS
    )

    assert response.status_code == 422
    assert response.json()["error"] == "DimensionMismatch"


def test_solve_gavme():
    """POST /solve returns the unique solution of the 3x3 GAVME."""
    response = client.post(f"{settings.API_V1_PREFIX}/solve", json=bundle(GAVME_3X3), headers=HEADERS)

    assert response.status_code == 200
    data = response.json()
    assert data["converged"] is True
    assert data["certificate_used"] == "GAVME_SPECTRAL"
    assert np.allclose(np.array(data["solution"]), GAVME_3X3_SOLUTION, atol=1e-8)


def test_solve_singular_a():
    response = client.post(
        f"{settings.API_V1_PREFIX}/solve",
        json={"type": "GAVE", "A": [[1.0, 2.0], [2.0, 4.0]], "B": [[0.0, 0.0], [0.0, 0.0]], "f": [1.0, 1.0]},
        headers=HEADERS
    )

    assert response.status_code == 400
    data = response.json()
    assert data["error"] == "SingularMatrix"
    assert "A is singular" in data["detail"]


def test_oracle_counts_solutions():
    """POST /oracle lists both solutions of x + 2|x| = 1."""
    response = client.post(f"{settings.API_V1_PREFIX}/oracle", json=bundle(SYLVESTER_SCALAR), headers=HEADERS)

    assert response.status_code == 200
    reports = response.json()
    assert len(reports) == 1
    assert reports[0]["solution_count"] == 2


def test_oracle_too_large():
    n = 21
    payload = {"type": "GAVE", "A": np.eye(n).tolist(), "B": np.zeros((n, n)).tolist(), "f": [1.0] * n}
    response = client.post(f"{settings.API_V1_PREFIX}/oracle", json=payload, headers=HEADERS)

    assert response.status_code == 413
    assert response.json()["error"] == "DimensionOverflow"


def test_check_non_ascii_api_key():
    """A key outside ASCII is rejected like any other wrong key."""
    response = client.post(
        f"{settings.API_V1_PREFIX}/check",
        json=bundle(GAVME_2X2),
        headers={"X-API-Key": "clé-invalide".encode("utf-8")}
    )

    assert response.status_code == 403


@pytest.mark.parametrize("query", ["max_iterations=0", "residual_tolerance=-1e-3", "residual_tolerance=0"])
def test_solve_rejects_out_of_range_options(query):
    response = client.post(f"{settings.API_V1_PREFIX}/solve?{query}", json=bundle(GAVME_3X3), headers=HEADERS)

    assert response.status_code == 422


def test_solve_accepts_iteration_cap():
    response = client.post(
        f"{settings.API_V1_PREFIX}/solve?max_iterations=1",
        json=bundle(GAVME_3X3),
        headers=HEADERS
    )

    assert response.status_code == 200
    assert max(response.json()["column_iterations"]) <= 1


@pytest.mark.parametrize("path", ["/check", "/solve", "/oracle"])
def test_computing_endpoints_run_in_threadpool(path):
    """Enumeration must not block the event loop, so the handlers are plain functions."""
    route = next(r for r in app.routes if getattr(r, "path", None) == f"{settings.API_V1_PREFIX}{path}")
    assert not inspect.iscoroutinefunction(route.endpoint)


def test_rate_limit():
    """Test that rate limiting kicks in on the computing endpoints."""
    limit_hit = False

    for i in range(40):
        response = client.post(
            f"{settings.API_V1_PREFIX}/check",
            json={"type": "GAVE", "A": [[2.0]], "B": [[1.0]], "f": [float(i)]},
            headers=HEADERS
        )

        if response.status_code == 429:
            limit_hit = True
            break
        else:
            assert response.status_code == 200, f"Request {i} failed with {response.status_code}"

    assert limit_hit, "Rate limit was never triggered! System allowed too many requests."
