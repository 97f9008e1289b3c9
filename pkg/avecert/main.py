"""FastAPI service exposing certification, solving and the enumeration oracle."""
import logging
from typing import Any, Dict, List, Optional

from fastapi import Body, Depends, FastAPI, Query, Request, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from slowapi import Limiter
from slowapi.errors import RateLimitExceeded
from slowapi.middleware import SlowAPIMiddleware
from slowapi.util import get_remote_address

from avecert.core.config import settings
from avecert.core.errors import (
    AveError,
    DimensionMismatch,
    DimensionOverflow,
    InvalidMatrix,
    MissingRightHandSide,
    ParseError,
    SingularMatrix,
)
from avecert.core.security import verify_api_key
from avecert.models.schemas import Certificate, OracleReport, SolveOptions
from avecert.services.certify import certify_instance
from avecert.services.instances import parse_instance_data
from avecert.services.solve import oracle_instance, solve_instance

logging.basicConfig(
    level=settings.log_level,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

app = FastAPI(
    title=settings.PROJECT_NAME,
    version=settings.VERSION,
    debug=settings.DEBUG
)

# enumeration cost is exponential in the order, so every computing endpoint is throttled
limiter = Limiter(key_func=get_remote_address)
app.state.limiter = limiter
app.add_middleware(SlowAPIMiddleware)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

ERROR_STATUS = {
    ParseError: status.HTTP_422_UNPROCESSABLE_ENTITY,
    DimensionMismatch: status.HTTP_422_UNPROCESSABLE_ENTITY,
    InvalidMatrix: status.HTTP_422_UNPROCESSABLE_ENTITY,
    MissingRightHandSide: status.HTTP_422_UNPROCESSABLE_ENTITY,
    SingularMatrix: status.HTTP_400_BAD_REQUEST,
    DimensionOverflow: status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
}


@app.exception_handler(RateLimitExceeded)
async def rate_limit_handler(request: Request, exc: RateLimitExceeded):
    """JSON body for throttled requests."""
    return JSONResponse(
        status_code=status.HTTP_429_TOO_MANY_REQUESTS,
        content={
            "error": "Rate limit exceeded",
            "message": f"You have exceeded the rate limit of {settings.RATE_LIMIT}. Please try again later.",
        }
    )


@app.exception_handler(AveError)
async def ave_error_handler(request: Request, exc: AveError):
    """Map library errors onto 4xx responses."""
    code = next((c for kind, c in ERROR_STATUS.items() if isinstance(exc, kind)), status.HTTP_400_BAD_REQUEST)
    logger.info(f"{request.url.path} rejected with {code}: {exc}")
    return JSONResponse(status_code=code, content={"error": type(exc).__name__, "detail": str(exc)})


@app.on_event("startup")
async def startup_event():
    logger.info(
        f"{settings.PROJECT_NAME} {settings.VERSION} ready: enumeration cap {settings.ENUM_CAP}, "
        f"Kronecker cap {settings.KRON_CAP}, rate limit {settings.RATE_LIMIT}"
    )


@app.get("/", tags=["Health"])
async def root():
    """Root endpoint for health check."""
    return {
        "message": "avecert unique-solvability service",
        "version": settings.VERSION,
        "status": "healthy"
    }


@app.get("/health", tags=["Health"])
async def health_check():
    """Health check endpoint."""
    return {
        "status": "healthy",
        "enum_cap": settings.ENUM_CAP,
        "kron_cap": settings.KRON_CAP,
    }


@app.post(
    f"{settings.API_V1_PREFIX}/check",
    response_model=List[Certificate],
    tags=["Certification"]
)
@limiter.limit(settings.RATE_LIMIT)
def check(
    request: Request,
    bundle: Dict[str, Any] = Body(...),
    api_key: str = Depends(verify_api_key)
) -> List[Certificate]:
    """
    Evaluate every sufficient condition on an instance bundle.

    - Validates API key
    - Parses the bundle (422 on malformed input)
    - Returns one certificate per condition, INAPPLICABLE ones included
    """
    inst = parse_instance_data(bundle)
    return certify_instance(inst)


@app.post(f"{settings.API_V1_PREFIX}/solve", tags=["Solving"])
@limiter.limit(settings.RATE_LIMIT)
def solve(
    request: Request,
    bundle: Dict[str, Any] = Body(...),
    max_iterations: Optional[int] = Query(None, ge=1),
    residual_tolerance: Optional[float] = Query(None, gt=0),
    api_key: str = Depends(verify_api_key)
):
    """
    Solve an instance with a right-hand side.

    Non-convergence is reported through ``converged = false``, not as an error.
    """
    inst = parse_instance_data(bundle)
    opts = SolveOptions.from_settings(max_iterations=max_iterations, residual_tolerance=residual_tolerance)
    result = solve_instance(inst, opts)
    return JSONResponse(content=result.model_dump(mode="json"))


@app.post(
    f"{settings.API_V1_PREFIX}/oracle",
    response_model=List[OracleReport],
    tags=["Solving"]
)
@limiter.limit(settings.RATE_LIMIT)
def oracle(
    request: Request,
    bundle: Dict[str, Any] = Body(...),
    api_key: str = Depends(verify_api_key)
) -> List[OracleReport]:
    """Enumerate every solution of a small instance, one report per column."""
    inst = parse_instance_data(bundle)
    return oracle_instance(inst)


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
