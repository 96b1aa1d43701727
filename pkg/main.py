from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from app.config import settings

# Import all route modules
from app.routes.graph.GraphRoutes import router as graph_router
from app.routes.instance.InstanceRoutes import router as instance_router
from app.routes.family.FamilyRoutes import router as family_router
from app.routes.distinguish.DistinguishRoutes import router as distinguish_router
from app.routes.recovery.RecoveryRoutes import router as recovery_router
from app.routes.bench.BenchRoutes import router as bench_router
import logging

# Configure logging
logging.basicConfig(level=settings.LOG_LEVEL)
logger = logging.getLogger(__name__)

# Create FastAPI application
app = FastAPI(
    title=settings.APP_NAME,
    version=settings.VERSION,
    description="Correlated random graph matching: instance sampling, test-graph families, distinguishing and recovery",
    debug=settings.DEBUG
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include all routers
app.include_router(graph_router, prefix="/api/v1")
app.include_router(instance_router, prefix="/api/v1")
app.include_router(family_router, prefix="/api/v1")
app.include_router(distinguish_router, prefix="/api/v1")
app.include_router(recovery_router, prefix="/api/v1")
app.include_router(bench_router, prefix="/api/v1")


@app.on_event("startup")
async def startup_event():
    """Validate configuration on startup"""
    try:
        settings.validate_required()
        logger.info(f"✅ {settings.APP_NAME} {settings.VERSION} configuration valid")
    except ValueError as e:
        logger.error(f"❌ Invalid configuration:\n{str(e)}")
        raise


@app.get("/")
def read_root():
    """Root endpoint"""
    return {
        "message": "gmatch correlated graph matching API",
        "version": settings.VERSION,
        "status": "running",
        "features": [
            "Graph analysis (canonical form, strict balance)",
            "Correlated and null instance sampling",
            "Certified test-graph families",
            "Structured-versus-null distinguishing",
            "Test-graph matching and boosting",
            "Reproducible benchmarks"
        ]
    }


@app.get("/health")
def health_check():
    """Health check endpoint"""
    return {"status": "healthy"}


@app.exception_handler(Exception)
async def global_exception_handler(request, exc):
    logger.error(f"Unhandled error on {request.url.path}: {str(exc)}")
    return JSONResponse(
        status_code=500,
        content={"detail": "Internal server error"}
    )


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "main:app",
        **settings.get_server_config()
    )
