from fastapi import APIRouter, HTTPException, status

from app.controllers.bench.BenchController import BenchController
from app.models.harness.HarnessModel import BenchResponse, ExperimentConfig

router = APIRouter(prefix="/bench", tags=["bench"])


@router.post("", response_model=BenchResponse)
def run_bench(config: ExperimentConfig):
    """Run an experiment in-process; results come back instead of being written to disk"""
    result = BenchController.run(config.model_copy(update={"out": None}))
    if result["status"] == "error":
        code = status.HTTP_400_BAD_REQUEST if result.get("kind") == "config" else status.HTTP_500_INTERNAL_SERVER_ERROR
        raise HTTPException(status_code=code, detail=result["message"])
    return result["data"]
