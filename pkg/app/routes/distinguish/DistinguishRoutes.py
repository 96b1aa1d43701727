from fastapi import APIRouter, HTTPException, status

from app.controllers.distinguish.DistinguishController import DistinguishController
from app.models.distinguish.DistinguishModel import DistinguishRequest, Statistic

router = APIRouter(prefix="/distinguish", tags=["distinguish"])


@router.post("", response_model=Statistic)
def distinguish(request: DistinguishRequest):
    """Per-member statistics, their average, the threshold and the decision"""
    result = DistinguishController.distinguish(request)
    if result["status"] == "error":
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=result["message"])
    return result["data"]
