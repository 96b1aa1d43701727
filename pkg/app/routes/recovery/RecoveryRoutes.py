from fastapi import APIRouter, HTTPException, status

from app.controllers.recovery.RecoveryController import RecoveryController
from app.models.recovery.RecoveryModel import BoostRequest, RecoverRequest

router = APIRouter(tags=["recovery"])


@router.post("/recover")
def recover(request: RecoverRequest):
    """Test-graph matching followed by boosting"""
    result = RecoveryController.recover(request)
    if result["status"] == "error":
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=result["message"])
    return {"status": result["status"], **result["data"]}


@router.post("/boost")
def boost(request: BoostRequest):
    """Complete and fix a partial map into a permutation"""
    result = RecoveryController.boost(request)
    if result["status"] == "error":
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=result["message"])
    return {"status": result["status"], **result["data"]}
