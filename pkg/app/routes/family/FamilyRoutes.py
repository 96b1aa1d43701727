from fastapi import APIRouter, HTTPException, Query, status

from app.controllers.family.FamilyController import FamilyController
from app.models.family.FamilyModel import FamilyBuildRequest, FamilyChoice, FamilyDocument

router = APIRouter(prefix="/families", tags=["families"])


@router.post("", response_model=FamilyDocument)
def build_family(request: FamilyBuildRequest):
    """Build a certified test family; check `complete` for a short family"""
    result = FamilyController.build(request)
    if result["status"] == "error":
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=result["message"])
    return result["data"]


@router.get("/choose", response_model=FamilyChoice)
def choose_parameters(
    n: int = Query(..., ge=3, description="Vertex count"),
    p: float = Query(..., gt=0.0, lt=1.0, description="Base edge probability"),
    gamma: float = Query(1.0, gt=0.0, le=1.0, description="Subsample probability"),
):
    """Family size and degree for (n, p, gamma), or the reason none fits"""
    result = FamilyController.choose(n, p, gamma)
    if result["status"] == "error":
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=result["message"])
    return result["data"]
