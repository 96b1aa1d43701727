from fastapi import APIRouter, HTTPException, status

from app.controllers.instance.InstanceController import InstanceController
from app.models.instance.InstanceModel import InstanceRequest, InstanceResponse

router = APIRouter(prefix="/instances", tags=["instances"])


@router.post("", response_model=InstanceResponse)
def create_instance(request: InstanceRequest):
    """
    Sample a graph pair

    - **params**: n, p and gamma of the correlated model
    - **null**: draw two independent graphs instead of a correlated pair
    """
    result = InstanceController.generate(request)
    if result["status"] == "error":
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=result["message"])
    return result["data"]
