from fastapi import APIRouter, HTTPException, status

from app.controllers.graph.GraphController import GraphController
from app.models.graph.GraphModel import GraphAnalysisRequest, GraphAnalysisResponse

router = APIRouter(prefix="/graphs", tags=["graphs"])


@router.post("/analyze", response_model=GraphAnalysisResponse)
def analyze_graph(request: GraphAnalysisRequest):
    """Density, connectivity, canonical form and strict-balance verdict of one graph"""
    result = GraphController.analyze(request)
    if result["status"] == "error":
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=result["message"])
    return result["data"]
