import logging
from collections import Counter
from typing import Dict

from app.config import settings
from app.models.graph.GraphModel import GraphAnalysisRequest, GraphAnalysisResponse, GraphPayload
from app.services.graph_core import (
    Graph,
    canonical_form,
    density,
    is_connected,
    is_strictly_balanced,
    make_graph,
)

logger = logging.getLogger(__name__)


class GraphController:
    """Conversions between wire payloads and graphs, and single-graph analysis"""

    @staticmethod
    def to_graph(payload: GraphPayload) -> Graph:
        return make_graph(payload.n, payload.edges)

    @staticmethod
    def to_payload(g: Graph) -> GraphPayload:
        return GraphPayload(n=g.n, edges=list(g.edges))

    @staticmethod
    def analyze(request: GraphAnalysisRequest) -> Dict:
        """Density, connectivity, degree histogram, canonical form and strict-balance verdict"""
        try:
            g = GraphController.to_graph(request.graph)
            logger.info(f"Analyzing graph n={g.n} m={g.m}")
            response = GraphAnalysisResponse(
                n=g.n,
                m=g.m,
                density=density(g).as_fraction() if g.n > 0 else None,
                connected=is_connected(g) if g.n > 0 else None,
                degree_histogram=dict(sorted(Counter(g.degrees()).items())),
                canonical=canonical_form(g) if g.n <= settings.CANONICAL_MAX_VERTICES else None,
                balance=is_strictly_balanced(g) if request.balance and g.n >= 2 else None,
            )
            return {"status": "success", "data": response}
        except Exception as e:
            logger.error(f"Error analyzing graph: {str(e)}")
            return {"status": "error", "message": f"Graph analysis failed: {str(e)}"}
