import logging
from typing import Dict

from app.config import settings
from app.controllers.graph.GraphController import GraphController
from app.models.distinguish.DistinguishModel import DistinguishRequest
from app.models.instance.InstanceModel import RngSeed
from app.services.distinguisher import DistinguishParams, decide
from app.services.test_family import TestFamily

logger = logging.getLogger(__name__)


class DistinguishController:
    """Structured-versus-null decisions on a graph pair"""

    @staticmethod
    def distinguish(request: DistinguishRequest) -> Dict:
        try:
            family = TestFamily.from_document(request.family)
            g0 = GraphController.to_graph(request.g0)
            g1 = GraphController.to_graph(request.g1)
            extra = {}
            if request.budget is not None:
                extra["budget"] = request.budget
            params = DistinguishParams(
                family=family,
                n=request.n,
                p=request.p,
                gamma=request.gamma,
                threshold_policy=request.policy,
                calibration_trials=request.calibration_trials or settings.CALIBRATION_TRIALS,
                calibration_k=request.calibration_k if request.calibration_k is not None else settings.CALIBRATION_K,
                calibration_seed=RngSeed(master=request.seed, labels=("calibration",)),
                **extra,
            )
            logger.info(f"Distinguishing with {len(family)} members, policy {request.policy}")
            stat = decide(g0, g1, params)
            logger.info(f"Decision {stat.decision}: P={stat.P} threshold={stat.threshold}")
            return {"status": "partial" if stat.partial else "success", "data": stat}
        except Exception as e:
            logger.error(f"Error in distinguish: {str(e)}")
            return {"status": "error", "message": f"Distinguishing failed: {str(e)}"}
