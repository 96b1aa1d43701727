import logging
from typing import Dict

from app.controllers.graph.GraphController import GraphController
from app.models.instance.InstanceModel import RngSeed
from app.models.recovery.RecoveryModel import BoostRequest, PartialSolution, RecoverRequest
from app.models.subiso.SubIsoModel import SearchBudget
from app.services.graph_core import Permutation
from app.services.recovery import RecoveryParams, boost, evaluate, recover
from app.services.test_family import TestFamily

logger = logging.getLogger(__name__)


class RecoveryController:
    """End-to-end recovery and boosting from a supplied partial map"""

    @staticmethod
    def recover(request: RecoverRequest) -> Dict:
        try:
            family = TestFamily.from_document(request.family)
            g0 = GraphController.to_graph(request.g0)
            g1 = GraphController.to_graph(request.g1)
            params = RecoveryParams(
                family=family,
                match_threshold=request.threshold,
                seed=RngSeed(master=request.seed),
                budget=request.budget or SearchBudget.default(),
                scan_order=request.scan_order,
            )
            truth = Permutation(request.truth) if request.truth is not None else None
            logger.info(f"Recovering n={request.n} with {len(family)} family members")
            pi, report = recover(g0, g1, params, request.n, request.p, request.gamma, truth=truth)
            data = {"permutation": list(pi.image) if pi is not None else None, "report": report}
            if pi is None:
                return {"status": "partial", "message": "matching seeded no vertices", "data": data}
            status = "partial" if report.match.exhausted_members else "success"
            return {"status": status, "data": data}
        except Exception as e:
            logger.error(f"Error in recover: {str(e)}")
            return {"status": "error", "message": f"Recovery failed: {str(e)}"}

    @staticmethod
    def boost(request: BoostRequest) -> Dict:
        try:
            g0 = GraphController.to_graph(request.g0)
            g1 = GraphController.to_graph(request.g1)
            partial = PartialSolution(n=request.n, mapping=dict(request.seeds))
            truth = Permutation(request.truth) if request.truth is not None else None
            logger.info(f"Boosting from {partial.defined_count} seeds, scan {request.scan_order}")
            pi, report = boost(
                g0, g1, partial, request.n, request.p, request.gamma, truth=truth,
                delta=request.delta, delta_prime=request.delta_prime, scan_order=request.scan_order,
            )
            data = {"permutation": list(pi.image), "report": report}
            if truth is not None:
                data["metrics"] = evaluate(pi, truth, g0, g1)
            return {"status": "success", "data": data}
        except Exception as e:
            logger.error(f"Error in boost: {str(e)}")
            return {"status": "error", "message": f"Boosting failed: {str(e)}"}
