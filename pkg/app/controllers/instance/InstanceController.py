import logging
from pathlib import Path
from typing import Dict

from app.controllers.graph.GraphController import GraphController
from app.models.instance.InstanceModel import InstanceRequest, InstanceResponse, RngSeed
from app.services.gen_model import check_consistency, sample_null, sample_structured
from app.services.serialization import pretty_json, save_graph, save_permutation, write_text

logger = logging.getLogger(__name__)


class InstanceController:
    """Sampling of structured and null instance pairs"""

    @staticmethod
    def generate(request: InstanceRequest) -> Dict:
        try:
            seed = RngSeed(master=request.seed)
            logger.info(
                f"Sampling {'null' if request.null else 'structured'} instance "
                f"n={request.params.n} p={request.params.p} gamma={request.params.gamma} seed={request.seed}"
            )
            if request.null:
                g0, g1 = sample_null(request.params, seed)
                response = InstanceResponse(
                    params=request.params,
                    seed=request.seed,
                    null=True,
                    g0=GraphController.to_payload(g0),
                    g1=GraphController.to_payload(g1),
                )
                return {"status": "success", "data": response, "graphs": (None, g0, g1, None)}
            inst = sample_structured(request.params, seed)
            check_consistency(inst)
            response = InstanceResponse(
                params=request.params,
                seed=request.seed,
                null=False,
                base=GraphController.to_payload(inst.base),
                g0=GraphController.to_payload(inst.g0),
                g1=GraphController.to_payload(inst.g1),
                truth=list(inst.truth.image),
            )
            return {"status": "success", "data": response, "graphs": (inst.base, inst.g0, inst.g1, inst.truth)}
        except Exception as e:
            logger.error(f"Error sampling instance: {str(e)}")
            return {"status": "error", "message": f"Instance generation failed: {str(e)}"}

    @staticmethod
    def write_instance(request: InstanceRequest, out_dir: str) -> Dict:
        """Sample and write g0.g, g1.g, params.json and, for structured pairs, base.g and truth.perm"""
        result = InstanceController.generate(request)
        if result["status"] != "success":
            return result
        base, g0, g1, truth = result.pop("graphs")
        out = Path(out_dir)
        files = {"g0": out / "g0.g", "g1": out / "g1.g", "params": out / "params.json"}
        try:
            save_graph(files["g0"], g0)
            save_graph(files["g1"], g1)
            write_text(files["params"], pretty_json(request.model_dump(mode="json")))
            if base is not None:
                files["base"] = out / "base.g"
                files["truth"] = out / "truth.perm"
                save_graph(files["base"], base)
                save_permutation(files["truth"], truth)
        except OSError as e:
            logger.error(f"Error writing instance files: {str(e)}")
            return {"status": "error", "message": f"Could not write instance: {str(e)}"}
        logger.info(f"✅ Instance written to {out}")
        result["files"] = {k: str(v) for k, v in files.items()}
        return result
