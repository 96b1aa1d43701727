import logging
from typing import Dict, Optional

from app.models.family.FamilyModel import FamilyBuildRequest
from app.models.instance.InstanceModel import RngSeed
from app.services.recovery import choose_family_params
from app.services.test_family import build_family

logger = logging.getLogger(__name__)


class FamilyController:
    """Test-family construction and parameter selection"""

    @staticmethod
    def build(request: FamilyBuildRequest, out: Optional[str] = None, workers: Optional[int] = None) -> Dict:
        """Build a certified family; an incomplete family comes back with status partial"""
        try:
            family = build_family(request.spec, RngSeed(master=request.seed, labels=("family",)), workers=workers)
            if out:
                family.save(out)
                logger.info(f"✅ Family with {len(family)} members saved to {out}")
            return {
                "status": "success" if family.complete else "partial",
                "message": None if family.complete else f"{len(family)}/{request.spec.target_size} members found",
                "data": family.to_document(),
                "family": family,
            }
        except Exception as e:
            logger.error(f"Error building family: {str(e)}")
            return {"status": "error", "message": f"Family construction failed: {str(e)}"}

    @staticmethod
    def choose(n: int, p: float, gamma: float) -> Dict:
        try:
            choice = choose_family_params(n, p, gamma)
            if not choice.feasible:
                logger.warning(f"⚠️ No feasible family parameters at n={n}, p={p}: {choice.reason}")
            return {"status": "success", "data": choice}
        except Exception as e:
            logger.error(f"Error choosing family parameters: {str(e)}")
            return {"status": "error", "message": f"Parameter selection failed: {str(e)}"}
