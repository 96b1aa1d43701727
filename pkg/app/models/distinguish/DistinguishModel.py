from typing import List, Literal, Optional

from pydantic import BaseModel, Field

from app.models.family.FamilyModel import FamilyDocument
from app.models.graph.GraphModel import GraphPayload
from app.models.subiso.SubIsoModel import SearchBudget

ThresholdPolicy = Literal["closed_form_third", "calibrated"]
Decision = Literal["structured", "null"]


class Statistic(BaseModel):
    per_member: List[Optional[float]] = Field(..., description="p_H per family member; None when its count ran out of budget")
    occ_g0: List[Optional[int]]
    occ_g1: List[Optional[int]]
    mu: float = Field(..., description="Null mean of each member's count")
    P: Optional[float] = Field(None, description="Average of the available p_H values")
    threshold: Optional[float] = None
    policy: ThresholdPolicy = "closed_form_third"
    decision: Optional[Decision] = None
    partial: bool = False


class DistinguishRequest(BaseModel):
    g0: GraphPayload
    g1: GraphPayload
    family: FamilyDocument
    n: int = Field(..., ge=1)
    p: float = Field(..., ge=0.0, le=1.0)
    gamma: float = Field(..., gt=0.0, le=1.0)
    policy: ThresholdPolicy = "closed_form_third"
    calibration_trials: Optional[int] = Field(None, ge=2)
    calibration_k: Optional[float] = None
    seed: int = Field(0, ge=0, lt=2**64)
    budget: Optional[SearchBudget] = None
