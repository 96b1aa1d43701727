from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from app.models.distinguish.DistinguishModel import ThresholdPolicy
from app.models.family.FamilyModel import FamilySpec
from app.models.recovery.RecoveryModel import ScanOrder
from app.models.subiso.SubIsoModel import SearchBudget

ExperimentKind = Literal["distinguish", "recover", "boost", "family"]
TrialStatus = Literal["ok", "partial", "timeout", "error"]

SCHEMA_VERSION = "gmatch-bench schema v1"


class ExperimentConfig(BaseModel):
    kind: ExperimentKind
    n: int = Field(..., ge=1)
    p: float = Field(..., ge=0.0, le=1.0)
    gamma: float = Field(..., gt=0.0, le=1.0)
    family_file: Optional[str] = None
    family_spec: Optional[FamilySpec] = None
    trials: int = Field(..., ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    budgets: Optional[SearchBudget] = None
    theta: Optional[float] = Field(None, gt=0.0, le=1.0, description="Seeded fraction for boost runs")
    epsilon: Optional[float] = Field(None, ge=0.0, le=1.0, description="Corrupted share of the seeds")
    threshold_policy: ThresholdPolicy = "closed_form_third"
    calibration_trials: Optional[int] = Field(None, ge=2)
    calibration_k: Optional[float] = None
    match_threshold: Optional[int] = Field(None, ge=1)
    scan_order: ScanOrder = "lexicographic"
    delta: Optional[int] = Field(None, ge=1)
    delta_prime: Optional[int] = Field(None, ge=1)
    diagnostics: bool = Field(False, description="Record B_u / N_u summaries on structured trials")
    out: Optional[str] = None

    @model_validator(mode="after")
    def kind_requirements(self):
        if self.kind in ("distinguish", "recover") and self.family_file is None and self.family_spec is None:
            raise ValueError(f"{self.kind} experiments need family_file or family_spec")
        if self.kind == "family" and self.family_spec is None:
            raise ValueError("family experiments need family_spec")
        if self.kind == "boost" and (self.theta is None or self.epsilon is None):
            raise ValueError("boost experiments need theta and epsilon")
        return self


class TrialResult(BaseModel):
    trial: int
    seed: str = Field(..., description="master/label path of the trial stream")
    status: TrialStatus = "ok"
    structured: Optional[bool] = None
    decision: Optional[str] = None
    correct: Optional[bool] = None
    P: Optional[float] = None
    threshold: Optional[float] = None
    seeded: Optional[int] = None
    seeded_correct_fraction: Optional[float] = None
    fraction: Optional[float] = None
    exact: Optional[bool] = None
    mismatched_edges: Optional[int] = None
    members: Optional[int] = None
    candidates_tried: Optional[int] = None
    n_u_mean: Optional[float] = None
    n_u_max: Optional[int] = None
    b_u_max: Optional[int] = None
    max_joint_neighbors: Optional[int] = None
    wall_seconds: Optional[float] = None
    message: Optional[str] = None


class Aggregate(BaseModel):
    metric: str
    trials: int
    completed: int
    successes: int
    rate: Optional[float] = None
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    mean_fraction: Optional[float] = None
    errors: int = 0


class RunManifest(BaseModel):
    schema_version: str = SCHEMA_VERSION
    config_hash: str
    code_version: str
    config: Dict
    started: Optional[str] = None
    finished: Optional[str] = None
    aggregate: Aggregate
    rows: int


class BenchResponse(BaseModel):
    manifest: RunManifest
    results: List[TrialResult]


class DiagnosticsSummary(BaseModel):
    n_u: List[int] = Field(..., description="Per vertex: family occurrences at u in the intersection graph")
    b_u: List[int] = Field(..., description="Per vertex: members surviving at u that also repeat in the base graph")
    n_u_mean: float
    n_u_max: int
    b_u_max: int
    n_u_expected: float
    max_joint_neighbors: int
    exhausted: bool = False
