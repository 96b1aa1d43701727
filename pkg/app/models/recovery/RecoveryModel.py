from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.family.FamilyModel import FamilyDocument
from app.models.graph.GraphModel import GraphPayload
from app.models.subiso.SubIsoModel import SearchBudget

ScanOrder = Literal["lexicographic", "max_count"]


class PartialSolution(BaseModel):
    n: int = Field(..., ge=0, description="Vertex count of both graphs")
    mapping: Dict[int, int] = Field(default_factory=dict, description="g0 vertex -> g1 vertex")
    exhausted: bool = Field(False, description="Some pattern search ran out of budget while building the map")

    @model_validator(mode="after")
    def injective(self):
        seen = set()
        for u, w in self.mapping.items():
            if not (0 <= u < self.n and 0 <= w < self.n):
                raise ValueError(f"pair ({u}, {w}) outside 0..{self.n - 1}")
            if w in seen:
                raise ValueError(f"target {w} assigned twice")
            seen.add(w)
        return self

    @property
    def defined_count(self) -> int:
        return len(self.mapping)

    @property
    def is_total(self) -> bool:
        return len(self.mapping) == self.n

    def correct_fraction(self, truth: List[int]) -> Optional[float]:
        """Share of defined entries agreeing with truth; None on an empty map."""
        if len(truth) != self.n:
            raise ValueError("truth and partial solution disagree on n")
        if not self.mapping:
            return None
        return sum(1 for u, w in self.mapping.items() if truth[u] == w) / len(self.mapping)

    def pairs(self) -> List[Tuple[int, int]]:
        return sorted(self.mapping.items())


class BoostParams(BaseModel):
    delta: int = Field(..., ge=1, description="Common-neighbour threshold of the completion phase")
    delta_prime: int = Field(..., ge=1, description="Common-neighbour threshold of the fixing phase")
    max_iterations: int = Field(10_000_000, ge=1)
    scan_order: ScanOrder = "lexicographic"
    clamped: List[str] = Field(default_factory=list, description="Thresholds raised to 1")

    model_config = ConfigDict(frozen=True)


class RecoveryMetrics(BaseModel):
    fraction: float = Field(..., description="Share of vertices mapped as in truth")
    exact: bool
    mismatched_edges: Optional[int] = None


class BoostReport(BaseModel):
    params: BoostParams
    theta: float
    seeded: int
    completed_by_threshold: int = 0
    completed_arbitrarily: int = 0
    swaps: int = 0
    potential_before_fix: int = 0
    potential_after_fix: int = 0
    diagnostics: Dict[str, Optional[float]] = Field(default_factory=dict)


class MatchReport(BaseModel):
    threshold: int
    formula_threshold: float
    defined: int
    qualified_vertices: int = 0
    skipped_ambiguous: int = 0
    collisions: int = 0
    exhausted_members: List[int] = Field(default_factory=list)
    correct_fraction: Optional[float] = None


class RecoveryReport(BaseModel):
    match: MatchReport
    boost: Optional[BoostReport] = None
    metrics: Optional[RecoveryMetrics] = None
    skipped_boost: bool = False


class BoostRequest(BaseModel):
    g0: GraphPayload
    g1: GraphPayload
    seeds: List[Tuple[int, int]] = Field(..., description="Partial map as (g0 vertex, g1 vertex) pairs")
    n: int = Field(..., ge=1)
    p: float = Field(..., gt=0.0, le=1.0)
    gamma: float = Field(..., gt=0.0, le=1.0)
    delta: Optional[int] = Field(None, ge=1)
    delta_prime: Optional[int] = Field(None, ge=1)
    scan_order: ScanOrder = "lexicographic"
    truth: Optional[List[int]] = None


class RecoverRequest(BaseModel):
    g0: GraphPayload
    g1: GraphPayload
    family: FamilyDocument
    n: int = Field(..., ge=1)
    p: float = Field(..., gt=0.0, le=1.0)
    gamma: float = Field(..., gt=0.0, le=1.0)
    threshold: Optional[int] = Field(None, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    scan_order: ScanOrder = "lexicographic"
    budget: Optional[SearchBudget] = None
    truth: Optional[List[int]] = None
