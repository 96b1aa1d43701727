import logging
from fractions import Fraction
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import settings
from app.models.graph.GraphModel import GraphPayload, Rational

logger = logging.getLogger(__name__)

FamilyKind = Literal["regular", "regular_plus_matching", "subdivided"]

# regime limits below which the constructions are proven; outside them only a warning is logged
MIN_PROVEN_MATCHING_DEGREE = 6
MAX_PROVEN_SUBDIVIDED_LAMBDA = Fraction(1, 76)


class FamilySpec(BaseModel):
    v: int = Field(..., ge=4, description="Vertices per member")
    kind: FamilyKind
    d: Optional[int] = Field(None, ge=3, description="Base degree (regular kinds)")
    lam: Optional[Rational] = Field(None, alias="lambda", description="Matching / branch-vertex fraction")
    alpha: Rational = Field(default_factory=settings.default_alpha, description="Intersection threshold parameter")
    target_size: int = Field(..., ge=1)
    max_candidates: int = Field(default_factory=lambda: settings.FAMILY_MAX_CANDIDATES, ge=1)
    pair_a: Optional[Rational] = Field(None, description="Override slope of the pair threshold")
    pair_b: Optional[Rational] = Field(None, description="Override offset of the pair threshold (>= 0)")
    pair_nodes: int = Field(default_factory=lambda: settings.PAIR_CHECK_NODES, ge=1)
    balance_nodes: int = Field(default_factory=lambda: settings.BALANCE_PROFILE_NODES, ge=1)
    strict_regime: bool = Field(False, description="Reject parameters outside the proven regime instead of warning")

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    @model_validator(mode="after")
    def check_integrality(self):
        v = self.v
        if self.pair_b is not None and self.pair_b < 0:
            raise ValueError("pair_b must be non-negative")
        if not Fraction(12, 25) <= self.alpha <= 1:
            self._outside_regime(f"alpha = {self.alpha} lies outside [12/25, 1]")
        if self.kind == "regular":
            if self.d is None:
                raise ValueError("regular families need d")
            if self.d >= v or (self.d * v) % 2:
                raise ValueError(f"no simple {self.d}-regular graph on {v} vertices")
            if self.lam not in (None, 0):
                raise ValueError("regular families take no lambda")
        elif self.kind == "regular_plus_matching":
            if self.d is None or self.lam is None:
                raise ValueError("regular_plus_matching families need d and lambda")
            j = self.lam * v
            if not 0 <= self.lam <= 1 or j.denominator != 1 or j.numerator % 2:
                raise ValueError(f"lambda*v = {j} must be an even integer in [0, v]")
            if self.d + 1 >= v or (self.d * v) % 2:
                raise ValueError(f"no simple {self.d}-regular graph with a matching on {v} vertices")
            if self.d < MIN_PROVEN_MATCHING_DEGREE:
                self._outside_regime(f"d = {self.d} is below {MIN_PROVEN_MATCHING_DEGREE}")
        else:
            if self.lam is None:
                raise ValueError("subdivided families need lambda")
            j = self.lam * v
            if not 0 < self.lam <= 1 or j.denominator != 1:
                raise ValueError(f"lambda*v = {j} must be a positive integer")
            if (3 * j.numerator) % 2 or j.numerator < 4:
                raise ValueError(f"lambda*v = {j} must be even and at least 4 for a cubic base graph")
            if self.lam > MAX_PROVEN_SUBDIVIDED_LAMBDA:
                self._outside_regime(f"lambda = {self.lam} exceeds {MAX_PROVEN_SUBDIVIDED_LAMBDA}")
        edges = self.d_prime * v / 2
        if edges.denominator != 1:
            raise ValueError(f"d' * v / 2 = {edges} is not an integer")
        return self

    def _outside_regime(self, message: str) -> None:
        if self.strict_regime:
            raise ValueError(f"{message} (strict_regime set)")
        logger.warning(f"⚠️ {message}; outside the proven regime")

    @property
    def d_prime(self) -> Fraction:
        if self.kind == "regular":
            return Fraction(self.d)
        if self.kind == "regular_plus_matching":
            return self.d + self.lam
        return 2 + self.lam

    @property
    def edges(self) -> int:
        return int(self.d_prime * self.v / 2)

    @property
    def branch_vertices(self) -> int:
        """lambda * v: matched vertices, or degree-3 vertices of a subdivided member."""
        return int(self.lam * self.v) if self.lam is not None else 0

    def pair_threshold(self) -> Tuple[Fraction, Fraction]:
        """(a, b): a common subgraph J violates when |E(J)| >= a |V(J)| - b."""
        b = self.pair_b if self.pair_b is not None else Fraction(0)
        if self.pair_a is not None:
            return self.pair_a, b
        if self.kind == "regular":
            return self.alpha * self.d, b
        if self.kind == "regular_plus_matching":
            d_prime = self.d_prime
            beta = (self.lam + Fraction(1, 26)) / d_prime
            return (1 - beta) * d_prime / 2, b
        return 1 + self.lam / 3, b


class SizeBound(BaseModel):
    size: int
    max_edges: Optional[int] = Field(None, description="Largest induced edge count on this many vertices")
    bound: Rational
    strict: bool = Field(..., description="max_edges must be strictly below the bound")
    ok: Optional[bool] = Field(None, description="None when the profile entry is unknown")


class VerificationReport(BaseModel):
    counts_ok: bool
    connected: bool
    degree_ok: bool
    degree_histogram: Dict[int, int]
    automorphism_count: Optional[int] = None
    strictly_balanced: Optional[bool] = None
    balance_slack: Optional[Rational] = None
    size_bounds: List[SizeBound] = Field(default_factory=list)
    quantitative_ok: Optional[bool] = None
    failures: List[str] = Field(default_factory=list)
    passed: bool


class PairVerdict(BaseModel):
    status: Literal["verified", "violated", "unknown"]
    nodes: int = 0
    witness: Optional[GraphPayload] = Field(None, description="Common subgraph J on |V(J)| relabeled vertices")
    embedding_1: Optional[List[int]] = Field(None, description="J vertex -> vertex of the first graph")
    embedding_2: Optional[List[int]] = Field(None, description="J vertex -> vertex of the second graph")
    witness_density: Optional[Rational] = None


class PairCertificate(BaseModel):
    first: int
    second: int
    status: Literal["verified", "violated", "unknown"]
    nodes: int


class FamilyDocument(BaseModel):
    spec: FamilySpec
    members: List[str] = Field(default_factory=list, description="Edge-list documents")
    reports: List[VerificationReport] = Field(default_factory=list)
    pair_certificates: List[PairCertificate] = Field(default_factory=list)
    complete: bool
    candidates_tried: int = 0
    rejections: Dict[str, int] = Field(default_factory=dict)


class FamilyBuildRequest(BaseModel):
    spec: FamilySpec
    seed: int = Field(0, ge=0, lt=2**64)


class FeasibilityCondition(BaseModel):
    name: str
    value: float = Field(..., description="Left-hand side, or the ratio lhs / rhs")
    target: str = Field(..., description="Human-readable requirement")
    passed: bool


class FeasibilityReport(BaseModel):
    regime: Literal["sparse", "dense"]
    delta: Optional[float] = None
    conditions: List[FeasibilityCondition] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failed(self) -> List[str]:
        return [c.name for c in self.conditions if not c.passed]


class FamilyChoice(BaseModel):
    feasible: bool
    regime: Optional[Literal["sparse", "dense"]] = None
    kind: Optional[FamilyKind] = None
    v: Optional[int] = None
    d: Optional[int] = None
    d_prime: Optional[Rational] = None
    lam: Optional[Rational] = None
    delta: Optional[float] = None
    window: Optional[Tuple[float, float]] = None
    diagnostics: Optional[FeasibilityReport] = None
    reason: Optional[str] = None
