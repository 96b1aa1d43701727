from fractions import Fraction
from typing import Annotated, Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, PlainValidator, WithJsonSchema, field_validator


def _to_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("boolean is not a rational")
    if isinstance(value, float):
        return Fraction(str(value))
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"not a rational number: {value!r}") from e


# exact rational carried as "a/b" strings on the wire
Rational = Annotated[
    Fraction,
    PlainValidator(_to_fraction),
    PlainSerializer(lambda f: str(f), return_type=str),
    WithJsonSchema({"type": "string", "examples": ["3/2", "12/25"]}),
]


class GraphPayload(BaseModel):
    n: int = Field(..., ge=0, description="Vertex count; vertices are 0..n-1")
    edges: List[Tuple[int, int]] = Field(default_factory=list, description="Unordered vertex pairs")


class PermutationPayload(BaseModel):
    image: List[int] = Field(..., description="image[i] = pi(i)")


class CanonicalForm(BaseModel):
    n: int
    edges: Tuple[Tuple[int, int], ...] = Field(..., description="Edge list under the canonical relabeling")
    automorphism_count: int = Field(..., ge=1)

    model_config = ConfigDict(frozen=True)


class BalanceVerdict(BaseModel):
    strictly_balanced: bool
    witness: Optional[Tuple[int, ...]] = Field(None, description="Proper vertex subset at least as dense as the graph")
    profile: List[Optional[int]] = Field(..., description="profile[s] = max induced edge count over s-vertex subsets")
    slack: Optional[Rational] = Field(None, description="m/n minus the largest proper-subset density")
    exhaustive: bool = True
    profile_complete: bool = True

    model_config = ConfigDict(frozen=True)

    @field_validator("witness")
    @classmethod
    def witness_sorted(cls, v):
        return tuple(sorted(v)) if v is not None else None

    def max_edges(self, size: int) -> Optional[int]:
        return self.profile[size]


class GraphAnalysisRequest(BaseModel):
    graph: GraphPayload
    balance: bool = Field(True, description="Run the strict-balance verifier")


class GraphAnalysisResponse(BaseModel):
    n: int
    m: int
    density: Optional[Rational] = None
    connected: Optional[bool] = None
    degree_histogram: Dict[int, int] = Field(default_factory=dict)
    canonical: Optional[CanonicalForm] = None
    balance: Optional[BalanceVerdict] = None
