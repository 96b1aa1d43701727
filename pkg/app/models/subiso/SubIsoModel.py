from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.config import settings


class SearchBudget(BaseModel):
    nodes: int = Field(default_factory=lambda: settings.DEFAULT_SEARCH_NODES, ge=1, description="Max search-tree nodes")
    max_occurrences: int = Field(default_factory=lambda: settings.DEFAULT_MAX_OCCURRENCES, ge=1)
    seconds: Optional[float] = Field(default_factory=lambda: settings.DEFAULT_TRIAL_SECONDS, gt=0)

    model_config = ConfigDict(frozen=True)

    @classmethod
    def default(cls) -> "SearchBudget":
        return cls(**settings.get_budget_defaults())

    @classmethod
    def unlimited(cls) -> "SearchBudget":
        return cls(nodes=2**62, max_occurrences=2**62, seconds=None)


class OccurrenceModel(BaseModel):
    vertex_set: Tuple[int, ...]
    edges: List[Tuple[int, int]]
    mapping: List[int] = Field(..., description="mapping[x] = host vertex of pattern vertex x")
