import hashlib
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.graph.GraphModel import GraphPayload


def label_key(label: str) -> int:
    """Stable 64-bit integer for a stream label."""
    return int.from_bytes(hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest(), "little")


def make_generator(master: int, labels: Sequence[str]) -> np.random.Generator:
    """Philox stream for (master, labels); changing one label never shifts another stream."""
    key: Tuple[int, ...] = tuple(label_key(label) for label in labels)
    seq = np.random.SeedSequence(entropy=master, spawn_key=key)
    return np.random.Generator(np.random.Philox(seq))


class RngSeed(BaseModel):
    master: int = Field(..., ge=0, lt=2**64, description="64-bit master seed")
    labels: Tuple[str, ...] = Field(default_factory=tuple, description="Hierarchical stream path")

    model_config = ConfigDict(frozen=True)

    def child(self, label: str) -> "RngSeed":
        return RngSeed(master=self.master, labels=self.labels + (str(label),))

    def generator(self) -> np.random.Generator:
        return make_generator(self.master, self.labels)

    def describe(self) -> str:
        return "/".join((str(self.master),) + self.labels)


class ModelParams(BaseModel):
    n: int = Field(..., ge=1, description="Vertex count")
    p: float = Field(..., ge=0.0, le=1.0, description="Base edge probability")
    gamma: float = Field(..., gt=0.0, le=1.0, description="Subsample probability")

    model_config = ConfigDict(frozen=True)

    @property
    def q(self) -> float:
        """Intersection-graph edge probability p * gamma^2."""
        return self.p * self.gamma ** 2

    @property
    def observed_p(self) -> float:
        return self.p * self.gamma

    @property
    def delta(self) -> Optional[float]:
        """delta with p = n^(delta - 1); undefined for p = 0 or n = 1."""
        if self.p <= 0.0 or self.n < 2:
            return None
        return 1.0 + math.log(self.p) / math.log(self.n)


class InstanceRequest(BaseModel):
    params: ModelParams
    seed: int = Field(0, ge=0, lt=2**64)
    null: bool = Field(False, description="Draw two independent G(n, p*gamma) graphs instead")


class InstanceResponse(BaseModel):
    params: ModelParams
    seed: int
    null: bool
    base: Optional[GraphPayload] = None
    g0: GraphPayload
    g1: GraphPayload
    truth: Optional[List[int]] = None

    @model_validator(mode="after")
    def structured_fields(self):
        if not self.null and (self.base is None or self.truth is None):
            raise ValueError("structured instances carry base graph and truth")
        return self
