"""
Samplers for the correlated Erdos-Renyi model, the null model and the
intersection graph.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from app.config import settings
from app.models.instance.InstanceModel import ModelParams, RngSeed
from app.services.graph_core import Graph, Permutation, apply_permutation, complete_graph, empty_graph

logger = logging.getLogger(__name__)


class InstanceError(ValueError):
    """Invalid sampling parameters or an internally inconsistent instance"""


@dataclass(frozen=True)
class CorrelatedInstance:
    base: Graph
    g0: Graph
    g1: Graph
    truth: Permutation
    params: ModelParams
    seed: RngSeed


def _check_probability(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0) or value != value:
        raise InstanceError(f"{name} must lie in [0, 1], got {value}")


def _pairs_from_linear(n: int, idx: np.ndarray) -> Tuple[Tuple[int, int], ...]:
    """Map row-major upper-triangle indices to (u, v) pairs, u < v."""
    if idx.size == 0:
        return ()
    rows = np.arange(n, dtype=np.int64)
    offsets = rows * (2 * n - rows - 1) // 2
    u = np.searchsorted(offsets, idx, side="right") - 1
    v = idx - offsets[u] + u + 1
    return tuple(zip(u.tolist(), v.tolist()))


def _geometric_positions(rng: np.random.Generator, total: int, p: float) -> np.ndarray:
    chunks = []
    pos = -1
    while True:
        size = int(1.2 * (total - pos) * p) + 16
        cand = pos + np.cumsum(rng.geometric(p, size=size))
        keep = cand[cand < total]
        chunks.append(keep)
        if keep.size < cand.size:
            break
        pos = int(cand[-1])
    return np.concatenate(chunks)


def sample_er(n: int, p: float, seed: RngSeed, method: str = "auto") -> Graph:
    """G(n, p): each unordered pair independently present with probability p."""
    _check_probability("p", p)
    if n < 0:
        raise InstanceError(f"negative vertex count: {n}")
    if method not in ("auto", "geometric", "bernoulli"):
        raise InstanceError(f"unknown sampling method: {method}")
    if p == 0.0 or n < 2:
        return empty_graph(n)
    if p == 1.0:
        return complete_graph(n)
    total = n * (n - 1) // 2
    rng = seed.generator()
    if method == "auto":
        method = "geometric" if p < settings.GEOMETRIC_SKIP_BELOW else "bernoulli"
    if method == "geometric":
        idx = _geometric_positions(rng, total, p)
    else:
        idx = np.flatnonzero(rng.random(total) < p)
    return Graph(n, _pairs_from_linear(n, idx.astype(np.int64)))


def subsample(g: Graph, gamma: float, seed: RngSeed) -> Graph:
    """Keep each edge of g independently with probability gamma."""
    _check_probability("gamma", gamma)
    if g.m == 0 or gamma == 1.0:
        return g
    keep = seed.generator().random(g.m) < gamma
    return Graph(g.n, tuple(e for e, k in zip(g.edges, keep.tolist()) if k))


def random_permutation(n: int, seed: RngSeed) -> Permutation:
    if n < 1:
        raise InstanceError("random permutation needs n >= 1")
    return Permutation(seed.generator().permutation(n).tolist())


def sample_structured(params: ModelParams, seed: RngSeed) -> CorrelatedInstance:
    base = sample_er(params.n, params.p, seed.child("base"))
    g0 = subsample(base, params.gamma, seed.child("sub0"))
    g1_unpermuted = subsample(base, params.gamma, seed.child("sub1"))
    truth = random_permutation(params.n, seed.child("perm"))
    g1 = apply_permutation(g1_unpermuted, truth)
    logger.debug(f"structured instance {seed.describe()}: base m={base.m}, g0 m={g0.m}, g1 m={g1.m}")
    return CorrelatedInstance(base=base, g0=g0, g1=g1, truth=truth, params=params, seed=seed)


def sample_null(params: ModelParams, seed: RngSeed) -> Tuple[Graph, Graph]:
    r = params.observed_p
    return sample_er(params.n, r, seed.child("null0")), sample_er(params.n, r, seed.child("null1"))


def pullback_g1(inst: CorrelatedInstance) -> Graph:
    """g1 relabeled back onto base's vertex names through truth."""
    return apply_permutation(inst.g1, inst.truth.inverse())


def check_consistency(inst: CorrelatedInstance) -> None:
    base = inst.base.edge_set()
    if inst.g0.n != inst.base.n or inst.g1.n != inst.base.n or len(inst.truth) != inst.base.n:
        raise InstanceError("instance graphs and truth disagree on vertex count")
    if not inst.g0.edge_set() <= base:
        raise InstanceError("g0 has an edge missing from the base graph")
    if not pullback_g1(inst).edge_set() <= base:
        raise InstanceError("g1 pulled back through truth has an edge missing from the base graph")


def intersection_graph(inst: CorrelatedInstance) -> Graph:
    """Base edges that survived into both g0 and the truth-pullback of g1."""
    check_consistency(inst)
    both = inst.g0.edge_set() & pullback_g1(inst).edge_set()
    return Graph(inst.base.n, tuple(sorted(both)))
