"""
Pattern occurrence counting and enumeration by backtracking with
neighborhood-intersection candidate pruning.
"""
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from app.config import settings
from app.models.subiso.SubIsoModel import OccurrenceModel, SearchBudget
from app.services.graph_core import Graph, automorphism_count, automorphisms

logger = logging.getLogger(__name__)

Embedding = Tuple[int, ...]


class BudgetExhausted(RuntimeError):
    """Search stopped at its budget; carries what was found so far."""

    def __init__(self, partial_count: int, nodes: int, reason: str):
        super().__init__(f"search budget exhausted ({reason}) after {nodes} nodes, {partial_count} found")
        self.partial_count = partial_count
        self.nodes = nodes
        self.reason = reason


Exhausted = BudgetExhausted


@dataclass(frozen=True, order=True)
class Occurrence:
    """Unlabeled copy of a pattern: host vertex set, host edges, and one representative embedding."""

    vertex_set: Tuple[int, ...]
    edges: Tuple[Tuple[int, int], ...]
    mapping: Embedding

    def to_model(self) -> OccurrenceModel:
        return OccurrenceModel(vertex_set=self.vertex_set, edges=list(self.edges), mapping=list(self.mapping))


def resolve_budget(budget: Optional[SearchBudget], host: Graph) -> SearchBudget:
    if budget is not None:
        return budget
    if host.n > settings.BUDGET_REQUIRED_HOST_VERTICES:
        raise ValueError(
            f"host graphs above {settings.BUDGET_REQUIRED_HOST_VERTICES} vertices need an explicit search budget"
        )
    return SearchBudget.default()


class SubgraphMatcher:
    """Injective embeddings of pattern h into host g."""

    def __init__(self, h: Graph, g: Graph, budget: Optional[SearchBudget]):
        self.h = h
        self.g = g
        self.budget = resolve_budget(budget, g)
        self.order = self._pattern_order()
        pos = {x: i for i, x in enumerate(self.order)}
        self.back = [
            sorted(pos[y] for y in h.adjacency[x] if pos[y] < i) for i, x in enumerate(self.order)
        ]
        self.pattern_degree = [h.degree(x) for x in self.order]
        self.nodes = 0
        self.found = 0
        self._deadline = time.monotonic() + self.budget.seconds if self.budget.seconds else None

    def _pattern_order(self) -> List[int]:
        h = self.h
        remaining = set(range(h.n))
        order: List[int] = []
        placed = set()
        while remaining:
            best = None
            for x in sorted(remaining):
                back = sum(1 for y in h.adjacency[x] if y in placed)
                key = (back, h.degree(x), -x)
                if best is None or key > best[0]:
                    best = (key, x)
            x = best[1]
            order.append(x)
            placed.add(x)
            remaining.discard(x)
        return order

    def _tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget.nodes:
            raise BudgetExhausted(self.found, self.nodes, "nodes")
        if self._deadline is not None and self.nodes % 1024 == 0 and time.monotonic() > self._deadline:
            raise BudgetExhausted(self.found, self.nodes, "seconds")

    def _candidates(self, i: int, assigned: List[int], used: set) -> List[int]:
        g = self.g
        need = self.pattern_degree[i]
        back = self.back[i]
        if back:
            sets = sorted((g.neighbors(assigned[j]) for j in back), key=len)
            cands = set(sets[0])
            for s in sets[1:]:
                cands &= s
                if not cands:
                    return []
        else:
            cands = range(g.n)
        return sorted(w for w in cands if w not in used and g.degree(w) >= need)

    def partitions(self) -> List[int]:
        """Host candidates for the first pattern vertex; each roots an independent subtree."""
        if self.h.n == 0 or self.h.n > self.g.n:
            return []
        return self._candidates(0, [], set())

    def _extend(self, i: int, assigned: List[int], used: set, sink) -> None:
        self._tick()
        if i == len(self.order):
            sink(assigned)
            return
        for w in self._candidates(i, assigned, used):
            assigned.append(w)
            used.add(w)
            self._extend(i + 1, assigned, used, sink)
            used.discard(w)
            assigned.pop()

    def run_partition(self, root: int, sink) -> None:
        self._extend(1, [root], {root}, sink)

    def embeddings(self, sink) -> None:
        """Call sink(embedding) for every injective edge-preserving map, as a pattern-indexed tuple."""
        if self.h.n == 0:
            sink(())
            return
        inverse = [0] * self.h.n
        for i, x in enumerate(self.order):
            inverse[x] = i

        def emit(assigned: List[int]) -> None:
            sink(tuple(assigned[inverse[x]] for x in range(self.h.n)))

        for root in self.partitions():
            self.run_partition(root, emit)

    def count_roots(self, roots: Sequence[int]) -> int:
        def bump(_assigned) -> None:
            self.found += 1

        for root in roots:
            self.run_partition(root, bump)
        return self.found

    def count(self) -> int:
        if self.h.n > self.g.n:
            return 0
        if self.h.n == 0:
            return 1
        return self.count_roots(self.partitions())


def _count_partition(args: Tuple[Graph, Graph, SearchBudget, List[int]]) -> Tuple[int, int, Optional[str]]:
    h, g, budget, roots = args
    matcher = SubgraphMatcher(h, g, budget)
    try:
        return matcher.count_roots(roots), matcher.nodes, None
    except BudgetExhausted as e:
        return e.partial_count, e.nodes, e.reason


def count_injective_homs(
    h: Graph, g: Graph, budget: Optional[SearchBudget] = None, workers: Optional[int] = None
) -> int:
    """
    Exact number of injective edge-preserving maps h -> g; raises BudgetExhausted.

    With workers > 1 the root partitions are dealt round-robin to a process
    pool. The node budget then bounds the summed work of all partitions.
    """
    matcher = SubgraphMatcher(h, g, budget)
    roots = matcher.partitions()
    if not workers or workers <= 1 or len(roots) < 2:
        return matcher.count()
    chunks = [roots[k::workers] for k in range(min(workers, len(roots)))]
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        results = list(pool.map(_count_partition, [(h, g, matcher.budget, chunk) for chunk in chunks]))
    found = sum(r[0] for r in results)
    nodes = sum(r[1] for r in results)
    reasons = [r[2] for r in results if r[2] is not None]
    if reasons or nodes > matcher.budget.nodes:
        raise BudgetExhausted(found, nodes, reasons[0] if reasons else "nodes")
    logger.debug(f"counted {found} embeddings over {len(roots)} partitions with {len(chunks)} workers")
    return found


def occ(
    h: Graph,
    g: Graph,
    budget: Optional[SearchBudget] = None,
    aut: Optional[int] = None,
    workers: Optional[int] = None,
) -> int:
    """Number of unlabeled copies of h in g."""
    homs = count_injective_homs(h, g, budget, workers)
    aut = aut if aut is not None else automorphism_count(h)
    copies, rem = divmod(homs, aut)
    if rem:
        raise RuntimeError(f"injective hom count {homs} not divisible by |Aut(h)| = {aut}")
    return copies


def enumerate_occurrences(
    h: Graph,
    g: Graph,
    budget: Optional[SearchBudget] = None,
    pattern_automorphisms: Optional[Sequence[Sequence[int]]] = None,
) -> List[Occurrence]:
    """
    Every unlabeled copy of h in g exactly once, sorted by host vertex set then edges.

    Only embeddings that are lexicographically minimal among their Aut(h)-orbit
    are kept, so no post-hoc division is needed.
    """
    matcher = SubgraphMatcher(h, g, budget)
    if pattern_automorphisms is None:
        pattern_automorphisms = [p.image for p in automorphisms(h)]
    others = [tuple(s) for s in pattern_automorphisms if tuple(s) != tuple(range(h.n))]
    out: List[Occurrence] = []
    limit = matcher.budget.max_occurrences

    def keep(f: Embedding) -> None:
        for sigma in others:
            if tuple(f[sigma[x]] for x in range(h.n)) < f:
                return
        if len(out) >= limit:
            raise BudgetExhausted(len(out), matcher.nodes, "occurrences")
        edges = tuple(sorted((f[a], f[b]) if f[a] < f[b] else (f[b], f[a]) for a, b in h.edges))
        out.append(Occurrence(vertex_set=tuple(sorted(f)), edges=edges, mapping=f))
        matcher.found = len(out)

    matcher.embeddings(keep)
    out.sort()
    return out


def occurrence_index(occs: Sequence[Occurrence]) -> Dict[int, List[int]]:
    """host vertex -> sorted ids (positions in occs) of occurrences containing it."""
    index: Dict[int, List[int]] = {}
    for i, o in enumerate(occs):
        for v in o.vertex_set:
            index.setdefault(v, []).append(i)
    return index


def expected_occ(n: int, r: float, h: Graph, aut: Optional[int] = None) -> float:
    """(n)_v * r^e / aut(h): expected copies of h in G(n, r)."""
    if h.n > n:
        return 0.0
    aut = aut if aut is not None else automorphism_count(h)
    return math.perm(n, h.n) * r ** h.m / aut
