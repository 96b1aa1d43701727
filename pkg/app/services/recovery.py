"""
Permutation recovery: family parameter selection, test-graph matching into a
partial solution, and common-neighbour boosting to a full permutation.
"""
import heapq
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from app.config import settings
from app.models.family.FamilyModel import FamilyChoice
from app.models.instance.InstanceModel import RngSeed
from app.models.recovery.RecoveryModel import (
    BoostParams,
    BoostReport,
    MatchReport,
    PartialSolution,
    RecoveryMetrics,
    RecoveryReport,
    ScanOrder,
)
from app.models.subiso.SubIsoModel import SearchBudget
from app.services.graph_core import Graph, Permutation, mismatched_edges
from app.services.sub_iso import BudgetExhausted, enumerate_occurrences
from app.services.test_family import TestFamily, family_params_feasible, model_delta

logger = logging.getLogger(__name__)

PartialMap = Union[PartialSolution, Mapping[int, int]]


class BoostError(RuntimeError):
    """Boosting hit its iteration cap or a swap failed to raise the potential; carries a dump of the state."""

    def __init__(self, message: str, state: Dict):
        super().__init__(message)
        self.state = state


def _as_mapping(pi: PartialMap) -> Mapping[int, int]:
    return pi.mapping if isinstance(pi, PartialSolution) else pi


# ---------------------------------------------------------------------------
# parameter selection
# ---------------------------------------------------------------------------

def _v_cap(n: int) -> int:
    cap = int(settings.FAMILY_V_LOG_FACTOR * math.log(n))
    return cap - cap % 2


def choose_family_params(n: int, p: float, gamma: float) -> FamilyChoice:
    """
    Smallest even v (up to FAMILY_V_LOG_FACTOR * ln n) admitting an integral
    family inside the degree window for (n, p).

    Sparse (2/(1-delta) < 3): subdivided cubic members with lambda*v even and
    at least 4. Dense: d-regular members plus a matching on j = d'v - dv
    vertices. When nothing fits, the choice comes back infeasible with the
    reason; callers then fix v and d' by hand.
    """
    delta = model_delta(n, p)
    if delta is None or not 0.0 < delta < 1.0:
        return FamilyChoice(feasible=False, delta=delta, reason=f"delta = {delta} outside (0, 1)")
    log_n = math.log(n)
    loglog = math.log(log_n) if log_n > 1 else 0.0
    base = 2.0 / (1.0 - delta)
    v_cap = _v_cap(n)

    if base < 3.0:
        lo = 2.0 * delta / (1.0 - delta)
        hi = lo + loglog / log_n
        for v in range(4, v_cap + 1, 2):
            for j in range(4, v + 1, 2):
                if lo < j / v < hi:
                    lam = Fraction(j, v)
                    d_prime = 2 + lam
                    return FamilyChoice(
                        feasible=True, regime="sparse", kind="subdivided", v=v, d=None, d_prime=d_prime,
                        lam=lam, delta=delta, window=(lo, hi),
                        diagnostics=family_params_feasible(n, p, gamma, v, d_prime),
                    )
        return FamilyChoice(
            feasible=False, regime="sparse", delta=delta, window=(lo, hi),
            reason=f"no even v <= {v_cap} with an even lambda*v >= 4 inside the window",
        )

    lo = base
    hi = lo + loglog / (4.0 * log_n)
    for v in range(4, v_cap + 1, 2):
        for t in range(math.floor(lo * v), math.ceil(hi * v) + 1):
            if not lo < t / v < hi:
                continue
            d = t // v
            j = t - d * v
            if d < 3 or d + 1 >= v or j % 2:
                continue
            d_prime = Fraction(t, v)
            return FamilyChoice(
                feasible=True, regime="dense", kind="regular" if j == 0 else "regular_plus_matching",
                v=v, d=d, d_prime=d_prime, lam=Fraction(j, v), delta=delta, window=(lo, hi),
                diagnostics=family_params_feasible(n, p, gamma, v, d_prime),
            )
    return FamilyChoice(
        feasible=False, regime="dense", delta=delta, window=(lo, hi),
        reason=f"no even v <= {v_cap} puts an integral d'v inside the window",
    )


# ---------------------------------------------------------------------------
# test-graph matching
# ---------------------------------------------------------------------------

@dataclass
class RecoveryParams:
    family: TestFamily
    match_threshold: Optional[int] = None
    seed: RngSeed = field(default_factory=lambda: RngSeed(master=0))
    budget: Optional[SearchBudget] = None
    delta: Optional[int] = None
    delta_prime: Optional[int] = None
    scan_order: ScanOrder = "lexicographic"
    max_iterations: int = 10_000_000

    def __post_init__(self):
        if self.match_threshold is not None and self.match_threshold < 1:
            raise ValueError("match threshold must be at least 1")


def formula_match_threshold(family_size: int, v: int, e: int, n: int, q: float) -> float:
    """(1/2) |family| v n^(v-1) q^e, evaluated in log space."""
    if family_size == 0 or q <= 0.0:
        return 0.0
    log_value = math.log(family_size / 2 * v) + (v - 1) * math.log(n) + e * math.log(q)
    return math.exp(min(log_value, 700.0))


def match_by_testgraphs(
    g0: Graph,
    g1: Graph,
    params: RecoveryParams,
    seed: Optional[RngSeed] = None,
    q: Optional[float] = None,
) -> Tuple[PartialSolution, MatchReport]:
    """
    For each g0 vertex u in increasing order: members with an occurrence
    incident to u in g0 and some occurrence in g1 are candidates; with at
    least the threshold many, one candidate is drawn at random and u is mapped
    through it when that member appears exactly once at u in g0 and exactly
    once in g1. A target already taken keeps its first assignment.
    """
    if g0.n != g1.n:
        raise ValueError("g0 and g1 must share the vertex count")
    family = params.family
    seed = seed if seed is not None else params.seed
    formula = formula_match_threshold(len(family), family.v, family.e, g0.n, q) if q is not None else 0.0
    threshold = params.match_threshold if params.match_threshold is not None else max(1, math.ceil(formula))
    if q is not None:
        logger.info(f"match threshold {threshold} (formula value {formula:.4g})")
    report = MatchReport(threshold=threshold, formula_threshold=formula, defined=0)
    if len(family) == 0:
        return PartialSolution(n=g0.n), report

    identity = [tuple(range(family.v))]
    aut_counts = family.automorphism_counts()
    incident: List[Dict[int, List[int]]] = []
    occs0 = []
    occs1 = []
    exhausted = False
    for i, h in enumerate(family.members):
        auts = identity if aut_counts[i] == 1 else None
        try:
            o0 = enumerate_occurrences(h, g0, params.budget, auts)
            o1 = enumerate_occurrences(h, g1, params.budget, auts)
        except BudgetExhausted as e:
            logger.warning(f"⚠️ member {i} skipped: {e}")
            report.exhausted_members.append(i)
            exhausted = True
            o0, o1 = [], []
        index: Dict[int, List[int]] = {}
        for k, o in enumerate(o0):
            for x in o.vertex_set:
                index.setdefault(x, []).append(k)
        incident.append(index)
        occs0.append(o0)
        occs1.append(o1)

    rng = seed.child("matching").generator()
    mapping: Dict[int, int] = {}
    used = set()
    for u in range(g0.n):
        candidates = [i for i in range(len(family)) if u in incident[i] and occs1[i]]
        if len(candidates) < threshold:
            continue
        report.qualified_vertices += 1
        i = candidates[int(rng.integers(len(candidates)))]
        mine = incident[i][u]
        if len(mine) != 1 or len(occs1[i]) != 1:
            report.skipped_ambiguous += 1
            continue
        x = occs0[i][mine[0]].mapping.index(u)
        w = occs1[i][0].mapping[x]
        if w in used:
            report.collisions += 1
            continue
        mapping[u] = w
        used.add(w)
    if report.collisions:
        logger.info(f"{report.collisions} colliding targets kept their first assignment")
    report.defined = len(mapping)
    return PartialSolution(n=g0.n, mapping=mapping, exhausted=exhausted), report


# ---------------------------------------------------------------------------
# boosting
# ---------------------------------------------------------------------------

def common_neighbors(u: int, w: int, g0: Graph, g1: Graph, pi: PartialMap) -> int:
    """Neighbours x of u in g0 with pi defined at x and pi(x) adjacent to w in g1."""
    mapping = _as_mapping(pi)
    count = 0
    for x in g0.adjacency[u]:
        y = mapping.get(x)
        if y is not None and g1.has_edge(y, w):
            count += 1
    return count


def _support(u: int, g0: Graph, g1: Graph, image: Sequence[Optional[int]]) -> Counter:
    """w -> common_neighbors(u, w) for every w with a nonzero count."""
    counts: Counter = Counter()
    for x in g0.adjacency[u]:
        y = image[x]
        if y is not None:
            counts.update(g1.adjacency[y])
    return counts


def derive_boost_params(
    n: int,
    p: float,
    gamma: float,
    theta: float,
    delta: Optional[int] = None,
    delta_prime: Optional[int] = None,
    scan_order: ScanOrder = "lexicographic",
    max_iterations: int = 10_000_000,
) -> BoostParams:
    """Delta = floor(theta gamma^2 n p / 100), Delta' = floor(gamma^2 n p / 100), both raised to at least 1."""
    clamped = []
    if delta is None:
        delta = math.floor(theta * gamma ** 2 * n * p / 100)
        if delta < 1:
            clamped.append(f"delta {delta} -> 1")
            delta = 1
    if delta_prime is None:
        delta_prime = math.floor(gamma ** 2 * n * p / 100)
        if delta_prime < 1:
            clamped.append(f"delta_prime {delta_prime} -> 1")
            delta_prime = 1
    for note in clamped:
        logger.warning(f"⚠️ boost threshold clamped: {note}")
    return BoostParams(
        delta=delta, delta_prime=delta_prime, scan_order=scan_order, max_iterations=max_iterations, clamped=clamped
    )


def _state_dump(image: Sequence[Optional[int]], iterations: int) -> Dict:
    return {
        "iterations": iterations,
        "defined": sum(1 for y in image if y is not None),
        "mapping": {u: y for u, y in enumerate(image) if y is not None},
    }


def _complete_lexicographic(g0, g1, image, used, bp: BoostParams) -> int:
    assigned = 0
    iterations = 0
    changed = True
    while changed:
        changed = False
        for u in range(g0.n):
            if image[u] is not None:
                continue
            iterations += 1
            if iterations > bp.max_iterations:
                raise BoostError("completion exceeded max_iterations", _state_dump(image, iterations))
            counts = _support(u, g0, g1, image)
            best = min((w for w, c in counts.items() if c >= bp.delta and w not in used), default=None)
            if best is not None:
                image[u] = best
                used.add(best)
                assigned += 1
                changed = True
    return assigned


def _complete_max_count(g0, g1, image, used, bp: BoostParams) -> int:
    counts: Dict[int, Counter] = {}
    heap: List[Tuple[int, int, int]] = []
    for u in range(g0.n):
        if image[u] is None:
            counts[u] = _support(u, g0, g1, image)
            for w, c in counts[u].items():
                if c >= bp.delta and w not in used:
                    heap.append((-c, u, w))
    heapq.heapify(heap)
    assigned = 0
    iterations = 0
    while heap:
        iterations += 1
        if iterations > bp.max_iterations:
            raise BoostError("completion exceeded max_iterations", _state_dump(image, iterations))
        neg, u, w = heapq.heappop(heap)
        if image[u] is not None or w in used or counts[u][w] != -neg:
            continue
        image[u] = w
        used.add(w)
        assigned += 1
        del counts[u]
        for x in g0.adjacency[u]:
            if image[x] is not None:
                continue
            row = counts[x]
            for z in g1.adjacency[w]:
                row[z] += 1
                if row[z] >= bp.delta and z not in used:
                    heapq.heappush(heap, (-row[z], x, z))
    return assigned


def boost_complete(
    g0: Graph, g1: Graph, pi: PartialMap, bp: BoostParams
) -> Tuple[Permutation, int, int]:
    """
    Extend pi while some undefined u and unused w have at least Delta common
    neighbours, then pair the leftovers lowest index first. Returns the
    permutation with the counts of threshold and arbitrary assignments.
    """
    n = g0.n
    mapping = _as_mapping(pi)
    image: List[Optional[int]] = [None] * n
    for u, w in mapping.items():
        image[u] = w
    used = set(mapping.values())
    if bp.scan_order == "max_count":
        by_threshold = _complete_max_count(g0, g1, image, used, bp)
    else:
        by_threshold = _complete_lexicographic(g0, g1, image, used, bp)
    free_targets = iter(sorted(set(range(n)) - used))
    arbitrary = 0
    for u in range(n):
        if image[u] is None:
            image[u] = next(free_targets)
            arbitrary += 1
    if arbitrary:
        logger.info(f"completion: {by_threshold} by threshold, {arbitrary} arbitrary")
    return Permutation(image), by_threshold, arbitrary


def potential(g0: Graph, g1: Graph, pi: Permutation) -> int:
    """Sum over u of common_neighbors(u, pi(u)): twice the number of g0 edges pi preserves."""
    return 2 * sum(1 for a, b in g0.edges if g1.has_edge(pi(a), pi(b)))


def _preserved_at(g0: Graph, g1: Graph, image: Sequence[int], xs: Tuple[int, int]) -> int:
    seen = set()
    for x in xs:
        for y in g0.adjacency[x]:
            edge = (x, y) if x < y else (y, x)
            if edge not in seen and g1.has_edge(image[x], image[y]):
                seen.add(edge)
    return len(seen)


def boost_fix(g0: Graph, g1: Graph, pi: Permutation, bp: BoostParams) -> Tuple[Permutation, int]:
    """
    Swap pi(u) with w whenever N(u, w) >= Delta' while both N(u, pi(u)) and
    N(pi^-1(w), w) are at most floor(Delta'/10); repeat to a fixpoint.
    """
    n = g0.n
    if len(pi) != n:
        raise ValueError("boost_fix needs a total permutation on g0's vertices")
    image = list(pi.image)
    inverse = [0] * n
    for u, w in enumerate(image):
        inverse[w] = u
    low = bp.delta_prime // 10
    swaps = 0
    iterations = 0
    changed = True
    while changed:
        changed = False
        for u in range(n):
            iterations += 1
            if iterations > bp.max_iterations:
                raise BoostError("fixing exceeded max_iterations", _state_dump(image, iterations))
            counts = _support(u, g0, g1, image)
            if counts[image[u]] > low:
                continue
            for w in sorted(w for w, c in counts.items() if c >= bp.delta_prime):
                u2 = inverse[w]
                if u2 == u or _support(u2, g0, g1, image)[w] > low:
                    continue
                before = _preserved_at(g0, g1, image, (u, u2))
                a = image[u]
                image[u], image[u2] = w, a
                inverse[w], inverse[a] = u, u2
                after = _preserved_at(g0, g1, image, (u, u2))
                if after <= before:
                    raise BoostError(
                        f"swapping {u} and {u2} did not raise the potential", _state_dump(image, iterations)
                    )
                swaps += 1
                changed = True
                break
    if swaps:
        logger.info(f"fixing phase made {swaps} swaps")
    return Permutation(image), swaps


def boost(
    g0: Graph,
    g1: Graph,
    pi: PartialMap,
    n: int,
    p: float,
    gamma: float,
    truth: Optional[Permutation] = None,
    delta: Optional[int] = None,
    delta_prime: Optional[int] = None,
    scan_order: ScanOrder = "lexicographic",
    max_iterations: int = 10_000_000,
) -> Tuple[Permutation, BoostReport]:
    """Complete then fix, with Delta derived from the seeded fraction theta = |pi| / n."""
    mapping = _as_mapping(pi)
    theta = len(mapping) / n if n else 0.0
    bp = derive_boost_params(n, p, gamma, theta, delta, delta_prime, scan_order, max_iterations)
    diagnostics: Dict[str, Optional[float]] = {}
    log_n = math.log(n) if n > 1 else 0.0
    degree = p * gamma * n
    diagnostics["p_gamma_n"] = degree
    diagnostics["log_n"] = log_n
    diagnostics["log_exponent"] = (
        math.log(degree) / math.log(log_n) if degree > 1 and log_n > 1 else None
    )
    if truth is not None:
        correct = sum(1 for u, w in mapping.items() if truth(u) == w)
        epsilon = 1 - correct / len(mapping) if mapping else None
        diagnostics["epsilon"] = epsilon
        diagnostics["epsilon_theta_over_gamma2"] = epsilon * theta / gamma ** 2 if epsilon is not None else None

    completed, by_threshold, arbitrary = boost_complete(g0, g1, mapping, bp)
    before = potential(g0, g1, completed)
    fixed, swaps = boost_fix(g0, g1, completed, bp)
    report = BoostReport(
        params=bp,
        theta=theta,
        seeded=len(mapping),
        completed_by_threshold=by_threshold,
        completed_arbitrarily=arbitrary,
        swaps=swaps,
        potential_before_fix=before,
        potential_after_fix=potential(g0, g1, fixed),
        diagnostics=diagnostics,
    )
    return fixed, report


def evaluate(
    pi: Permutation, truth: Permutation, g0: Optional[Graph] = None, g1: Optional[Graph] = None
) -> RecoveryMetrics:
    if len(pi) != len(truth):
        raise ValueError(f"permutation sizes differ: {len(pi)} vs {len(truth)}")
    n = len(pi)
    agree = sum(1 for a, b in zip(pi.image, truth.image) if a == b)
    mismatched = mismatched_edges(g0, g1, pi) if g0 is not None and g1 is not None else None
    return RecoveryMetrics(fraction=agree / n if n else 1.0, exact=agree == n, mismatched_edges=mismatched)


def recover(
    g0: Graph,
    g1: Graph,
    params: RecoveryParams,
    n: int,
    p: float,
    gamma: float,
    truth: Optional[Permutation] = None,
) -> Tuple[Optional[Permutation], RecoveryReport]:
    """Test-graph matching followed by boosting; no permutation when matching seeds nothing."""
    partial, match = match_by_testgraphs(g0, g1, params, q=p * gamma ** 2)
    if truth is not None:
        match.correct_fraction = partial.correct_fraction(list(truth.image))
    if partial.defined_count == 0:
        logger.warning("⚠️ matching seeded no vertices; boosting skipped")
        return None, RecoveryReport(match=match, skipped_boost=True)
    pi, boost_report = boost(
        g0, g1, partial, n, p, gamma, truth=truth, delta=params.delta, delta_prime=params.delta_prime,
        scan_order=params.scan_order, max_iterations=params.max_iterations,
    )
    metrics = evaluate(pi, truth, g0, g1) if truth is not None else None
    return pi, RecoveryReport(match=match, boost=boost_report, metrics=metrics)
