"""
Construction and certification of test-graph families: random regular
graphs, regular graphs plus a matching, and subdivided cubic graphs, each
checked for balance, trivial automorphism group and sparse pairwise overlap.
"""
import logging
import math
from collections import Counter
from functools import lru_cache
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.config import settings
from app.models.family.FamilyModel import (
    FamilyDocument,
    FamilySpec,
    FeasibilityCondition,
    FeasibilityReport,
    PairCertificate,
    PairVerdict,
    SizeBound,
    VerificationReport,
)
from app.models.graph.GraphModel import CanonicalForm, GraphPayload
from app.models.instance.InstanceModel import RngSeed
from app.models.subiso.SubIsoModel import SearchBudget
from app.services.graph_core import (
    Graph,
    GraphError,
    are_isomorphic,
    canonical_form,
    is_connected,
    is_strictly_balanced,
    make_graph,
)
from app.services.serialization import dumps_graph, loads_graph, pretty_json, read_text, write_text

logger = logging.getLogger(__name__)


class FamilyError(ValueError):
    """Infeasible family parameters or a generator that ran out of retries"""


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _pairing_attempt(rng: np.random.Generator, v: int, d: int) -> Optional[Graph]:
    stubs = rng.permutation(np.repeat(np.arange(v, dtype=np.int64), d)).reshape(-1, 2)
    lo, hi = stubs.min(axis=1), stubs.max(axis=1)
    if (lo == hi).any():
        return None
    codes = np.sort(lo * v + hi)
    if (codes[1:] == codes[:-1]).any():
        return None
    return Graph(v, tuple(divmod(int(c), v) for c in codes))


def gen_regular(v: int, d: int, seed: RngSeed) -> Graph:
    """Uniform simple d-regular graph on v vertices by the pairing model with rejection."""
    if (v * d) % 2 or not 3 <= d < v:
        raise FamilyError(f"no pairing-model {d}-regular graph on {v} vertices")
    rng = seed.generator()
    for _ in range(settings.PAIRING_MAX_RETRIES):
        g = _pairing_attempt(rng, v, d)
        if g is not None:
            return g
    raise FamilyError(f"pairing model rejected {settings.PAIRING_MAX_RETRIES} times for v={v}, d={d}")


def pairing_acceptance_rate(v: int, d: int, trials: int, seed: RngSeed) -> float:
    """Fraction of pairings that come out simple."""
    rng = seed.generator()
    hits = sum(1 for _ in range(trials) if _pairing_attempt(rng, v, d) is not None)
    return hits / trials


def gen_regular_plus_matching(v: int, d: int, lam: Union[Fraction, int, str], seed: RngSeed) -> Graph:
    """A d-regular graph plus a random perfect matching on lambda*v random vertices."""
    lam = Fraction(lam)
    j = lam * v
    if j.denominator != 1 or j.numerator % 2 or not 0 <= j <= v:
        raise FamilyError(f"lambda*v = {j} must be an even integer in [0, v]")
    if d < 6:
        logger.warning(f"⚠️ regular_plus_matching with d={d} < 6 is outside the proven regime")
    base = gen_regular(v, d, seed.child("regular"))
    j = int(j)
    if j == 0:
        return base
    rng = seed.child("matching").generator()
    existing = base.edge_set()
    for _ in range(settings.MATCHING_MAX_RETRIES):
        chosen = rng.permutation(rng.choice(v, size=j, replace=False)).reshape(-1, 2)
        extra = {(int(min(a, b)), int(max(a, b))) for a, b in chosen}
        if extra.isdisjoint(existing):
            return Graph(v, tuple(sorted(existing | extra)))
    raise FamilyError(f"matching collided with the base graph {settings.MATCHING_MAX_RETRIES} times")


def gen_subdivided(v: int, lam: Union[Fraction, int, str], seed: RngSeed) -> Graph:
    """
    Subdivide a random cubic graph on lambda*v vertices into v vertices.

    Every base edge becomes a path with k or k+1 internal vertices, where
    k = floor((1-lambda)v / (3 lambda v / 2)); the edges receiving k+1 are
    drawn without replacement. Base vertices keep labels 0..lambda*v-1.
    """
    lam = Fraction(lam)
    j = lam * v
    if j.denominator != 1 or j.numerator % 2 or j < 4 or j > v:
        raise FamilyError(f"lambda*v = {j} must be an even integer in [4, v]")
    j = int(j)
    cubic = gen_regular(j, 3, seed.child("cubic"))
    base_edges = cubic.m
    interior = v - j
    k, longer = divmod(interior, base_edges)
    rng = seed.child("paths").generator()
    long_edges = set(rng.choice(base_edges, size=longer, replace=False).tolist()) if longer else set()
    edges: List[Tuple[int, int]] = []
    next_vertex = j
    for idx, (a, b) in enumerate(cubic.edges):
        length = k + 1 if idx in long_edges else k
        prev = a
        for _ in range(length):
            edges.append((prev, next_vertex))
            prev = next_vertex
            next_vertex += 1
        edges.append((prev, b) if prev < b else (b, prev))
    return make_graph(v, edges)


def generate_candidate(spec: FamilySpec, seed: RngSeed) -> Graph:
    if spec.kind == "regular":
        return gen_regular(spec.v, spec.d, seed)
    if spec.kind == "regular_plus_matching":
        return gen_regular_plus_matching(spec.v, spec.d, spec.lam, seed)
    return gen_subdivided(spec.v, spec.lam, seed)


# ---------------------------------------------------------------------------
# member verification
# ---------------------------------------------------------------------------

def expected_degree_histogram(spec: FamilySpec) -> Dict[int, int]:
    j = spec.branch_vertices
    if spec.kind == "regular":
        return {spec.d: spec.v}
    if spec.kind == "regular_plus_matching":
        hist = {spec.d: spec.v - j, spec.d + 1: j}
    else:
        hist = {3: j, 2: spec.v - j}
    return {deg: c for deg, c in hist.items() if c}


def _size_bounds(spec: FamilySpec, profile: Sequence[Optional[int]], m: int) -> List[SizeBound]:
    v = spec.v
    rows = []
    for s in range(1, v):
        if spec.kind == "subdivided":
            theta = 1 - Fraction(s, v)
            bound = (1 + spec.lam / 2 - theta * spec.lam / 100) * s
            strict = False
        else:
            bound = Fraction(m * s, v)
            strict = True
        got = profile[s]
        ok = None if got is None else (got < bound if strict else got <= bound)
        rows.append(SizeBound(size=s, max_edges=got, bound=bound, strict=strict, ok=ok))
    return rows


def _verify(h: Graph, spec: FamilySpec) -> Tuple[VerificationReport, Optional[CanonicalForm]]:
    failures: List[str] = []
    counts_ok = h.n == spec.v and h.m == spec.edges
    if not counts_ok:
        failures.append(f"expected {spec.v} vertices / {spec.edges} edges, got {h.n} / {h.m}")
    connected = h.n > 0 and is_connected(h)
    if not connected:
        failures.append("not connected")
    histogram = dict(sorted(Counter(h.degrees()).items()))
    degree_ok = histogram == expected_degree_histogram(spec)
    if not degree_ok:
        failures.append(f"degree histogram {histogram}")

    canonical = None
    aut = None
    try:
        canonical = canonical_form(h)
        aut = canonical.automorphism_count
        if aut != 1:
            failures.append(f"automorphism group of order {aut}")
    except GraphError as e:
        failures.append(str(e))

    strictly = slack = quantitative = None
    bounds: List[SizeBound] = []
    if h.n >= 2:
        verdict = is_strictly_balanced(h, node_budget=spec.balance_nodes)
        strictly, slack = verdict.strictly_balanced, verdict.slack
        if not strictly:
            failures.append(f"not strictly balanced, witness {list(verdict.witness)}")
        if counts_ok:
            bounds = _size_bounds(spec, verdict.profile, h.m)
            oks = [b.ok for b in bounds]
            quantitative = False if False in oks else (None if None in oks else True)
            if quantitative is None:
                failures.append("quantitative balance unknown within budget")
            elif not quantitative:
                sizes = [b.size for b in bounds if b.ok is False]
                failures.append(f"per-size density bound violated at sizes {sizes}")

    report = VerificationReport(
        counts_ok=counts_ok,
        connected=connected,
        degree_ok=degree_ok,
        degree_histogram=histogram,
        automorphism_count=aut,
        strictly_balanced=strictly,
        balance_slack=slack,
        size_bounds=bounds,
        quantitative_ok=quantitative,
        failures=failures,
        passed=not failures,
    )
    return report, canonical


def verify_member(h: Graph, spec: FamilySpec) -> VerificationReport:
    """Run every member check; failures are report entries, never exceptions."""
    return _verify(h, spec)[0]


# ---------------------------------------------------------------------------
# pairwise intersection
# ---------------------------------------------------------------------------

class _PairSearch:
    """
    Branch and bound over connected common subgraphs of h1 and h2.

    A state is a partial bijection sigma between vertex sets grown along
    common edges. With scale D, each J vertex x contributes D*deg_J(x) - 2A
    and J violates when the total reaches -2B.
    """

    def __init__(self, h1: Graph, h2: Graph, a: Fraction, b: Fraction, node_budget: int, max_size: int):
        self.h1, self.h2 = h1, h2
        self.max_size = max_size
        scale = math.lcm(a.denominator, b.denominator)
        self.D = scale
        self.A = int(a * scale)
        self.B = int(b * scale)
        self.budget = node_budget
        self.nodes = 0
        self.sigma: Dict[int, int] = {}
        self.used2: set = set()
        self.cdeg: Dict[int, int] = {}
        self.edges = 0
        self.forbidden: set = set()
        self.root = -1
        cap = max(h2.degrees(), default=0)
        self.extra = sorted(
            ((max(0, scale * min(h1.degree(z), cap) - 2 * self.A), z) for z in range(h1.n)),
            reverse=True,
        )

    def _open(self, x: int) -> Tuple[List[int], List[int]]:
        y = self.sigma[x]
        o1 = [x2 for x2 in self.h1.adjacency[x] if x2 > self.root and x2 not in self.sigma]
        o2 = [y2 for y2 in self.h2.adjacency[y] if y2 not in self.used2]
        f = self.forbidden
        o1 = [x2 for x2 in o1 if any((x2, y2) not in f for y2 in o2)]
        o2 = [y2 for y2 in o2 if any((x2, y2) not in f for x2 in o1)]
        return o1, o2

    def bound(self) -> int:
        total = 0
        for x in self.sigma:
            o1, o2 = self._open(x)
            total += self.D * (self.cdeg[x] + min(len(o1), len(o2))) - 2 * self.A
        room = self.max_size - len(self.sigma)
        for gain, z in self.extra:
            if room <= 0 or gain <= 0:
                break
            if z > self.root and z not in self.sigma:
                total += gain
                room -= 1
        return total

    def value(self) -> int:
        return 2 * self.D * self.edges - 2 * self.A * len(self.sigma)

    def candidates(self) -> List[Tuple[int, int, int]]:
        """(links to J, x', y') for pairs extending J along a common edge, best first."""
        seen = {}
        for x, y in self.sigma.items():
            o1, o2 = self._open(x)
            for x2 in o1:
                for y2 in o2:
                    if (x2, y2) in self.forbidden or (x2, y2) in seen:
                        continue
                    seen[(x2, y2)] = self._links(x2, y2)
        return sorted(((-links, x2, y2) for (x2, y2), links in seen.items()))

    def _links(self, x2: int, y2: int) -> int:
        return sum(
            1 for x in self.h1.adjacency[x2] if x in self.sigma and self.h2.has_edge(self.sigma[x], y2)
        )

    def _add(self, x: int, y: int) -> int:
        linked = [w for w in self.h1.adjacency[x] if w in self.sigma and self.h2.has_edge(self.sigma[w], y)]
        self.sigma[x] = y
        self.used2.add(y)
        self.cdeg[x] = len(linked)
        for w in linked:
            self.cdeg[w] += 1
        self.edges += len(linked)
        return len(linked)

    def _remove(self, x: int) -> None:
        y = self.sigma.pop(x)
        self.used2.discard(y)
        del self.cdeg[x]
        for w in self.h1.adjacency[x]:
            if w in self.sigma and self.h2.has_edge(self.sigma[w], y):
                self.cdeg[w] -= 1
                self.edges -= 1

    def _visit(self) -> bool:
        """True when a violating J is held in sigma."""
        self.nodes += 1
        if self.nodes > self.budget:
            raise _PairBudget()
        if self.edges >= 1 and self.value() >= -2 * self.B:
            return True
        if len(self.sigma) >= self.max_size:
            return False
        excluded = []
        try:
            for _, x2, y2 in self.candidates():
                if self.bound() < -2 * self.B:
                    break
                self._add(x2, y2)
                if self._visit():
                    return True
                self._remove(x2)
                self.forbidden.add((x2, y2))
                excluded.append((x2, y2))
        finally:
            for pair in excluded:
                self.forbidden.discard(pair)
        return False

    def run(self) -> Optional[Dict[int, int]]:
        for x in range(self.h1.n):
            for y in range(self.h2.n):
                self.root = x
                self._add(x, y)
                try:
                    if self.bound() >= -2 * self.B and self._visit():
                        return dict(self.sigma)
                finally:
                    if x in self.sigma and len(self.sigma) == 1:
                        self._remove(x)
        return None


class _PairBudget(Exception):
    pass


@lru_cache(maxsize=512)
def _edge_capacity(h: Graph) -> Tuple[int, ...]:
    """Upper bound on the edges of an s-vertex subgraph of h, indexed by s."""
    cap = [min(s * (s - 1) // 2, h.m) for s in range(h.n + 1)]
    if 2 <= h.n <= settings.BALANCE_EXHAUSTIVE_MAX_VERTICES:
        cap = list(is_strictly_balanced(h).profile)
    return tuple(cap)


def _dense_sizes(h1: Graph, h2: Graph, a: Fraction, b: Fraction) -> List[int]:
    """Vertex counts at which a common J could still reach |E(J)| >= a|V(J)| - b."""
    cap1, cap2 = _edge_capacity(h1), _edge_capacity(h2)
    sizes = []
    for s in range(2, min(h1.n, h2.n) + 1):
        need = max(1, math.ceil(a * s - b))
        if min(cap1[s], cap2[s]) < need:
            continue
        # spanning every vertex with every edge of both means h1 and h2 are isomorphic
        if h1.n == h2.n == s and need == h1.m == h2.m and not are_isomorphic(h1, h2):
            continue
        sizes.append(s)
    return sizes


def pairwise_intersection_check(
    h1: Graph,
    h2: Graph,
    threshold: Tuple[Union[Fraction, int, str], Union[Fraction, int, str]],
    budget: Optional[SearchBudget] = None,
) -> PairVerdict:
    """
    Search for a graph J with at least one edge, embeddable in both h1 and h2,
    with |E(J)| >= a|V(J)| - b.

    Restricting to connected J loses nothing for b >= 0. The induced edge
    profiles of h1 and h2 settle most pairs before any search and cap the
    size of J otherwise. verified means no such J exists; unknown means the
    node budget ran out.
    """
    a, b = Fraction(threshold[0]), Fraction(threshold[1])
    if b < 0:
        raise FamilyError("pair threshold offset b must be non-negative")
    sizes = _dense_sizes(h1, h2, a, b)
    if not sizes:
        return PairVerdict(status="verified", nodes=0)
    nodes = budget.nodes if budget is not None else settings.PAIR_CHECK_NODES
    search = _PairSearch(h1, h2, a, b, nodes, max_size=sizes[-1])
    try:
        sigma = search.run()
    except _PairBudget:
        return PairVerdict(status="unknown", nodes=search.nodes)
    if sigma is None:
        return PairVerdict(status="verified", nodes=search.nodes)
    xs = sorted(sigma)
    index = {x: i for i, x in enumerate(xs)}
    j_edges = [
        (index[u], index[w]) for u, w in h1.edges if u in sigma and w in sigma and h2.has_edge(sigma[u], sigma[w])
    ]
    return PairVerdict(
        status="violated",
        nodes=search.nodes,
        witness=GraphPayload(n=len(xs), edges=j_edges),
        embedding_1=xs,
        embedding_2=[sigma[x] for x in xs],
        witness_density=Fraction(len(j_edges), len(xs)),
    )


# ---------------------------------------------------------------------------
# family assembly
# ---------------------------------------------------------------------------

@dataclass
class TestFamily:
    __test__ = False

    spec: FamilySpec
    members: List[Graph] = field(default_factory=list)
    reports: List[VerificationReport] = field(default_factory=list)
    pair_certificates: List[PairCertificate] = field(default_factory=list)
    complete: bool = False
    candidates_tried: int = 0
    rejections: Dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def v(self) -> int:
        return self.spec.v

    @property
    def e(self) -> int:
        return self.spec.edges

    def automorphism_counts(self) -> List[int]:
        return [r.automorphism_count or 1 for r in self.reports]

    def to_document(self) -> FamilyDocument:
        return FamilyDocument(
            spec=self.spec,
            members=[dumps_graph(g) for g in self.members],
            reports=self.reports,
            pair_certificates=self.pair_certificates,
            complete=self.complete,
            candidates_tried=self.candidates_tried,
            rejections=self.rejections,
        )

    @classmethod
    def from_document(cls, doc: FamilyDocument) -> "TestFamily":
        members = [loads_graph(text) for text in doc.members]
        for g in members:
            if g.n != doc.spec.v or g.m != doc.spec.edges:
                raise FamilyError(f"family member {g} does not match v={doc.spec.v}, e={doc.spec.edges}")
        if len(doc.reports) != len(members):
            raise FamilyError("family document has one report per member")
        return cls(
            spec=doc.spec,
            members=members,
            reports=list(doc.reports),
            pair_certificates=list(doc.pair_certificates),
            complete=doc.complete,
            candidates_tried=doc.candidates_tried,
            rejections=dict(doc.rejections),
        )

    @classmethod
    def from_members(cls, members: Sequence[Graph], spec: FamilySpec) -> "TestFamily":
        """Wrap hand-picked members, verifying each (failures are kept in the reports)."""
        reports = [verify_member(g, spec) for g in members]
        return cls(spec=spec, members=list(members), reports=reports, complete=len(members) >= spec.target_size)

    def save(self, path: Union[str, Path]) -> None:
        write_text(path, pretty_json(self.to_document().model_dump(mode="json", by_alias=True)))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "TestFamily":
        return cls.from_document(FamilyDocument.model_validate_json(read_text(path)))


def _prepare_candidate(args: Tuple[FamilySpec, RngSeed, int]):
    spec, seed, t = args
    try:
        g = generate_candidate(spec, seed.child(f"candidate-{t}"))
    except FamilyError as e:
        return None, None, None, str(e)
    report, canonical = _verify(g, spec)
    return g, report, canonical, None


def _candidate_stream(spec: FamilySpec, seed: RngSeed, workers: int):
    if workers <= 1:
        for t in range(spec.max_candidates):
            yield _prepare_candidate((spec, seed, t))
        return
    batch = workers * 4
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for start in range(0, spec.max_candidates, batch):
            chunk = [(spec, seed, t) for t in range(start, min(start + batch, spec.max_candidates))]
            # map keeps candidate order, so admission stays deterministic
            yield from pool.map(_prepare_candidate, chunk)


def build_family(spec: FamilySpec, seed: RngSeed, workers: Optional[int] = None) -> TestFamily:
    """
    Greedy admission: a verified, non-duplicate candidate joins when its pair
    check against every accepted member is verified. Stops at target_size or
    after max_candidates; a short family comes back with complete=False.
    """
    workers = settings.WORKERS if workers is None else workers
    threshold = spec.pair_threshold()
    pair_budget = SearchBudget(nodes=spec.pair_nodes, max_occurrences=1, seconds=None)
    family = TestFamily(spec=spec)
    seen_forms = set()
    rejections: Counter = Counter()
    logger.info(f"building {spec.kind} family v={spec.v} d'={spec.d_prime} target={spec.target_size}")

    stream = _candidate_stream(spec, seed, workers)
    for g, report, canonical, error in stream:
        if len(family.members) >= spec.target_size:
            break
        family.candidates_tried += 1
        if error is not None:
            rejections["generation"] += 1
            continue
        if not report.passed:
            rejections["verification"] += 1
            continue
        if canonical in seen_forms:
            rejections["duplicate"] += 1
            continue
        seen_forms.add(canonical)
        new_index = len(family.members)
        certificates = []
        for i, other in enumerate(family.members):
            verdict = pairwise_intersection_check(other, g, threshold, pair_budget)
            certificates.append(
                PairCertificate(first=i, second=new_index, status=verdict.status, nodes=verdict.nodes)
            )
            if verdict.status != "verified":
                rejections[f"pair_{verdict.status}"] += 1
                break
        else:
            family.members.append(g)
            family.reports.append(report)
            family.pair_certificates.extend(certificates)
            logger.info(f"✅ member {new_index} admitted after {family.candidates_tried} candidates")
    stream.close()

    family.rejections = dict(sorted(rejections.items()))
    family.complete = len(family.members) >= spec.target_size
    if not family.complete:
        logger.warning(
            f"⚠️ family stopped at {len(family.members)}/{spec.target_size} members "
            f"after {family.candidates_tried} candidates"
        )
    return family


# ---------------------------------------------------------------------------
# parameter feasibility
# ---------------------------------------------------------------------------

def _cond(name: str, value: float, target: str, passed: bool) -> FeasibilityCondition:
    return FeasibilityCondition(name=name, value=float(value), target=target, passed=bool(passed))


def model_delta(n: int, p: float) -> Optional[float]:
    if n < 3 or not 0.0 < p < 1.0:
        return None
    return 1.0 + math.log(p) / math.log(n)


def family_params_feasible(
    n: int,
    p: float,
    gamma: float,
    v: int,
    d_prime: Union[Fraction, int, str],
    family_size: Optional[int] = None,
) -> FeasibilityReport:
    """
    Evaluate the conditions under which a family with v vertices and average
    degree d' supports recovery at (n, p, gamma). Asymptotic "much less than"
    requirements are reported as a ratio that must stay below 1. Everything is
    computed in log space.
    """
    d_prime = Fraction(d_prime)
    dp = float(d_prime)
    delta = model_delta(n, p)
    q = p * gamma ** 2
    regime = "sparse" if d_prime < 3 else "dense"
    report = FeasibilityReport(regime=regime, delta=delta)
    if delta is None or q <= 0.0:
        report.conditions.append(_cond("delta_defined", 0.0, "0 < p < 1 and n >= 3", False))
        return report

    log_n, log_p, log_q, log_v = math.log(n), math.log(p), math.log(q), math.log(v)
    loglog = math.log(log_n) if log_n > 1 else 0.0
    c = report.conditions
    c.append(_cond("delta_range", delta, "0 < delta < 1", 0.0 < delta < 1.0))

    # n p^(d'/2) < 1
    lhs = log_n + dp / 2 * log_p
    c.append(_cond("n_p_half_dprime_below_1", math.exp(lhs), "< 1", lhs < 0))

    if regime == "sparse":
        lam = dp - 2.0
        lo = 2 * delta / (1 - delta)
        hi = lo + loglog / log_n
        c.append(_cond("lambda_window", lam, f"in ({lo:.6g}, {hi:.6g})", lo < lam < hi))
        ratio = v * math.log(v) ** 2 / (lam ** 2 * log_n ** 2) if lam > 0 else math.inf
        c.append(_cond("v_log2v_vs_lambda2_log2n", ratio, "ratio < 1", ratio < 1))
        log_ratio = 2 * log_v - (log_n + (1 + lam / 3) * log_q)
        c.append(_cond("v2_vs_n_q_pow", math.exp(min(log_ratio, 700)), "ratio < 1", log_ratio < 0))
        lhs = log_n + dp / 2 * log_q + 8 * log_v
        c.append(_cond("n_q_half_dprime_v8", math.exp(min(lhs, 700)), ">= 1", lhs >= 0))
        if family_size is not None and family_size > 0:
            lhs = math.log(family_size) + log_v + (v - 1) * log_n + dp * v / 2 * log_q
            c.append(_cond("expected_incidences", math.exp(min(lhs, 700)), ">= 1", lhs >= 0))
        c.append(_cond("delta_below_third", delta, "< 1/3", delta < 1 / 3))
        c.append(_cond("lambda_proven_range", lam, "<= 1/76", lam <= 1 / 76))
    else:
        d = math.floor(dp)
        lam = dp - d
        lo = 2 / (1 - delta)
        hi = lo + loglog / (4 * log_n)
        c.append(_cond("dprime_window", dp, f"in ({lo:.6g}, {hi:.6g})", lo < dp < hi))
        beta = (lam + 1 / 26) / dp
        log_ratio = 2 * log_v - (log_n + (1 - beta) * dp / 2 * log_q)
        c.append(_cond("v2_vs_n_q_pow", math.exp(min(log_ratio, 700)), "ratio < 1", log_ratio < 0))
        for name, log_r in (("p", log_p), ("q", log_q)):
            mid = 2 * (dp + 2) * log_v + log_n + dp / 2 * log_r
            low = math.log(2) + (2 + 2 * (dp + 2)) * log_v + log_r / 50
            high = -math.log(2) - log_r / 50
            c.append(_cond(f"sandwich_lower_{name}", math.exp(max(min(mid - low, 700), -700)), "ratio >= 1", low <= mid))
            c.append(_cond(f"sandwich_upper_{name}", math.exp(max(min(mid - high, 700), -700)), "ratio <= 1", mid <= high))
        c.append(_cond("degree_at_least_6", d, ">= 6", d >= 6))
    return report
