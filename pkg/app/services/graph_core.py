"""
Immutable simple graphs with exact density arithmetic, canonical labeling,
automorphism counting and strict-balance verification.
"""
import heapq
import logging
from collections import deque
from fractions import Fraction
from functools import total_ordering
from typing import FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from app.config import settings
from app.models.graph.GraphModel import BalanceVerdict, CanonicalForm

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]

# group elements are materialized for orbit pruning only up to this order
AUT_ENUMERATE_LIMIT = 20000


class GraphError(ValueError):
    """Invalid graph input or an operation outside its domain"""


class Graph:
    """Simple undirected graph on vertices 0..n-1. Build with make_graph."""

    __slots__ = ("n", "edges", "_adjacency", "_neighbor_sets", "_edge_set")

    def __init__(self, n: int, edges: Tuple[Edge, ...]):
        nbrs: List[List[int]] = [[] for _ in range(n)]
        for u, v in edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_edge_set", frozenset(edges))
        object.__setattr__(self, "_adjacency", tuple(tuple(sorted(x)) for x in nbrs))
        object.__setattr__(self, "_neighbor_sets", tuple(frozenset(x) for x in nbrs))

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    def __reduce__(self):
        return (Graph, (self.n, self.edges))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        return self._adjacency

    def neighbors(self, u: int) -> FrozenSet[int]:
        return self._neighbor_sets[u]

    def degree(self, u: int) -> int:
        return len(self._adjacency[u])

    def degrees(self) -> List[int]:
        return [len(a) for a in self._adjacency]

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._edge_set if u < v else (v, u) in self._edge_set

    def edge_set(self) -> FrozenSet[Edge]:
        return self._edge_set

    def adjacency_matrix(self, dtype=np.int64) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=dtype)
        if self.edges:
            e = np.asarray(self.edges, dtype=np.int64)
            a[e[:, 0], e[:, 1]] = 1
            a[e[:, 1], e[:, 0]] = 1
        return a

    def to_networkx(self) -> nx.Graph:
        nxg = nx.Graph()
        nxg.add_nodes_from(range(self.n))
        nxg.add_edges_from(self.edges)
        return nxg

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def make_graph(n: int, edges: Iterable[Sequence[int]]) -> Graph:
    """Validate and normalize an edge list into a Graph (u < v, sorted)."""
    n = int(n)
    if n < 0:
        raise GraphError(f"negative vertex count: {n}")
    seen = set()
    for pair in edges:
        u, v = int(pair[0]), int(pair[1])
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"endpoint out of range: ({u}, {v}) for n={n}")
        if u == v:
            raise GraphError(f"self-loop: ({u}, {v})")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise GraphError(f"duplicate edge: ({u}, {v})")
        seen.add(key)
    return Graph(n, tuple(sorted(seen)))


def empty_graph(n: int) -> Graph:
    return Graph(int(n), ())


def complete_graph(n: int) -> Graph:
    return Graph(int(n), tuple((u, v) for u in range(n) for v in range(u + 1, n)))


@total_ordering
class Density:
    """Exact edges/vertices ratio; comparisons by cross-multiplication."""

    __slots__ = ("edges", "vertices")

    def __init__(self, edges: int, vertices: int):
        if vertices <= 0:
            raise GraphError("density is undefined for a graph with no vertices")
        self.edges = int(edges)
        self.vertices = int(vertices)

    @staticmethod
    def _parts(other) -> Tuple[int, int]:
        if isinstance(other, Density):
            return other.edges, other.vertices
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            return f.numerator, f.denominator
        raise TypeError(f"cannot compare Density with {type(other).__name__}")

    def __eq__(self, other) -> bool:
        try:
            e, v = self._parts(other)
        except TypeError:
            return NotImplemented
        return self.edges * v == e * self.vertices

    def __lt__(self, other) -> bool:
        e, v = self._parts(other)
        return self.edges * v < e * self.vertices

    def __hash__(self) -> int:
        return hash(self.as_fraction())

    def as_fraction(self) -> Fraction:
        return Fraction(self.edges, self.vertices)

    def __float__(self) -> float:
        return self.edges / self.vertices

    def __repr__(self) -> str:
        return f"Density({self.edges}/{self.vertices})"


def density(g: Graph) -> Density:
    return Density(g.m, g.n)


class Permutation:
    """Bijection on 0..n-1 stored as its image sequence."""

    __slots__ = ("image",)

    def __init__(self, image: Iterable[int]):
        img = tuple(int(x) for x in image)
        if sorted(img) != list(range(len(img))):
            raise GraphError("image is not a bijection on 0..n-1")
        object.__setattr__(self, "image", img)

    def __setattr__(self, name, value):
        raise AttributeError("Permutation is immutable")

    def __reduce__(self):
        return (Permutation, (self.image,))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    @property
    def n(self) -> int:
        return len(self.image)

    def __len__(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i]

    def __iter__(self) -> Iterator[int]:
        return iter(self.image)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.image == other.image

    def __hash__(self) -> int:
        return hash(self.image)

    def __repr__(self) -> str:
        return f"Permutation({list(self.image)})"

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.image)
        for i, p in enumerate(self.image):
            inv[p] = i
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: i -> self(other(i))."""
        if len(other) != len(self):
            raise GraphError("cannot compose permutations of different sizes")
        return Permutation(self.image[j] for j in other.image)

    def fixed_points(self) -> int:
        return sum(1 for i, p in enumerate(self.image) if i == p)


def induced_subgraph(g: Graph, s: Iterable[int]) -> Graph:
    verts = sorted(set(int(x) for x in s))
    for x in verts:
        if not 0 <= x < g.n:
            raise GraphError(f"vertex out of range: {x}")
    index = {v: i for i, v in enumerate(verts)}
    edges = [(index[u], index[v]) for u, v in g.edges if u in index and v in index]
    return Graph(len(verts), tuple(sorted(edges)))


def is_connected(g: Graph) -> bool:
    if g.n < 1:
        raise GraphError("connectivity is undefined for a graph with no vertices")
    seen = [False] * g.n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for w in g.adjacency[u]:
            if not seen[w]:
                seen[w] = True
                count += 1
                queue.append(w)
    return count == g.n


def connected_components(g: Graph) -> List[List[int]]:
    seen = [False] * g.n
    comps = []
    for s in range(g.n):
        if seen[s]:
            continue
        seen[s] = True
        comp, queue = [s], deque([s])
        while queue:
            u = queue.popleft()
            for w in g.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    queue.append(w)
        comps.append(sorted(comp))
    return comps


def apply_permutation(g: Graph, p: Permutation) -> Graph:
    """Relabel g so that (u, v) in g iff (p(u), p(v)) in the result."""
    if len(p) != g.n:
        raise GraphError(f"permutation of size {len(p)} applied to graph of order {g.n}")
    img = p.image
    edges = []
    for u, v in g.edges:
        a, b = img[u], img[v]
        edges.append((a, b) if a < b else (b, a))
    return Graph(g.n, tuple(sorted(edges)))


def mismatched_edges(g0: Graph, g1: Graph, p: Permutation) -> int:
    """Pairs (u, v) where exactly one of (u,v) in g0 and (p(u),p(v)) in g1 holds."""
    if g0.n != g1.n:
        raise GraphError(f"order mismatch: {g0.n} vs {g1.n}")
    pulled = apply_permutation(g1, p.inverse())
    return len(g0.edge_set() ^ pulled.edge_set())


# ---------------------------------------------------------------------------
# canonical labeling
# ---------------------------------------------------------------------------

class _SearchTree:
    """Individualization-refinement over ordered partitions (cell index per vertex)."""

    def __init__(self, g: Graph):
        self.n = g.n
        self.adj = g.adjacency_matrix(np.int64)
        self.edge_arr = np.asarray(g.edges, dtype=np.int64).reshape(-1, 2)

    def refine(self, cells: np.ndarray) -> np.ndarray:
        n = self.n
        k = int(cells.max()) + 1
        while k < n:
            onehot = np.zeros((n, k), dtype=np.int64)
            onehot[np.arange(n), cells] = 1
            signature = np.column_stack((cells, self.adj @ onehot))
            _, new = np.unique(signature, axis=0, return_inverse=True)
            new = new.reshape(-1)
            k_new = int(new.max()) + 1
            if k_new == k:
                break
            cells, k = new, k_new
        return cells

    @staticmethod
    def individualize(cells: np.ndarray, y: int) -> np.ndarray:
        c = cells[y]
        out = cells.copy()
        out[cells >= c] += 1
        out[y] = c
        return out

    @staticmethod
    def target_cell(cells: np.ndarray) -> Optional[np.ndarray]:
        sizes = np.bincount(cells)
        big = np.flatnonzero(sizes > 1)
        if big.size == 0:
            return None
        return np.flatnonzero(cells == big[0])

    @staticmethod
    def shape(cells: np.ndarray) -> Tuple[int, ...]:
        return tuple(np.bincount(cells).tolist())

    def certificate(self, labels: np.ndarray) -> Tuple[int, ...]:
        if self.edge_arr.size == 0:
            return ()
        lab = labels[self.edge_arr]
        lab.sort(axis=1)
        codes = np.sort(lab[:, 0] * self.n + lab[:, 1])
        return tuple(codes.tolist())

    def first_path(self):
        cells = self.refine(np.zeros(self.n, dtype=np.int64))
        path, shapes = [], [self.shape(cells)]
        while True:
            target = self.target_cell(cells)
            if target is None:
                return path, cells, shapes
            x = int(target[0])
            path.append((cells, target, x))
            cells = self.refine(self.individualize(cells, x))
            shapes.append(self.shape(cells))

    def find_equivalent_leaf(self, cells, depth, first_cert, shapes) -> Optional[np.ndarray]:
        if depth >= len(shapes) or self.shape(cells) != shapes[depth]:
            return None
        target = self.target_cell(cells)
        if target is None:
            return cells if self.certificate(cells) == first_cert else None
        for y in target:
            leaf = self.find_equivalent_leaf(
                self.refine(self.individualize(cells, int(y))), depth + 1, first_cert, shapes
            )
            if leaf is not None:
                return leaf
        return None


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _automorphism_generators(tree: _SearchTree):
    """Generators of Aut(g) and its order, from the first path of the search tree, bottom-up."""
    path, leaf, shapes = tree.first_path()
    first_cert = tree.certificate(leaf)
    generators: List[np.ndarray] = []
    orbits = _UnionFind(tree.n)
    order = 1
    for k in range(len(path) - 1, -1, -1):
        cells, target, x = path[k]
        for y in target.tolist():
            if orbits.find(y) == orbits.find(x):
                continue
            found = tree.find_equivalent_leaf(
                tree.refine(tree.individualize(cells, y)), k + 1, first_cert, shapes
            )
            if found is None:
                continue
            gamma = np.argsort(found)[leaf]
            generators.append(gamma)
            for v in range(tree.n):
                orbits.union(v, int(gamma[v]))
        root = orbits.find(x)
        order *= sum(1 for y in target.tolist() if orbits.find(y) == root)
    return generators, order, first_cert


def _group_closure(generators: List[np.ndarray], n: int, limit: int) -> Optional[np.ndarray]:
    identity = tuple(range(n))
    seen = {identity}
    frontier = [identity]
    gens = [g.tolist() for g in generators]
    while frontier:
        nxt = []
        for elem in frontier:
            for g in gens:
                prod = tuple(g[i] for i in elem)
                if prod not in seen:
                    seen.add(prod)
                    if len(seen) > limit:
                        return None
                    nxt.append(prod)
        frontier = nxt
    return np.array(sorted(seen), dtype=np.int64).reshape(len(seen), n)


def _orbit_representatives(target, prefix, group, generators, n) -> List[int]:
    members = target.tolist()
    if group is not None:
        stab = group
        if prefix:
            idx = np.asarray(prefix, dtype=np.int64)
            stab = group[np.all(group[:, idx] == idx, axis=1)]
        covered, reps = set(), []
        for y in members:
            if y in covered:
                continue
            reps.append(y)
            covered.update(stab[:, y].tolist())
        return reps
    uf = _UnionFind(n)
    for g in generators:
        if all(int(g[x]) == x for x in prefix):
            for v in range(n):
                uf.union(v, int(g[v]))
    reps, roots = [], set()
    for y in members:
        r = uf.find(y)
        if r not in roots:
            roots.add(r)
            reps.append(y)
    return reps


def canonical_form(g: Graph) -> CanonicalForm:
    """Canonical relabeling plus |Aut(g)| by individualization-refinement."""
    if g.n > settings.CANONICAL_MAX_VERTICES:
        raise GraphError(f"canonical form capped at {settings.CANONICAL_MAX_VERTICES} vertices, got {g.n}")
    if g.n == 0:
        return CanonicalForm(n=0, edges=(), automorphism_count=1)
    tree = _SearchTree(g)
    generators, order, _ = _automorphism_generators(tree)
    group = _group_closure(generators, g.n, AUT_ENUMERATE_LIMIT) if order <= AUT_ENUMERATE_LIMIT else None

    best: List[Optional[Tuple[int, ...]]] = [None]

    def visit(cells: np.ndarray, prefix: Tuple[int, ...]) -> None:
        target = tree.target_cell(cells)
        if target is None:
            cert = tree.certificate(cells)
            if best[0] is None or cert < best[0]:
                best[0] = cert
            return
        for y in _orbit_representatives(target, prefix, group, generators, g.n):
            visit(tree.refine(tree.individualize(cells, y)), prefix + (y,))

    visit(tree.refine(np.zeros(g.n, dtype=np.int64)), ())
    edges = tuple(divmod(code, g.n) for code in best[0])
    return CanonicalForm(n=g.n, edges=edges, automorphism_count=order)


def automorphism_count(g: Graph) -> int:
    if g.n == 0:
        return 1
    if g.n > settings.CANONICAL_MAX_VERTICES:
        raise GraphError(f"automorphism search capped at {settings.CANONICAL_MAX_VERTICES} vertices, got {g.n}")
    _, order, _ = _automorphism_generators(_SearchTree(g))
    return order


def automorphisms(g: Graph, limit: int = AUT_ENUMERATE_LIMIT) -> List[Permutation]:
    """All automorphisms of g, sorted by image; raises when |Aut(g)| exceeds limit."""
    if g.n == 0:
        return [Permutation(())]
    if g.n > settings.CANONICAL_MAX_VERTICES:
        raise GraphError(f"automorphism search capped at {settings.CANONICAL_MAX_VERTICES} vertices, got {g.n}")
    generators, order, _ = _automorphism_generators(_SearchTree(g))
    if order > limit:
        raise GraphError(f"automorphism group of order {order} exceeds limit {limit}")
    group = _group_closure(generators, g.n, limit)
    return [Permutation(row) for row in group.tolist()]


def are_isomorphic(a: Graph, b: Graph) -> bool:
    if a.n != b.n or a.m != b.m or sorted(a.degrees()) != sorted(b.degrees()):
        return False
    return canonical_form(a) == canonical_form(b)


# ---------------------------------------------------------------------------
# strict balance
# ---------------------------------------------------------------------------

def _mask_vertices(mask: int, n: int) -> Tuple[int, ...]:
    return tuple(i for i in range(n) if (mask >> i) & 1)


def _subset_edge_counts(g: Graph) -> Tuple[np.ndarray, np.ndarray]:
    """Induced edge count and size of every vertex subset, indexed by bitmask."""
    n = g.n
    masks = np.arange(1 << n, dtype=np.int64)
    counts = np.zeros(1 << n, dtype=np.int32)
    for i in range(n):
        lower = 0
        for j in g.adjacency[i]:
            if j < i:
                lower |= 1 << j
        half = 1 << i
        counts[half:2 * half] = counts[:half] + np.bitwise_count(masks[:half] & lower)
    return counts, np.bitwise_count(masks)


def _densest_proper_size(profile: List[Optional[int]], n: int) -> Optional[int]:
    best = None
    for s in range(1, n):
        if profile[s] is None:
            return None
        if best is None or Fraction(profile[s], s) > Fraction(profile[best], best):
            best = s
    return best


def _exhaustive_balance(g: Graph) -> BalanceVerdict:
    n, m = g.n, g.m
    counts, sizes = _subset_edge_counts(g)
    prof = np.full(n + 1, -1, dtype=np.int64)
    np.maximum.at(prof, sizes, counts)
    profile = [int(x) for x in prof]
    s_best = _densest_proper_size(profile, n)
    slack = Fraction(m, n) - Fraction(profile[s_best], s_best)
    witness = None
    if profile[s_best] * n >= m * s_best:
        hit = np.flatnonzero((sizes == s_best) & (counts == profile[s_best]))
        witness = _mask_vertices(int(hit[0]), n)
    return BalanceVerdict(
        strictly_balanced=witness is None,
        witness=witness,
        profile=profile,
        slack=slack,
        exhaustive=True,
        profile_complete=True,
    )


def _violating_subset_mincut(g: Graph) -> Optional[Tuple[int, ...]]:
    """Some proper nonempty S with n*e(S) >= m*|S|, or None, via project-selection min cuts."""
    n, m = g.n, g.m
    if m == 0:
        return (0,)
    big = n + 1
    for x in range(n):
        net = nx.DiGraph()
        for u, v in g.edges:
            if x in (u, v):
                continue
            node = ("e", u, v)
            net.add_edge("s", node, capacity=big * n)
            net.add_edge(node, ("v", u))
            net.add_edge(node, ("v", v))
        if net.number_of_nodes() == 0:
            continue
        for u in range(n):
            if u != x and ("v", u) in net:
                net.add_edge(("v", u), "t", capacity=big * m - 1)
        if "t" not in net:
            continue
        total = big * n * sum(1 for u, v in g.edges if x not in (u, v))
        cut, (source_side, _) = nx.minimum_cut(net, "s", "t")
        if total - cut > 0:
            return tuple(sorted(k[1] for k in source_side if isinstance(k, tuple) and k[0] == "v"))
    return None


def _peeling_lower_bounds(g: Graph) -> List[int]:
    """Edges left after repeatedly deleting a min-degree vertex, per remaining size."""
    n = g.n
    deg = g.degrees()
    alive = [True] * n
    heap = [(d, u) for u, d in enumerate(deg)]
    heapq.heapify(heap)
    edges = g.m
    lower = [0] * (n + 1)
    lower[n] = edges
    remaining = n
    while heap and remaining > 0:
        d, u = heapq.heappop(heap)
        if not alive[u] or d != deg[u]:
            continue
        alive[u] = False
        edges -= deg[u]
        remaining -= 1
        lower[remaining] = edges
        for w in g.adjacency[u]:
            if alive[w]:
                deg[w] -= 1
                heapq.heappush(heap, (deg[w], w))
    return lower


def _max_edges_of_size(g: Graph, s: int, lower: int, budget: List[int]) -> Optional[int]:
    """Branch and bound for the densest s-vertex induced subgraph; None when the node budget runs out."""
    n = g.n
    order = sorted(range(n), key=lambda u: -g.degree(u))
    deg = [g.degree(u) for u in range(n)]
    best = [lower]
    chosen: List[int] = []
    conn = [0] * n

    def bound(i: int, inside: int) -> int:
        t = s - len(chosen)
        if t == 0:
            return inside
        gains = sorted((2 * conn[order[j]] + min(deg[order[j]], t - 1) for j in range(i, n)), reverse=True)
        if len(gains) < t:
            return -1
        return inside + sum(gains[:t]) // 2

    def visit(i: int, inside: int) -> bool:
        budget[0] -= 1
        if budget[0] < 0:
            return False
        if len(chosen) == s:
            best[0] = max(best[0], inside)
            return True
        if n - i < s - len(chosen) or bound(i, inside) <= best[0]:
            return True
        u = order[i]
        chosen.append(u)
        for w in g.adjacency[u]:
            conn[w] += 1
        ok = visit(i + 1, inside + conn[u])
        for w in g.adjacency[u]:
            conn[w] -= 1
        chosen.pop()
        return ok and visit(i + 1, inside)

    return best[0] if visit(0, 0) else None


def _budgeted_balance(g: Graph, node_budget: int) -> BalanceVerdict:
    n, m = g.n, g.m
    witness = _violating_subset_mincut(g)
    lower = _peeling_lower_bounds(g)
    profile: List[Optional[int]] = [None] * (n + 1)
    profile[0], profile[1], profile[n] = 0, 0, m
    if n >= 2:
        profile[2] = 1 if m else 0
        profile[n - 1] = m - min(g.degrees())
    budget = [node_budget]
    for s in range(3, n - 1):
        profile[s] = _max_edges_of_size(g, s, lower[s], budget)
    complete = all(x is not None for x in profile)
    slack = None
    if complete:
        s_best = _densest_proper_size(profile, n)
        slack = Fraction(m, n) - Fraction(profile[s_best], s_best)
    else:
        logger.info(f"balance profile for n={n} left incomplete after {node_budget} search nodes")
    return BalanceVerdict(
        strictly_balanced=witness is None,
        witness=witness,
        profile=profile,
        slack=slack,
        exhaustive=False,
        profile_complete=complete,
    )


def is_strictly_balanced(g: Graph, node_budget: Optional[int] = None) -> BalanceVerdict:
    """
    Check that every proper induced subgraph is strictly sparser than g.

    Exhaustive subset scan up to BALANCE_EXHAUSTIVE_MAX_VERTICES. Larger graphs
    get an exact verdict from min cuts and a budgeted per-size profile whose
    unresolved entries are None.
    """
    if g.n < 2:
        raise GraphError("strict balance needs at least 2 vertices")
    if g.n <= settings.BALANCE_EXHAUSTIVE_MAX_VERTICES:
        return _exhaustive_balance(g)
    if node_budget is None:
        node_budget = settings.BALANCE_PROFILE_NODES
    return _budgeted_balance(g, node_budget)
