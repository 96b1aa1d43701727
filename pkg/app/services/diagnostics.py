"""Per-vertex analysis quantities on synthetic instances, and planted partial solutions."""
import logging
import math
from typing import List, Optional

import numpy as np
from scipy import sparse

from app.models.harness.HarnessModel import DiagnosticsSummary
from app.models.instance.InstanceModel import RngSeed
from app.models.recovery.RecoveryModel import PartialSolution
from app.models.subiso.SubIsoModel import SearchBudget
from app.services.gen_model import CorrelatedInstance, intersection_graph, pullback_g1
from app.services.graph_core import Graph
from app.services.sub_iso import BudgetExhausted, enumerate_occurrences
from app.services.test_family import TestFamily

logger = logging.getLogger(__name__)


def _sparse_adjacency(g: Graph) -> sparse.csr_matrix:
    if not g.edges:
        return sparse.csr_matrix((g.n, g.n), dtype=np.int64)
    e = np.asarray(g.edges, dtype=np.int64)
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    data = np.ones(rows.size, dtype=np.int64)
    return sparse.csr_matrix((data, (rows, cols)), shape=(g.n, g.n))


def max_joint_neighbors(g0: Graph, g1_pulled: Graph) -> int:
    """Largest count of x adjacent to u in g0 and to w != u in g1 (both on base labels)."""
    if g0.n < 2:
        return 0
    joint = (_sparse_adjacency(g0) @ _sparse_adjacency(g1_pulled)).tolil()
    joint.setdiag(0)
    joint = joint.tocsr()
    joint.eliminate_zeros()
    return int(joint.max()) if joint.nnz else 0


def diagnostics_bu_nu(
    inst: CorrelatedInstance, family: TestFamily, budget: Optional[SearchBudget] = None
) -> DiagnosticsSummary:
    """
    N_u counts family occurrences at u in the intersection graph. B_u counts
    members with such an occurrence that also appear at least twice in the
    base graph.
    """
    n = inst.base.n
    n_u = np.zeros(n, dtype=np.int64)
    b_u = np.zeros(n, dtype=np.int64)
    exhausted = False
    both = intersection_graph(inst)
    auts = family.automorphism_counts()
    expected = 0.0
    q = inst.params.q
    for i, h in enumerate(family.members):
        if h.n <= n:
            expected += h.n * math.perm(n - 1, h.n - 1) * q ** h.m / auts[i]
        pattern_auts = [tuple(range(h.n))] if auts[i] == 1 else None
        try:
            surviving = enumerate_occurrences(h, both, budget, pattern_auts)
            base_copies = len(enumerate_occurrences(h, inst.base, budget, pattern_auts)) if surviving else 0
        except BudgetExhausted as e:
            logger.warning(f"⚠️ diagnostics for member {i} incomplete: {e}")
            exhausted = True
            continue
        touched = set()
        for o in surviving:
            for x in o.vertex_set:
                n_u[x] += 1
                touched.add(x)
        if base_copies >= 2:
            for x in touched:
                b_u[x] += 1
    return DiagnosticsSummary(
        n_u=n_u.tolist(),
        b_u=b_u.tolist(),
        n_u_mean=float(n_u.mean()) if n else 0.0,
        n_u_max=int(n_u.max()) if n else 0,
        b_u_max=int(b_u.max()) if n else 0,
        n_u_expected=expected,
        max_joint_neighbors=max_joint_neighbors(inst.g0, pullback_g1(inst)),
        exhausted=exhausted,
    )


def plant_partial_solution(inst: CorrelatedInstance, theta: float, epsilon: float, seed: RngSeed) -> PartialSolution:
    """
    round(theta n) vertices mapped by truth, round(epsilon * that) of them
    corrupted. Corrupted entries are rotated among their own true targets so
    none stays correct; a single corrupted entry takes a target outside the
    seeded image.
    """
    if not 0.0 < theta <= 1.0 or not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"theta={theta}, epsilon={epsilon} out of range")
    n = inst.base.n
    rng = seed.generator()
    size = max(1, round(theta * n))
    chosen: List[int] = sorted(rng.choice(n, size=size, replace=False).tolist())
    mapping = {u: inst.truth(u) for u in chosen}
    bad = round(epsilon * size)
    if bad == 0:
        return PartialSolution(n=n, mapping=mapping)
    corrupted = rng.permutation(np.asarray(chosen, dtype=np.int64))[:bad].tolist()
    if bad == 1:
        outside = sorted(set(range(n)) - set(mapping.values()))
        if not outside:
            raise ValueError("a single corrupted entry needs a free target; lower theta or raise epsilon")
        mapping[corrupted[0]] = outside[int(rng.integers(len(outside)))]
    else:
        targets = [inst.truth(u) for u in corrupted]
        for k, u in enumerate(corrupted):
            mapping[u] = targets[(k + 1) % bad]
    return PartialSolution(n=n, mapping=mapping)
