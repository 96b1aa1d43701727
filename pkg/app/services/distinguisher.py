"""
Count-deviation correlation statistic: per-pattern products of centered
occurrence counts, their family average, closed-form and exact structured
expectations, and the threshold decision.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.config import settings
from app.models.distinguish.DistinguishModel import Statistic, ThresholdPolicy
from app.models.instance.InstanceModel import ModelParams, RngSeed
from app.models.subiso.SubIsoModel import SearchBudget
from app.services.gen_model import sample_null
from app.services.graph_core import Graph, automorphism_count, canonical_form
from app.services.sub_iso import BudgetExhausted, count_injective_homs, expected_occ, occ
from app.services.test_family import TestFamily

logger = logging.getLogger(__name__)

RHO_FLAG_ABOVE = 10.0


@dataclass
class DistinguishParams:
    family: TestFamily
    n: int
    p: float
    gamma: float
    threshold_policy: ThresholdPolicy = "closed_form_third"
    budget: SearchBudget = field(default_factory=SearchBudget.default)
    calibration_trials: int = field(default_factory=lambda: settings.CALIBRATION_TRIALS)
    calibration_k: float = field(default_factory=lambda: settings.CALIBRATION_K)
    calibration_seed: RngSeed = field(default_factory=lambda: RngSeed(master=0, labels=("calibration",)))
    fixed_threshold: Optional[float] = None
    _threshold: Optional[float] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if len(self.family) == 0:
            raise ValueError("distinguisher needs a nonempty family")
        if not 0.0 <= self.p <= 1.0 or not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"p={self.p}, gamma={self.gamma} out of range")

    @property
    def model(self) -> ModelParams:
        return ModelParams(n=self.n, p=self.p, gamma=self.gamma)

    @property
    def auts(self) -> List[int]:
        return self.family.automorphism_counts()

    @property
    def mus(self) -> List[float]:
        """Null mean of each member's count, exact in n."""
        r = self.p * self.gamma
        return [expected_occ(self.n, r, h, aut) for h, aut in zip(self.family.members, self.auts)]

    @property
    def mu(self) -> float:
        return self.mus[0]

    def threshold(self) -> float:
        if self._threshold is None:
            if self.fixed_threshold is not None:
                self._threshold = self.fixed_threshold
            elif self.threshold_policy == "calibrated":
                self._threshold = calibrate_threshold(self, self.calibration_seed)
            else:
                lower = expected_P_struct_lower(self.n, self.p, self.gamma, self.family.v, self.family.e)
                self._threshold = lower / 3.0
            if self._threshold <= 0:
                logger.warning(f"⚠️ non-positive threshold {self._threshold}; every P <= 0 reads as null")
        return self._threshold


def p_H(g0: Graph, g1: Graph, h: Graph, mu: float, budget: Optional[SearchBudget] = None,
        aut: Optional[int] = None) -> float:
    """(occ(h, g0) - mu) * (occ(h, g1) - mu); raises BudgetExhausted."""
    return (occ(h, g0, budget, aut) - mu) * (occ(h, g1, budget, aut) - mu)


def P_statistic(g0: Graph, g1: Graph, params: DistinguishParams) -> Statistic:
    """Average of p_H over the family, in family order; exhausted members are left out and flagged."""
    per_member: List[Optional[float]] = []
    occ0: List[Optional[int]] = []
    occ1: List[Optional[int]] = []
    partial = False
    mus = params.mus
    for h, aut, mu in zip(params.family.members, params.auts, mus):
        try:
            c0 = occ(h, g0, params.budget, aut)
            c1 = occ(h, g1, params.budget, aut)
        except BudgetExhausted as e:
            logger.warning(f"⚠️ member count stopped: {e}")
            partial = True
            per_member.append(None)
            occ0.append(None)
            occ1.append(None)
            continue
        occ0.append(c0)
        occ1.append(c1)
        per_member.append((c0 - mu) * (c1 - mu))
    values = [x for x in per_member if x is not None]
    P = math.fsum(values) / len(values) if values else None
    return Statistic(
        per_member=per_member,
        occ_g0=occ0,
        occ_g1=occ1,
        mu=mus[0],
        P=P,
        policy=params.threshold_policy,
        partial=partial,
    )


def expected_P_struct_lower(n: int, p: float, gamma: float, v: int, e: int) -> float:
    """(n)_v gamma^(2e) (p^e - p^(2e)), valid for automorphism-free members."""
    if v > n:
        return 0.0
    return math.perm(n, v) * gamma ** (2 * e) * (p ** e - p ** (2 * e))


def _overlap_classes(h: Graph) -> Dict[Tuple, Tuple[int, int, Graph]]:
    """canonical form -> (number of edge subsets of h in the class, vertex count, representative)."""
    classes: Dict[Tuple, Tuple[int, int, Graph]] = {}
    edges = h.edges
    for mask in range(1, 1 << len(edges)):
        chosen = [edges[i] for i in range(len(edges)) if mask >> i & 1]
        verts = sorted({x for pair in chosen for x in pair})
        index = {x: i for i, x in enumerate(verts)}
        j = Graph(len(verts), tuple(sorted((index[a], index[b]) for a, b in chosen)))
        key = (len(verts), canonical_form(j).edges)
        count, nv, rep = classes.get(key, (0, len(verts), j))
        classes[key] = (count + 1, nv, rep)
    return classes


def exact_expected_pH_struct(h: Graph, n: int, p: float, gamma: float) -> float:
    """
    Exact structured expectation of p_H.

    Expands p^(-k) - 1 over nonempty shared edge sets F: pairs of copies
    that share at least F contribute (1/p - 1)^|F|, and the identified
    vertices outside F are free. Edge sets are grouped by isomorphism class
    J of the graph they span, each weighted by inj(J, h) * occ(J, h) and the
    number of ways to overlap the remaining vertices.
    """
    e, v = h.m, h.n
    if e > settings.EXPECTATION_MAX_EDGES:
        raise ValueError(f"pattern has {e} edges, above the enumeration cap {settings.EXPECTATION_MAX_EDGES}")
    if p == 0.0 or e == 0:
        return 0.0
    aut = automorphism_count(h)
    unlimited = SearchBudget.unlimited()
    total = 0.0
    for count, v_j, rep in _overlap_classes(h).values():
        k = rep.m
        injections = count_injective_homs(rep, h, unlimited)
        free = v - v_j
        ways = sum(math.comb(free, t) ** 2 * math.factorial(t) * math.perm(n, 2 * v - v_j - t) for t in range(free + 1))
        total += count * injections * ways * p ** (2 * e - k) * (1.0 - p) ** k
    return gamma ** (2 * e) * total / aut ** 2


def expected_P_struct_exact(family: TestFamily, n: int, p: float, gamma: float) -> float:
    values = [exact_expected_pH_struct(h, n, p, gamma) for h in family.members]
    return math.fsum(values) / len(values)


def calibrate_threshold(params: DistinguishParams, seed: RngSeed) -> float:
    """Null mean plus k standard deviations of P over seeded null samples."""
    model = params.model
    samples = []
    for t in range(params.calibration_trials):
        g0, g1 = sample_null(model, seed.child(f"calibration-{t}"))
        stat = P_statistic(g0, g1, params)
        if stat.P is not None:
            samples.append(stat.P)
    if len(samples) < 2:
        raise ValueError("calibration produced fewer than two usable null samples")
    values = np.asarray(samples, dtype=np.float64)
    threshold = float(values.mean() + params.calibration_k * values.std(ddof=1))
    logger.info(
        f"calibrated threshold {threshold:.6g} from {len(samples)} null samples "
        f"(mean {values.mean():.6g}, k={params.calibration_k})"
    )
    return threshold


def decide(g0: Graph, g1: Graph, params: DistinguishParams) -> Statistic:
    """Statistic with threshold and decision filled in: structured when P exceeds the threshold."""
    stat = P_statistic(g0, g1, params)
    threshold = params.threshold()
    decision = "structured" if stat.P is not None and stat.P > threshold else "null"
    if stat.partial:
        logger.warning(f"⚠️ decision {decision} rests on a partial statistic")
    return stat.model_copy(update={"threshold": threshold, "decision": decision})


def rho_diagnostic(n: int, p: float, gamma: float, v: int, delta: float) -> float:
    """v^2 / ((p gamma)^(1/(1-delta)) n); large values mean the family is too big for this graph."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    rho = v ** 2 / ((p * gamma) ** (1.0 / (1.0 - delta)) * n)
    if rho > RHO_FLAG_ABOVE:
        logger.warning(f"⚠️ rho = {rho:.3g} exceeds {RHO_FLAG_ABOVE}")
    return rho


def rho_flagged(rho: float) -> bool:
    return rho > RHO_FLAG_ABOVE
