"""Desk-scale experiments; run with --runslow."""
import math
from fractions import Fraction
from itertools import combinations
from typing import List

import numpy as np
import pytest
from scipy.stats import binomtest

from app.controllers.bench.BenchController import BenchController
from app.models.family.FamilyModel import FamilySpec
from app.models.harness.HarnessModel import ExperimentConfig
from app.models.instance.InstanceModel import ModelParams, RngSeed
from app.models.subiso.SubIsoModel import SearchBudget
from app.services.diagnostics import plant_partial_solution
from app.services.distinguisher import DistinguishParams, P_statistic, exact_expected_pH_struct, p_H
from app.services.gen_model import sample_er, sample_null, sample_structured
from app.services.graph_core import Graph, canonical_form, is_connected, is_strictly_balanced, make_graph
from app.services.recovery import RecoveryParams, boost, recover
from app.services.sub_iso import count_injective_homs, expected_occ, occ
from app.services.test_family import (
    TestFamily,
    build_family,
    gen_regular,
    gen_subdivided,
    pairwise_intersection_check,
    verify_member,
)
from oracles import injective_homs, strictly_balanced, within_standard_errors

pytestmark = pytest.mark.slow

K4_PENDANT = make_graph(5, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4)])


def _asymmetric_members(v: int, e: int, count: int, seed: int) -> List[Graph]:
    """Distinct connected, strictly balanced, automorphism-free graphs with v vertices and e edges."""
    rng = np.random.default_rng(seed)
    pairs = list(combinations(range(v), 2))
    members: List[Graph] = []
    forms = set()
    for _ in range(50_000):
        if len(members) == count:
            break
        g = make_graph(v, [pairs[i] for i in rng.choice(len(pairs), size=e, replace=False)])
        if not is_connected(g) or not is_strictly_balanced(g).strictly_balanced:
            continue
        form = canonical_form(g)
        if form.automorphism_count == 1 and form not in forms:
            forms.add(form)
            members.append(g)
    assert len(members) == count
    return members


def test_counter_matches_injective_map_oracle():
    rng = np.random.default_rng(17)
    for _ in range(100):
        v, n = int(rng.integers(2, 6)), int(rng.integers(5, 9))
        h = sample_er(v, 0.6, RngSeed(master=int(rng.integers(2**32))))
        g = sample_er(n, 0.5, RngSeed(master=int(rng.integers(2**32))))
        if v > n:
            continue
        assert count_injective_homs(h, g, SearchBudget.unlimited()) == injective_homs(h, g)


def test_pendant_clique_count_follows_its_expectation():
    n, aut = 40, 6
    r = (5 * aut / math.perm(n, 5)) ** (1 / 7)
    assert expected_occ(n, r, K4_PENDANT) == pytest.approx(5.0)
    counts = [occ(K4_PENDANT, sample_er(n, r, RngSeed(master=t))) for t in range(2000)]
    assert within_standard_errors(counts, 5.0)


class TestBalance:
    def test_pendant_clique_is_not_strictly_balanced(self):
        assert not is_strictly_balanced(K4_PENDANT).strictly_balanced

    @pytest.mark.parametrize("v,d", [(12, 3), (14, 3), (10, 4)])
    def test_connected_regular_graphs_are_strictly_balanced(self, v, d):
        for t in range(5):
            g = gen_regular(v, d, RngSeed(master=t))
            if is_connected(g):
                assert is_strictly_balanced(g).strictly_balanced

    def test_verifier_agrees_with_subset_oracle(self):
        rng = np.random.default_rng(3)
        for t in range(50):
            v = int(rng.integers(2, 13))
            g = sample_er(v, float(rng.uniform(0.2, 0.7)), RngSeed(master=t))
            assert is_strictly_balanced(g).strictly_balanced == strictly_balanced(g)


def test_certified_cubic_family():
    spec = FamilySpec(v=16, kind="regular", d=3, target_size=10)
    family = build_family(spec, RngSeed(master=2024), workers=1)
    assert family.complete
    assert len(family) == spec.target_size
    for h, report in zip(family.members, family.reports):
        assert report.passed
        assert report.automorphism_count == 1
        assert report.strictly_balanced
        assert set(h.degrees()) == {3}
    assert len(family.pair_certificates) == len(family) * (len(family) - 1) // 2
    assert all(c.status == "verified" for c in family.pair_certificates)
    threshold = spec.pair_threshold()
    for h1, h2 in combinations(family.members, 2):
        assert pairwise_intersection_check(h1, h2, threshold).status == "verified"


@pytest.mark.parametrize("v,lam", [(20, Fraction(1, 5)), (16, Fraction(1, 4))])
def test_subdivided_members_meet_the_size_bound(v, lam):
    spec = FamilySpec(v=v, kind="subdivided", lam=lam, target_size=1)
    for t in range(3):
        report = verify_member(gen_subdivided(v, lam, RngSeed(master=t)), spec)
        assert report.quantitative_ok
        assert all(b.ok for b in report.size_bounds)


def test_null_statistic_is_centered(frucht):
    family = TestFamily.from_members([frucht], FamilySpec(v=12, kind="regular", d=3, target_size=1))
    n = 60
    r = math.perm(n, 12) ** (-1 / 18)
    model = ModelParams(n=n, p=r, gamma=1.0)
    params = DistinguishParams(family=family, n=n, p=r, gamma=1.0)
    assert params.mu == pytest.approx(1.0)
    values = [P_statistic(*sample_null(model, RngSeed(master=t)), params).P for t in range(500)]
    assert within_standard_errors(values, 0.0)


@pytest.mark.parametrize("pattern", ["edge", "path", "triangle"])
def test_exact_expectation_is_the_count_variance(pattern, triangle, path4):
    h = {"edge": make_graph(2, [(0, 1)]), "path": path4, "triangle": triangle}[pattern]
    n, p = 30, 0.2
    mu = expected_occ(n, p, h)
    model = ModelParams(n=n, p=p, gamma=1.0)
    values = []
    for t in range(1000):
        inst = sample_structured(model, RngSeed(master=t))
        values.append(p_H(inst.g0, inst.g1, h, mu, SearchBudget.unlimited()))
    assert within_standard_errors(values, exact_expected_pH_struct(h, n, p, 1.0))


def test_boosting_from_planted_seeds():
    n, p = 2000, 0.02
    model = ModelParams(n=n, p=p, gamma=1.0)
    exact = 0
    for t in range(20):
        seed = RngSeed(master=t)
        inst = sample_structured(model, seed.child("instance"))
        partial = plant_partial_solution(inst, 0.1, 0.02, seed.child("plant"))
        pi, _ = boost(inst.g0, inst.g1, partial, n, p, 1.0, delta=3, delta_prime=10, scan_order="max_count")
        exact += pi == inst.truth
    assert exact >= 18


def test_distinguishing_accuracy(tmp_path):
    n = 500
    members = _asymmetric_members(8, 12, 40, seed=8)
    path = tmp_path / "family.json"
    TestFamily.from_members(members, FamilySpec(v=8, kind="regular", d=3, target_size=40)).save(path)
    p = math.perm(n, 8) ** (-1 / 12)
    cfg = ExperimentConfig(
        kind="distinguish", n=n, p=p, gamma=1.0, trials=40, seed=75, family_file=str(path),
        threshold_policy="calibrated", calibration_trials=60,
        budgets=SearchBudget(nodes=2_000_000, max_occurrences=200_000, seconds=None),
    )
    rows, agg = BenchController.run_distinguish_experiment(cfg, workers=1)
    assert all(r.status == "ok" for r in rows)
    assert {r.structured for r in rows} == {True, False}
    assert agg.completed == 40
    assert agg.rate >= 0.75
    ci = binomtest(agg.successes, agg.completed).proportion_ci(confidence_level=0.95, method="exact")
    assert (agg.ci_low, agg.ci_high) == pytest.approx((ci.low, ci.high))
    assert agg.ci_low <= agg.rate <= agg.ci_high


def test_end_to_end_recovery_at_full_retention():
    n, p = 500, 0.045
    members = _asymmetric_members(8, 16, 40, seed=16)
    family = TestFamily.from_members(members, FamilySpec(v=8, kind="regular", d=4, target_size=40))
    budget = SearchBudget(nodes=5_000_000, max_occurrences=10_000, seconds=None)
    model = ModelParams(n=n, p=p, gamma=1.0)
    for t in range(10):
        seed = RngSeed(master=500 + t)
        inst = sample_structured(model, seed.child("instance"))
        params = RecoveryParams(
            family=family, match_threshold=1, seed=seed.child("recover"), budget=budget,
            delta=3, delta_prime=10, scan_order="max_count",
        )
        pi, report = recover(inst.g0, inst.g1, params, n, p, 1.0, truth=inst.truth)
        assert pi is not None, f"seed {t} matched no vertices"
        assert report.match.correct_fraction == 1.0
        assert report.metrics.exact, f"seed {t} recovered {report.metrics.fraction:.3f}"
