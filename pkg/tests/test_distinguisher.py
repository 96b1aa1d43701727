import math

import pytest

from app.models.family.FamilyModel import FamilySpec
from app.models.instance.InstanceModel import ModelParams, RngSeed
from app.models.subiso.SubIsoModel import SearchBudget
from app.services.distinguisher import (
    DistinguishParams,
    P_statistic,
    calibrate_threshold,
    decide,
    exact_expected_pH_struct,
    expected_P_struct_exact,
    expected_P_struct_lower,
    p_H,
    rho_diagnostic,
    rho_flagged,
)
from app.services.gen_model import sample_structured
from app.services.graph_core import Permutation, apply_permutation, empty_graph, make_graph
from app.services.sub_iso import expected_occ, occ
from app.services.test_family import TestFamily
from oracles import within_standard_errors

EDGE = make_graph(2, [(0, 1)])
# no non-trivial automorphisms: the degree classes pin every vertex
ASYMMETRIC6 = make_graph(6, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 5), (2, 5)])


@pytest.fixture
def frucht_family(frucht) -> TestFamily:
    return TestFamily.from_members([frucht], FamilySpec(v=12, kind="regular", d=3, target_size=1))


class TestExpectations:
    def test_single_edge(self):
        n, p, gamma = 30, 0.3, 0.8
        assert exact_expected_pH_struct(EDGE, n, p, gamma) == pytest.approx(math.comb(n, 2) * gamma ** 2 * p * (1 - p))

    def test_triangle_at_full_retention_is_the_count_variance(self, triangle):
        n, p = 9, 0.35
        variance = math.comb(n, 3) * (p ** 3 - p ** 6) + math.perm(n, 4) / 2 * (p ** 5 - p ** 6)
        assert exact_expected_pH_struct(triangle, n, p, 1.0) == pytest.approx(variance)

    def test_retention_scales_the_expectation(self, triangle):
        full = exact_expected_pH_struct(triangle, 9, 0.35, 1.0)
        assert exact_expected_pH_struct(triangle, 9, 0.35, 0.5) == pytest.approx(full * 0.5 ** 6)

    def test_exact_dominates_the_lower_bound(self):
        n, p, gamma = 15, 0.4, 0.9
        lower = expected_P_struct_lower(n, p, gamma, 6, 6)
        assert lower == pytest.approx(math.perm(15, 6) * gamma ** 12 * (p ** 6 - p ** 12))
        assert exact_expected_pH_struct(ASYMMETRIC6, n, p, gamma) >= lower

    def test_degenerate_inputs(self, frucht, frucht_family):
        assert exact_expected_pH_struct(EDGE, 10, 0.0, 1.0) == 0.0
        assert expected_P_struct_lower(3, 0.5, 1.0, 6, 6) == 0.0
        with pytest.raises(ValueError):
            exact_expected_pH_struct(frucht, 20, 0.5, 1.0)
        with pytest.raises(ValueError):
            expected_P_struct_exact(frucht_family, 20, 0.5, 1.0)

    def test_single_edge_monte_carlo(self, seed):
        n, p, gamma, trials = 30, 0.3, 0.8, 600
        params = ModelParams(n=n, p=p, gamma=gamma)
        mu = expected_occ(n, p * gamma, EDGE)
        values = []
        for t in range(trials):
            inst = sample_structured(params, seed.child(f"mc-{t}"))
            values.append(p_H(inst.g0, inst.g1, EDGE, mu, SearchBudget.unlimited()))
        assert within_standard_errors(values, exact_expected_pH_struct(EDGE, n, p, gamma))


class TestStatistic:
    def test_p_h_is_a_product_of_centered_counts(self, triangle):
        g0 = make_graph(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)])
        g1 = make_graph(5, [(0, 1), (1, 2), (0, 2)])
        assert p_H(g0, g1, triangle, 0.5) == pytest.approx((2 - 0.5) * (1 - 0.5))

    def test_identical_member_copies(self, frucht, frucht_family):
        relabeled = apply_permutation(frucht, Permutation([(i + 5) % 12 for i in range(12)]))
        params = DistinguishParams(family=frucht_family, n=12, p=0.5, gamma=1.0)
        stat = P_statistic(frucht, relabeled, params)
        mu = expected_occ(12, 0.5, frucht, 1)
        assert stat.mu == pytest.approx(mu)
        assert stat.occ_g0 == [1] and stat.occ_g1 == [1]
        assert stat.P == pytest.approx((1 - mu) ** 2)
        assert not stat.partial

    def test_decisions(self, frucht, frucht_family):
        params = DistinguishParams(family=frucht_family, n=12, p=0.3, gamma=1.0)
        threshold = expected_P_struct_lower(12, 0.3, 1.0, 12, 18) / 3
        structured = decide(frucht, frucht, params)
        assert structured.threshold == pytest.approx(threshold)
        assert structured.decision == "structured"
        assert decide(frucht, empty_graph(12), params).decision == "null"

    def test_fixed_threshold(self, frucht, frucht_family):
        params = DistinguishParams(family=frucht_family, n=12, p=0.5, gamma=1.0, fixed_threshold=1e12)
        stat = decide(frucht, frucht, params)
        assert stat.threshold == 1e12
        assert stat.decision == "null"

    def test_budget_exhaustion_marks_partial(self, frucht, frucht_family):
        params = DistinguishParams(
            family=frucht_family, n=12, p=0.5, gamma=1.0, budget=SearchBudget(nodes=1, max_occurrences=1, seconds=None)
        )
        stat = decide(frucht, frucht, params)
        assert stat.partial
        assert stat.per_member == [None]
        assert stat.P is None
        assert stat.decision == "null"

    def test_empty_family_is_rejected(self):
        spec = FamilySpec(v=12, kind="regular", d=3, target_size=1)
        with pytest.raises(ValueError):
            DistinguishParams(family=TestFamily(spec=spec), n=12, p=0.5, gamma=1.0)

    def test_calibration_is_seeded(self, frucht_family):
        def threshold(master: int) -> float:
            params = DistinguishParams(
                family=frucht_family, n=14, p=0.3, gamma=1.0, threshold_policy="calibrated",
                calibration_trials=6, calibration_k=2.0, calibration_seed=RngSeed(master=master),
            )
            return params.threshold()

        assert threshold(5) == threshold(5)
        assert math.isfinite(threshold(5))

    def test_calibration_needs_two_samples(self, frucht_family):
        params = DistinguishParams(family=frucht_family, n=14, p=0.3, gamma=1.0, calibration_trials=1)
        with pytest.raises(ValueError):
            calibrate_threshold(params, RngSeed(master=1))


class TestRho:
    def test_rho_reduces_to_v_squared(self):
        n = 1000
        rho = rho_diagnostic(n, n ** -0.5, 1.0, 4, 0.5)
        assert rho == pytest.approx(16.0)
        assert rho_flagged(rho)
        assert not rho_flagged(rho_diagnostic(n, n ** -0.5, 1.0, 3, 0.5))

    def test_delta_must_be_inside_unit_interval(self):
        with pytest.raises(ValueError):
            rho_diagnostic(1000, 0.1, 1.0, 4, 1.0)
