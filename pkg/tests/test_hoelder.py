import math

import numpy as np
import pytest

from senselect.core import (BudgetExceededError, Dataset, LossOracle,
                            LossTable, RngStream)
from senselect.clustering import CenterList, assign
from senselect.hoelder import (default_sample_count, estimate_lambda,
                               holder_percentiles, holder_ratios)


def row_clustering(data, center_rows, z):
    """Clustering whose centers are the given dataset rows."""
    centers = CenterList(data.rows[center_rows],
                         np.asarray(center_rows, dtype=np.intp))
    return assign(data, centers, z)


class TestHolderRatios:
    def test_linear_losses_give_constant_ratio(self):
        data = Dataset([[0.0], [1.0], [3.0]])
        clustering = row_clustering(data, [0], 1)
        ratios = holder_ratios(data, clustering, LossTable([1, 2, 4]), 1)
        np.testing.assert_allclose(ratios, [1.0, 1.0])

    def test_power_in_denominator(self):
        data = Dataset([[0.0], [1.0], [3.0]])
        clustering = row_clustering(data, [0], 2)
        ratios = holder_ratios(data, clustering, LossTable([1, 2, 4]), 2)
        np.testing.assert_allclose(ratios, [1.0, 1.0 / 3.0])

    def test_centers_excluded(self):
        data = Dataset([[0.0], [5.0], [10.0]])
        clustering = row_clustering(data, [0, 2], 2)
        ratios = holder_ratios(data, clustering, LossTable([9, 1, 9]), 2)
        assert ratios.shape == (1,)

    def test_requires_row_centers(self):
        data = Dataset([[0.0], [1.0]])
        clustering = assign(data, CenterList([[0.5]]), 2)
        with pytest.raises(ValueError):
            holder_ratios(data, clustering, LossTable([0, 1]), 2)

    def test_matches_naive_loop(self):
        rng = np.random.default_rng(5)
        data = Dataset(rng.normal(size=(40, 3)))
        losses = rng.random(40)
        clustering = row_clustering(data, [0, 17, 33], 2)
        ratios = holder_ratios(data, clustering, LossTable(losses), 2)
        naive = []
        for e in range(40):
            c = clustering.centers.indices[clustering.assignment[e]]
            dist = np.linalg.norm(data.rows[e] - data.rows[c])
            if dist > 0:
                naive.append(abs(losses[e] - losses[c]) / dist ** 2)
        np.testing.assert_allclose(ratios, naive, rtol=1e-12)


class TestHolderPercentiles:
    def test_nearest_rank_on_one_to_ten(self):
        ratios = np.arange(1.0, 11.0)
        out = holder_percentiles(ratios, (20, 40, 60, 80, 99))
        assert out == {20.0: 2.0, 40.0: 4.0, 60.0: 6.0, 80.0: 8.0, 99.0: 10.0}

    def test_single_entry(self):
        assert holder_percentiles([7.0], (20, 99)) == {20.0: 7.0, 99.0: 7.0}

    def test_empty_table(self):
        with pytest.raises(ValueError):
            holder_percentiles([])

    def test_monotone_in_percentile(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            ratios = rng.random(rng.integers(1, 30))
            out = holder_percentiles(ratios, (10, 30, 50, 70, 90))
            vals = [out[p] for p in (10.0, 30.0, 50.0, 70.0, 90.0)]
            assert vals == sorted(vals)


class TestDefaultSampleCount:
    def test_known_values(self):
        # ceil(ln(100k)/-ln(0.8)): ln(100)=4.60517, -ln(0.8)=0.223144
        assert default_sample_count(1) == 21
        assert default_sample_count(10) == 31

    def test_grows_with_k_shrinks_with_p(self):
        assert default_sample_count(100) > default_sample_count(2)
        assert default_sample_count(5, p=0.5) < default_sample_count(5, p=0.1)

    def test_rejects_bad_p(self):
        with pytest.raises(ValueError):
            default_sample_count(5, p=0.0)
        with pytest.raises(ValueError):
            default_sample_count(5, p=1.0)


class TestEstimateLambda:
    def test_exact_when_sample_covers_cluster(self):
        # losses exactly linear in the center distance, t >= cluster size:
        # every draw sees the same ratio 1, so the estimate is ln(n) exactly
        data = Dataset([[0.0], [1.0], [2.0]])
        clustering = row_clustering(data, [0], 1)
        oracle = LossOracle.from_table([0.0, 1.0, 2.0])
        lam = estimate_lambda(data, clustering, oracle, 3, RngStream(0, "l"))
        np.testing.assert_allclose(lam, [math.log(3)])

    def test_never_exceeds_true_max_ratio(self):
        rng = np.random.default_rng(7)
        data = Dataset(rng.normal(size=(30, 2)))
        losses = rng.random(30)
        clustering = row_clustering(data, [3, 20], 2)
        true_ratios = holder_ratios(data, clustering, LossTable(losses), 2)
        cap = np.max(true_ratios) * math.log(30)
        for seed in range(30):
            oracle = LossOracle.from_table(losses)
            lam = estimate_lambda(data, clustering, oracle, 5,
                                  RngStream(seed, "cap"))
            assert np.all(lam <= cap + 1e-12)

    def test_query_accounting(self):
        rng = np.random.default_rng(8)
        data = Dataset(rng.normal(size=(50, 2)))
        clustering = row_clustering(data, [0, 25], 2)
        oracle = LossOracle.from_table(rng.random(50))
        estimate_lambda(data, clustering, oracle, 4, RngStream(1, "q"))
        # at most t member queries plus one center query per cluster
        assert oracle.queries_used <= 2 * (4 + 1)

    def test_budget_enforced(self):
        rng = np.random.default_rng(8)
        data = Dataset(rng.normal(size=(50, 2)))
        clustering = row_clustering(data, [0, 25], 2)
        oracle = LossOracle.from_table(rng.random(50), budget=3)
        with pytest.raises(BudgetExceededError):
            estimate_lambda(data, clustering, oracle, 4, RngStream(1, "q"))

    def test_robust_discards_outlier(self):
        # two clusters of six 1-D points; one member's loss is wildly off the
        # otherwise-linear pattern.  Sampling every member (t = cluster size)
        # makes both modes deterministic: robust drops the ceil(5/2) = 3
        # largest of the 5 ratios, leaving ratio 1.
        rows = [[float(v)] for v in (0, 1, 2, 3, 4, 5, 20, 21, 22, 23, 24, 25)]
        data = Dataset(rows)
        losses = [float(v) for v in (0, 1, 2, 3, 4, 500, 0, 1, 2, 3, 4, 5)]
        clustering = row_clustering(data, [0, 6], 1)
        plain = estimate_lambda(data, clustering, LossOracle.from_table(losses),
                                6, RngStream(2, "r"))
        robust = estimate_lambda(data, clustering,
                                 LossOracle.from_table(losses), 6,
                                 RngStream(2, "r"), robust=True)
        assert plain[0] == pytest.approx(100 * math.log(12))
        assert robust[0] == pytest.approx(math.log(12))
        assert robust[1] == pytest.approx(math.log(12))
        assert np.all(robust <= plain + 1e-12)

    def test_rejects_bad_t(self):
        data = Dataset([[0.0], [1.0]])
        clustering = row_clustering(data, [0], 2)
        with pytest.raises(ValueError):
            estimate_lambda(data, clustering, LossOracle.from_table([0, 1]),
                            0, RngStream(0, "t"))
