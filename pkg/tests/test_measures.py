import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.distance import jensenshannon as scipy_jsd

from lscdeval.errors import DegenerateInputError
from lscdeval.measures import (
    SenseDistribution,
    apd,
    apd_thresholded,
    binary_change,
    compare_from_clusters,
    cos_prototype,
    diasense,
    jsd_distance,
    sense_distribution,
)
from lscdeval.wic import PairScore, ThresholdSpec
from lscdeval.wug import SenseClustering, UsagePair

# verified against an exact-arithmetic entropy computation before the build
JSD_HALF_VS_POINT = 0.5579230452841439


def dist(probs):
    return SenseDistribution(probs=probs, support=max(1, len(probs)))


def scores(*values):
    return [
        PairScore(pair=UsagePair(f"o{i}", f"n{i}", "COMPARE"), score=v, source="external")
        for i, v in enumerate(values)
    ]


class TestSenseDistribution:
    def test_proportions(self):
        c = SenseClustering({"u1": 0, "u2": 0, "u3": 0, "u4": 0, "u5": 1})
        d = sense_distribution(c, ["u1", "u2", "u3", "u4", "u5"])
        assert d.probs == {0: 0.8, 1: 0.2}

    def test_single_cluster(self):
        c = SenseClustering({"u1": 3, "u2": 3})
        d = sense_distribution(c, ["u1", "u2"])
        assert d.probs == {3: 1.0}

    def test_counts_3_1(self):
        c = SenseClustering({"a": 0, "b": 0, "c": 0, "d": 1})
        d = sense_distribution(c, ["a", "b", "c", "d"])
        assert d.probs == {0: 0.75, 1: 0.25}

    def test_noise_excluded_by_default(self):
        c = SenseClustering({"a": 0, "b": -1})
        d = sense_distribution(c, ["a", "b"])
        assert d.probs == {0: 1.0} and d.support == 1

    def test_noise_only_degenerate(self):
        c = SenseClustering({"a": -1})
        with pytest.raises(DegenerateInputError):
            sense_distribution(c, ["a"])

    def test_noise_included_on_request(self):
        c = SenseClustering({"a": 0, "b": -1})
        d = sense_distribution(c, ["a", "b"], include_noise=True)
        assert d.probs == {0: 0.5, -1: 0.5}

    def test_validation(self):
        with pytest.raises(ValueError):
            SenseDistribution(probs={0: 0.7, 1: 0.7}, support=2)


class TestJsdDistance:
    def test_identity_zero(self):
        d = dist({0: 0.5, 1: 0.5})
        assert jsd_distance(d, d) == 0.0

    def test_disjoint_supports_one(self):
        assert jsd_distance(dist({0: 1.0}), dist({1: 1.0})) == pytest.approx(1.0, abs=1e-12)

    def test_half_vs_point_mass(self):
        value = jsd_distance(dist({0: 0.5, 1: 0.5}), dist({0: 1.0}))
        assert value == pytest.approx(JSD_HALF_VS_POINT, abs=1e-12)

    def test_symmetric(self):
        p, q = dist({0: 0.3, 1: 0.7}), dist({0: 0.9, 2: 0.1})
        assert jsd_distance(p, q) == pytest.approx(jsd_distance(q, p), abs=1e-15)

    @given(
        st.lists(st.floats(0.01, 1), min_size=2, max_size=5),
        st.lists(st.floats(0.01, 1), min_size=2, max_size=5),
    )
    def test_matches_scipy_and_bounded(self, raw_p, raw_q):
        k = max(len(raw_p), len(raw_q))
        pv = np.zeros(k)
        qv = np.zeros(k)
        pv[: len(raw_p)] = raw_p
        qv[: len(raw_q)] = raw_q
        pv /= pv.sum()
        qv /= qv.sum()
        p = dist({i: float(v) for i, v in enumerate(pv) if v})
        q = dist({i: float(v) for i, v in enumerate(qv) if v})
        mine = jsd_distance(p, q)
        reference = float(scipy_jsd(pv, qv, base=2))
        assert mine == pytest.approx(reference, abs=1e-9)
        assert 0.0 <= mine <= 1.0

    def test_identity_of_indiscernibles(self):
        p, q = dist({0: 0.4, 1: 0.6}), dist({0: 0.4000001, 1: 0.5999999})
        assert jsd_distance(p, q) > 0.0


class TestBinaryChange:
    def _clustering(self, counts):
        # counts: {label: (n_old, n_new)}
        assignment = {}
        groupings = {}
        for label, (n_old, n_new) in counts.items():
            for i in range(n_old):
                uid = f"c{label}o{i}"
                assignment[uid] = label
                groupings[uid] = 1
            for i in range(n_new):
                uid = f"c{label}n{i}"
                assignment[uid] = label
                groupings[uid] = 2
        return SenseClustering(assignment), groupings

    def test_gain_rule(self):
        c, g = self._clustering({0: (10, 5), 1: (0, 3)})
        assert binary_change(c, g, 2, 0) == (1, 1, 0)

    def test_single_mixed_cluster_no_change(self):
        c, g = self._clustering({0: (4, 4)})
        assert binary_change(c, g, 1, 0) == (0, 0, 0)

    def test_strictest_default(self):
        c, g = self._clustering({0: (3, 3), 1: (0, 1)})
        assert binary_change(c, g).gain == 1

    def test_loss_symmetric(self):
        c, g = self._clustering({0: (3, 3), 1: (2, 0)})
        assert binary_change(c, g) == (1, 0, 1)

    def test_monotone_in_m_and_k(self):
        c, g = self._clustering({0: (6, 6), 1: (1, 4)})
        results = {}
        for m in (1, 2, 3, 4, 5):
            for k in (0, 1, 2):
                results[(m, k)] = binary_change(c, g, m, k).binary
        for m in (1, 2, 3, 4):
            for k in (0, 1, 2):
                assert results[(m + 1, k)] <= results[(m, k)]
        for m in (1, 2, 3, 4, 5):
            for k in (0, 1):
                assert results[(m, k)] <= results[(m, k + 1)]

    def test_noise_ignored_by_default(self):
        c = SenseClustering({"a": 0, "b": 0, "n": -1})
        groupings = {"a": 1, "b": 2, "n": 2}
        assert binary_change(c, groupings).binary == 0


class TestCompareFromClusters:
    def test_all_same(self):
        c = SenseClustering({"o1": 0, "n1": 0, "n2": 0})
        pairs = [UsagePair("o1", "n1", "COMPARE"), UsagePair("o1", "n2", "COMPARE")]
        assert compare_from_clusters(c, pairs) == 1.0

    def test_none_same(self):
        c = SenseClustering({"o1": 0, "n1": 1, "n2": 2})
        pairs = [UsagePair("o1", "n1", "COMPARE"), UsagePair("o1", "n2", "COMPARE")]
        assert compare_from_clusters(c, pairs) == 0.0

    def test_fraction(self):
        c = SenseClustering({"a": 0, "b": 0, "c": 0, "d": 1, "e": 0})
        pairs = [
            UsagePair("a", "b", "COMPARE"),
            UsagePair("a", "c", "COMPARE"),
            UsagePair("a", "e", "COMPARE"),
            UsagePair("a", "d", "COMPARE"),
        ]
        assert compare_from_clusters(c, pairs) == 0.75

    def test_relabeling_invariant(self):
        pairs = [UsagePair("a", "b", "COMPARE"), UsagePair("a", "c", "COMPARE")]
        c1 = SenseClustering({"a": 0, "b": 0, "c": 1})
        c2 = SenseClustering({"a": 5, "b": 5, "c": 9})
        assert compare_from_clusters(c1, pairs) == compare_from_clusters(c2, pairs)

    def test_empty_degenerate(self):
        with pytest.raises(DegenerateInputError):
            compare_from_clusters(SenseClustering({"a": 0}), [])

    def test_noise_pairs_dropped(self):
        c = SenseClustering({"a": 0, "b": -1, "c": 0})
        pairs = [UsagePair("a", "b", "COMPARE"), UsagePair("a", "c", "COMPARE")]
        assert compare_from_clusters(c, pairs) == 1.0


class TestApd:
    def test_zeros(self):
        assert apd(scores(0.0, 0.0, 0.0)) == 0.0

    def test_half(self):
        assert apd(scores(1.0, 0.0)) == 0.5

    def test_constant(self):
        assert apd(scores(2.5, 2.5, 2.5)) == 2.5

    def test_reorder_invariant(self):
        values = [0.1, 0.9, 0.4, 0.7]
        assert apd(scores(*values)) == pytest.approx(apd(scores(*reversed(values))))

    def test_empty_degenerate(self):
        with pytest.raises(DegenerateInputError):
            apd([])


class TestApdThresholded:
    th = ThresholdSpec(0.2, 0.4, 0.6)

    def test_all_above_top(self):
        assert apd_thresholded(scores(0.9, 0.7, 0.61), self.th) == 4.0

    def test_half_extremes(self):
        assert apd_thresholded(scores(0.0, 0.1, 0.9, 0.8), self.th) == 2.5

    def test_boundary_single_pair(self):
        assert apd_thresholded(scores(0.4), self.th) == 3.0


class TestCosPrototype:
    def test_identical_means_zero(self):
        vecs = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        assert cos_prototype(vecs, list(vecs), "euclidean") == pytest.approx(0.0)

    def test_orthogonal_means(self):
        assert cos_prototype([np.array([1.0, 0.0])], [np.array([0.0, 1.0])], "cosine") == pytest.approx(1.0)

    def test_single_usage_equals_vector_distance(self):
        from lscdeval.wic import vector_distance

        a, b = np.array([0.5, 2.0]), np.array([1.5, -1.0])
        assert cos_prototype([a], [b], "manhattan") == pytest.approx(
            vector_distance(a, b, "manhattan")
        )

    def test_empty_period_degenerate(self):
        with pytest.raises(DegenerateInputError):
            cos_prototype([], [np.array([1.0])], "cosine")


class TestDiasense:
    def test_no_change_signal_ratio_one(self):
        assert diasense([0.4, 0.4], [0.4], [0.4], "ratio") == pytest.approx(1.0)

    def test_no_change_signal_difference_zero(self):
        assert diasense([0.4, 0.4], [0.4], [0.4], "difference") == pytest.approx(0.0)

    def test_ratio_example(self):
        assert diasense([0.8], [0.2], [0.4], "ratio") == pytest.approx(0.8 / 0.3)

    def test_ratio_scale_invariant(self):
        base = diasense([0.8, 0.6], [0.2], [0.4], "ratio")
        scaled = diasense([8.0, 6.0], [2.0], [4.0], "ratio")
        assert base == pytest.approx(scaled)

    def test_difference_scales_linearly(self):
        base = diasense([0.8], [0.2], [0.4], "difference")
        assert diasense([8.0], [2.0], [4.0], "difference") == pytest.approx(10 * base)

    def test_zero_denominator(self):
        with pytest.raises(DegenerateInputError, match="zero"):
            diasense([0.5], [0.0], [0.0], "ratio")

    def test_ratio_needs_within_populations(self):
        with pytest.raises(DegenerateInputError):
            diasense([0.5], [], [0.1], "ratio")

    def test_difference_tolerates_one_missing_population(self):
        assert diasense([0.5], [], [0.1], "difference") == pytest.approx(0.4)
