"""Tests for counting scores, ranking error, and the normal-limit
predictors, against hand oracles and exact enumeration."""

import itertools
import math

import numpy as np
import pytest

from ordrank.model import (
    CorruptDataError,
    OrdinalModel,
    PatternDistribution,
    StrengthLink,
)
from ordrank.ranking import (
    ComparisonDataset,
    PreferenceVector,
    asymptotic_tau,
    asymptotic_two_item,
    count_scores,
    dataset_from_csv,
    dataset_to_csv,
    expected_scores,
    kendall_tau,
    two_item_metrics,
)


def normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def enumerate_two_item(model: OrdinalModel, gamma: float, L: int):
    """Exact P(A > 0), P(B > 0) by enumerating all (2K)^L outcome
    sequences."""
    values, probs = model.pmf_table(gamma)
    p_raw = p_sign = 0.0
    for seq in itertools.product(range(values.size), repeat=L):
        prob = math.prod(probs[i] for i in seq)
        total = sum(int(values[i]) for i in seq)
        signs = sum(1 if values[i] > 0 else -1 for i in seq)
        if total > 0:
            p_raw += prob
        if signs > 0:
            p_sign += prob
    return p_raw, p_sign


class TestPreferenceVector:
    def test_centering_enforced(self):
        with pytest.raises(ValueError):
            PreferenceVector((0.5, 0.4), centered=True)
        PreferenceVector((0.5, -0.5), centered=True)

    def test_equally_spaced(self):
        theta = PreferenceVector.equally_spaced(10, 0.05)
        arr = np.asarray(theta.theta)
        assert abs(arr.sum()) < 1e-12
        np.testing.assert_allclose(np.diff(arr), -0.05, rtol=1e-12)


class TestTwoItemMetrics:
    def test_hand_values(self):
        a, b = two_item_metrics([2, -1, 3])
        assert a == pytest.approx(4 / 3)
        assert b == pytest.approx(1 / 3)

    def test_all_negative(self):
        assert two_item_metrics([-1, -1]) == (-1.0, -1.0)

    def test_antisymmetric_flip(self):
        rng = np.random.default_rng(2)
        seq = rng.choice([-3, -2, -1, 1, 2, 3], size=50)
        a, b = two_item_metrics(seq)
        na, nb = two_item_metrics(-seq)
        assert (na, nb) == (-a, -b)

    def test_empty_and_zero(self):
        with pytest.raises(ValueError):
            two_item_metrics([])
        with pytest.raises(CorruptDataError):
            two_item_metrics([1, 0])


class TestCountScores:
    def test_two_items_reduce_to_pair_metric(self):
        data = ComparisonDataset(2, 3, {(0, 1): np.array([2, -1, 3])})
        scores = count_scores(data)
        a, _ = two_item_metrics([2, -1, 3])
        assert scores.ordinal_scores[0] == pytest.approx(a)
        assert scores.ordinal_scores[1] == pytest.approx(-a)

    def test_three_item_hand_sum(self):
        # y01=2, y02=1, y12=-3 at L=1: raw sums (3, -5, 2)
        data = ComparisonDataset(3, 1, {
            (0, 1): np.array([2]), (0, 2): np.array([1]), (1, 2): np.array([-3]),
        })
        scores = count_scores(data)
        assert scores.ordinal_totals == (3, -5, 2)
        assert scores.binary_totals == (2, -2, 0)
        assert sum(scores.ordinal_totals) == 0
        assert sum(scores.binary_totals) == 0

    def test_maximal_binary_score(self):
        n, L = 5, 4
        data = ComparisonDataset(n, L, {
            (0, j): np.ones(L, dtype=int) for j in range(1, n)
        })
        scores = count_scores(data)
        assert scores.binary_scores[0] == n - 1

    def test_zero_sum_exact_fuzz(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(2, 8))
            L = int(rng.integers(1, 12))
            outcomes = {}
            for i in range(n):
                for j in range(i + 1, n):
                    if rng.random() < 0.8:  # incomplete graphs allowed
                        outcomes[(i, j)] = rng.choice(
                            [-4, -3, -2, -1, 1, 2, 3, 4], size=L)
            if not outcomes:
                continue
            scores = count_scores(ComparisonDataset(n, L, outcomes))
            assert sum(scores.ordinal_totals) == 0
            assert sum(scores.binary_totals) == 0
            assert np.all(np.abs(scores.binary_scores) <= n - 1)
            assert np.all(np.abs(scores.ordinal_scores) <= 4 * (n - 1))

    def test_relabeling_equivariance(self):
        rng = np.random.default_rng(4)
        n, L = 5, 6
        outcomes = {(i, j): rng.choice([-2, -1, 1, 2], size=L)
                    for i in range(n) for j in range(i + 1, n)}
        data = ComparisonDataset(n, L, outcomes)
        perm = rng.permutation(n)
        relabeled = {}
        for (i, j), ys in outcomes.items():
            a, b = int(perm[i]), int(perm[j])
            relabeled[(a, b) if a < b else (b, a)] = ys if a < b else -ys
        scores = count_scores(data)
        scores_p = count_scores(ComparisonDataset(n, L, relabeled))
        for i in range(n):
            assert scores.ordinal_totals[i] == scores_p.ordinal_totals[perm[i]]
        theta = PreferenceVector.equally_spaced(n, 0.1)
        theta_p = PreferenceVector(tuple(np.asarray(theta.theta)[np.argsort(perm)]))
        assert kendall_tau(scores.ordinal_scores, theta) == pytest.approx(
            kendall_tau(scores_p.ordinal_scores, theta_p))

    def test_zero_outcome_rejected(self):
        with pytest.raises(CorruptDataError):
            ComparisonDataset(2, 2, {(0, 1): np.array([1, 0])})


class TestKendallTau:
    THETA = PreferenceVector((0.3, 0.2, 0.1))

    def test_perfect(self):
        assert kendall_tau([3, 2, 1], self.THETA) == 0.0

    def test_reversed(self):
        assert kendall_tau([1, 2, 3], self.THETA) == 1.0

    def test_single_swap(self):
        assert kendall_tau([2, 3, 1], self.THETA) == pytest.approx(1 / 3)

    def test_score_ties_count_as_errors(self):
        assert kendall_tau([1, 1, 0], self.THETA) == pytest.approx(1 / 3)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            kendall_tau([1, 2], self.THETA)


class TestExpectedScores:
    def test_all_equal_theta(self):
        m = OrdinalModel(StrengthLink("identity"), PatternDistribution.uniform(3))
        s, st = expected_scores(m, PreferenceVector((0.2, 0.2, 0.2)))
        np.testing.assert_allclose(s, 0.0, atol=1e-15)
        np.testing.assert_allclose(st, 0.0, atol=1e-15)

    def test_two_item_closed_form(self):
        m = OrdinalModel(StrengthLink("identity"), PatternDistribution.uniform(2))
        s, st = expected_scores(m, PreferenceVector((0.5, -0.5)))
        np.testing.assert_allclose(st, [math.tanh(1.0), -math.tanh(1.0)],
                                   rtol=1e-14)
        np.testing.assert_allclose(s, 1.5 * st, rtol=1e-14)

    def test_order_consistency_fuzz(self):
        rng = np.random.default_rng(5)
        kinds = ["identity", "cubic", "tanh-sigmoid"]
        for _ in range(200):
            n = int(rng.integers(2, 9))
            theta = PreferenceVector(tuple(rng.normal(size=n)))
            link = StrengthLink(str(rng.choice(kinds)),
                                scale=float(rng.uniform(0.2, 2.0)))
            pattern = PatternDistribution.from_psi(
                rng.uniform(-2, 1, int(rng.integers(1, 7))))
            s, st = expected_scores(OrdinalModel(link, pattern), theta)
            order = np.argsort(np.asarray(theta.theta))
            assert np.all(np.diff(np.asarray(s)[order]) > 0)
            assert np.all(np.diff(np.asarray(st)[order]) > 0)


class TestAsymptoticTwoItem:
    def test_identity_small_gap(self):
        m = OrdinalModel(StrengthLink("identity"), PatternDistribution.uniform(2))
        p_sign, _ = asymptotic_two_item(m, 0.05, 100)
        assert p_sign == pytest.approx(normal_cdf(10 * math.sinh(0.05)),
                                       abs=1e-12)

    def test_degenerate_pattern_equalizes(self):
        m = OrdinalModel(StrengthLink("identity"),
                         PatternDistribution.from_weights([0, 1.0]))
        p_sign, p_raw = asymptotic_two_item(m, 3.0, 50)
        assert p_raw == pytest.approx(p_sign, abs=1e-12)

    def test_sign_never_worse_fuzz(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            K = int(rng.integers(2, 7))
            m = OrdinalModel(
                StrengthLink(str(rng.choice(["identity", "tanh-sigmoid", "cubic"]))),
                PatternDistribution.from_psi(rng.uniform(-2, 1, K)))
            p_sign, p_raw = asymptotic_two_item(
                m, float(rng.uniform(0.01, 1.5)), int(rng.integers(1, 400)))
            assert p_sign >= p_raw - 1e-14
            if not m.pattern.is_degenerate() and p_sign < 1.0:
                assert p_sign > p_raw

    def test_gap_matches_snr_identity(self):
        # The raw z-score equals the sign z-score shrunk by the SNR factor.
        m = OrdinalModel(StrengthLink("identity"),
                         PatternDistribution.from_family("abs", 0.1, 4))
        gamma, L = 0.05, 100
        phi = m.link(gamma)
        t = math.tanh(phi)
        snr = m.pattern.mean() ** 2 / m.pattern.variance()
        shrink = math.sqrt(1.0 + 1.0 / (snr * (1.0 - t * t)))
        p_sign, p_raw = asymptotic_two_item(m, gamma, L)
        assert p_raw == pytest.approx(
            normal_cdf(math.sqrt(L) * math.sinh(phi) / shrink), abs=1e-12)
        assert p_raw < p_sign

    def test_orientation_required(self):
        m = OrdinalModel(StrengthLink("identity"), PatternDistribution.uniform(2))
        with pytest.raises(ValueError):
            asymptotic_two_item(m, -0.1, 10)
        with pytest.raises(ValueError):
            asymptotic_two_item(m, 0.0, 10)


class TestAsymptoticTau:
    def test_degenerate_pattern_limits_coincide(self):
        m = OrdinalModel(StrengthLink("identity"),
                         PatternDistribution.from_weights([0, 0, 1.0]))
        theta = PreferenceVector.equally_spaced(6, 0.1)
        tau_ord, tau_bin = asymptotic_tau(m, theta, 200)
        assert tau_ord == pytest.approx(tau_bin, rel=1e-12)

    def test_two_item_reduction(self):
        m = OrdinalModel(StrengthLink("identity"),
                         PatternDistribution.from_family("abs", 0.5, 3))
        gamma, L = 0.3, 150
        theta = PreferenceVector((gamma / 2, -gamma / 2))
        tau_ord, tau_bin = asymptotic_tau(m, theta, L)
        p_sign, p_raw = asymptotic_two_item(m, gamma, L)
        assert tau_ord == pytest.approx(1.0 - p_raw, rel=1e-10)
        assert tau_bin == pytest.approx(1.0 - p_sign, rel=1e-10)

    def test_matches_literal_displays(self):
        """Row-sum shortcut agrees with the direct per-pair sums."""
        rng = np.random.default_rng(7)
        m = OrdinalModel(StrengthLink("tanh-sigmoid"),
                         PatternDistribution.from_family("abs", 0.7, 4))
        theta = np.sort(rng.normal(size=6))[::-1]
        n = theta.size
        t = np.tanh(m.link(theta[:, None] - theta[None, :]))
        np.fill_diagonal(t, 0.0)
        inv_snr = m.pattern.variance() / m.pattern.mean() ** 2
        L = 300
        total_ord = total_bin = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                others = [k for k in range(n) if k not in (i, j)]
                d_bar = (2 * t[i, j] + sum(t[i, k] - t[j, k] for k in others)) / (2 * n)
                v_bar = (4 * t[i, j] ** 2
                         + sum(t[i, k] ** 2 + t[j, k] ** 2 for k in others)) / (2 * n)
                arg = math.sqrt(2 * n * L) * d_bar
                total_ord += normal_cdf(-arg / math.sqrt(inv_snr + 1 - v_bar))
                total_bin += normal_cdf(-arg / math.sqrt(1 - v_bar))
        pairs = n * (n - 1) / 2
        tau_ord, tau_bin = asymptotic_tau(
            m, PreferenceVector(tuple(theta)), L)
        assert tau_ord == pytest.approx(total_ord / pairs, rel=1e-12)
        assert tau_bin == pytest.approx(total_bin / pairs, rel=1e-12)

    def test_large_l_vanishes(self):
        m = OrdinalModel(StrengthLink("identity"), PatternDistribution.uniform(3))
        theta = PreferenceVector.equally_spaced(5, 0.1)
        tau_ord, tau_bin = asymptotic_tau(m, theta, 10**6)
        assert tau_ord < 1e-6
        assert tau_bin < 1e-6

    def test_binary_below_ordinal(self):
        m = OrdinalModel(StrengthLink("identity"),
                         PatternDistribution.from_family("abs", 0.9, 4))
        theta = PreferenceVector.equally_spaced(10, 0.05)
        tau_ord, tau_bin = asymptotic_tau(m, theta, 500)
        assert tau_bin < tau_ord

    def test_tied_theta_rejected(self):
        m = OrdinalModel(StrengthLink("identity"), PatternDistribution.uniform(2))
        with pytest.raises(ValueError):
            asymptotic_tau(m, PreferenceVector((0.1, 0.1, 0.0)), 10)


class TestEnumerationAgreement:
    """Monte-Carlo metrics versus exact enumeration on tiny configurations."""

    @pytest.mark.parametrize("K,L,gamma", [(1, 4, 0.4), (2, 4, 0.25), (2, 6, 0.5)])
    def test_small_cases(self, K, L, gamma):
        m = OrdinalModel(StrengthLink("identity"),
                         PatternDistribution.from_family("abs", 0.3, K)
                         if K > 1 else PatternDistribution.uniform(1))
        exact_raw, exact_sign = enumerate_two_item(m, gamma, L)
        reps = 10**5
        rng = np.random.default_rng(9)
        draws = m.sample(gamma, rng, reps * L).reshape(reps, L)
        hit_raw = np.mean(draws.sum(axis=1) > 0)
        hit_sign = np.mean(np.sign(draws).sum(axis=1) > 0)
        for est, exact in ((hit_raw, exact_raw), (hit_sign, exact_sign)):
            band = 4.0 * math.sqrt(exact * (1 - exact) / reps)
            assert abs(est - exact) < band


class TestDatasetCsv:
    def test_round_trip(self):
        rng = np.random.default_rng(10)
        outcomes = {(i, j): rng.choice([-2, -1, 1, 2], size=3)
                    for i in range(4) for j in range(i + 1, 4)}
        data = ComparisonDataset(4, 3, outcomes)
        again = dataset_from_csv(dataset_to_csv(data))
        assert again.n == 4 and again.rounds == 3
        for pair, ys in outcomes.items():
            np.testing.assert_array_equal(again.outcomes[pair], ys)

    def test_reverse_orientation_rows(self):
        text = "i,j,l,y\n1,0,1,3\n0,1,2,-1\n"
        data = dataset_from_csv(text)
        np.testing.assert_array_equal(data.outcomes[(0, 1)], [-3, -1])

    def test_missing_pairs_accepted(self):
        text = "i,j,l,y\n0,1,1,2\n0,1,2,1\n"
        data = dataset_from_csv(text, n=3)
        assert not data.is_complete()

    def test_malformed_row_reports_line(self):
        with pytest.raises(ValueError, match="line 3"):
            dataset_from_csv("i,j,l,y\n0,1,1,2\n0,1,x,1\n")

    def test_bad_header(self):
        with pytest.raises(ValueError):
            dataset_from_csv("a,b,c,d\n0,1,1,2\n")
