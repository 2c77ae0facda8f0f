import numpy as np
import pytest

from evolvesim.csq import (
    ConjDistPair,
    FourierSpectrum,
    build_pair,
    conj_fourier,
    conjunction_table,
    csq_oracle,
    distinguishing_audit,
    expand_to_full,
    fwht,
    greedy_disjoint_sets,
    heavy_coefficient_count,
    parity,
)
from evolvesim.exceptions import ConstructionError, InputDomainError

# frozen oracles for the k=6 construction
L1_PHI_K6 = 0.9794921875
ALPHA_SCALE_K6 = 1.0209371884346958
RATIO_MIN_K6 = 0.3509471585244267
RATIO_MAX_K6 = 1.308075772681954


class TestParity:
    def test_empty_set_is_one(self):
        assert parity([], [0, 1, 0]) == 1

    def test_single_coordinate(self):
        assert parity([1], [0]) == 1
        assert parity([1], [1]) == -1

    def test_product_structure(self):
        x = [1, 0, 1]
        assert parity([1, 3], x) == parity([1], x) * parity([3], x) == 1
        assert parity([1, 2], x) == -1

    def test_one_based_indexing_enforced(self):
        with pytest.raises(InputDomainError):
            parity([0], [0, 1])
        with pytest.raises(InputDomainError):
            parity([3], [0, 1])


class TestFwht:
    def test_involution_up_to_scale(self):
        rng = np.random.default_rng(0)
        for n in (1, 3, 6):
            t = rng.standard_normal(2**n)
            assert np.allclose(fwht(fwht(t)) / 2**n, t)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(InputDomainError):
            fwht(np.zeros(6))

    def test_parity_row(self):
        # transform of chi_{1}: a single spike at mask 1 of size 2^n
        n = 3
        table = np.array([parity([1], [(x >> i) & 1 for i in range(n)]) for x in range(8)])
        hat = fwht(table)
        assert hat[1] == 8 and np.count_nonzero(hat) == 1


class TestFourierSpectrum:
    def test_round_trip(self):
        rng = np.random.default_rng(3)
        for n in (2, 5, 8, 12):
            t = rng.choice([-1.0, 1.0], size=2**n)
            spec = FourierSpectrum.from_table(t, n)
            assert np.allclose(spec.to_table(), t)

    def test_parseval_enforced(self):
        spec = FourierSpectrum.from_table(np.ones(8), 3)
        assert spec[frozenset()] == 1.0

    def test_getitem_missing_is_zero(self):
        spec = FourierSpectrum.from_table(np.ones(4), 2)
        assert spec[[1, 2]] == 0.0


class TestConjFourier:
    def test_k1(self):
        spec = conj_fourier([1])
        assert spec[[]] == pytest.approx(0.0)
        assert spec[[1]] == pytest.approx(1.0)

    def test_k2_coefficients(self):
        spec = conj_fourier([1, 2])
        assert spec[[]] == pytest.approx(-0.5)
        for I in ([1], [2], [1, 2]):
            assert spec[I] == pytest.approx(0.5)

    @pytest.mark.parametrize("k", [1, 2, 4, 8])
    def test_reconstructs_table(self, k):
        spec = conj_fourier(range(1, k + 1))
        assert np.allclose(spec.to_table(), conjunction_table(k))

    def test_table_orientation(self):
        t = conjunction_table(3)
        assert t[0] == 1.0 and np.all(t[1:] == -1.0)


class TestBuildPair:
    @pytest.mark.parametrize("k", [6, 9])
    def test_valid_construction(self, k):
        pair = build_pair(range(1, k + 1))
        pair.validate()
        assert pair.k == k
        assert np.sum(pair.density) == pytest.approx(1.0)
        assert np.all(pair.ratio >= 1 / 3) and np.all(pair.ratio <= 3)
        assert 2 / 3 <= pair.alpha_scale <= 2

    def test_k6_frozen_oracle_values(self):
        pair = build_pair(range(1, 7))
        assert pair.l1_phi == pytest.approx(L1_PHI_K6, abs=1e-12)
        assert pair.alpha_scale == pytest.approx(ALPHA_SCALE_K6, abs=1e-12)
        assert pair.ratio.min() == pytest.approx(RATIO_MIN_K6, abs=1e-12)
        assert pair.ratio.max() == pytest.approx(RATIO_MAX_K6, abs=1e-12)

    def test_hidden_band_is_zero(self):
        pair = build_pair(range(1, 7))
        hat = fwht(pair.theta_table) / 2**6
        for m in range(1, 2**6):
            if 1 <= m.bit_count() <= 2:
                assert abs(hat[m]) < 1e-12

    def test_bridge_identity(self):
        pair = build_pair(range(1, 7))
        assert np.allclose(pair.density * pair.t_table, 2.0**-6 * pair.theta_table)

    def test_rejects_bad_sizes(self):
        with pytest.raises(InputDomainError):
            build_pair(range(1, 4))  # k=3 < 6
        with pytest.raises(InputDomainError):
            build_pair(range(1, 8))  # k=7 not divisible by 3

    def test_validate_catches_tampering(self):
        pair = build_pair(range(1, 7))
        bad = ConjDistPair(
            S=pair.S, k=pair.k, t_table=pair.t_table,
            theta_table=pair.theta_table, density=pair.density * 0.5,
            ratio=pair.ratio, alpha_scale=pair.alpha_scale, l1_phi=pair.l1_phi,
        )
        with pytest.raises(ConstructionError):
            bad.validate()


class TestExpandToFull:
    def test_lift_is_constant_off_s(self):
        local = np.arange(4, dtype=float)
        full = expand_to_full(local, frozenset({1, 3}), 3)
        # bit 1 (coordinate 2) must not matter
        for x in range(8):
            assert full[x] == full[x ^ 0b010]

    def test_lift_reads_correct_bits(self):
        local = np.array([0.0, 1.0])
        full = expand_to_full(local, frozenset({2}), 2)
        assert full.tolist() == [0.0, 0.0, 1.0, 1.0]


class TestGreedy:
    def test_n12_k6_family(self):
        fam = greedy_disjoint_sets(12, 6)
        assert fam == [
            frozenset({1, 2, 3, 4, 5, 6}),
            frozenset({1, 2, 7, 8, 9, 10}),
            frozenset({3, 4, 7, 8, 11, 12}),
            frozenset({5, 6, 9, 10, 11, 12}),
        ]

    def test_overlap_bound(self):
        fam = greedy_disjoint_sets(14, 6)
        for i, a in enumerate(fam):
            for b in fam[i + 1:]:
                assert len(a & b) <= 2

    def test_size_lower_bound(self):
        fam = greedy_disjoint_sets(16, 6)
        assert len(fam) >= (16 / 48) ** 2 + 1

    def test_rejects_bad_parameters(self):
        with pytest.raises(InputDomainError):
            greedy_disjoint_sets(12, 7)
        with pytest.raises(InputDomainError):
            greedy_disjoint_sets(10, 6)  # k > n/2


class TestOracle:
    def setup_method(self):
        self.pair = build_pair(range(1, 7))
        self.g = self.pair.t_table.copy()

    def test_exact_mode(self):
        v = csq_oracle(self.pair.t_table, self.pair.density, self.g, 0.1)
        assert v == pytest.approx(1.0)  # E_D[t * t] = 1

    def test_adversarial_shifts(self):
        exact = csq_oracle(self.pair.t_table, self.pair.density, self.g, 0.1)
        assert csq_oracle(self.pair.t_table, self.pair.density, self.g, 0.1,
                          "adversarial+") == pytest.approx(exact + 0.1)
        assert csq_oracle(self.pair.t_table, self.pair.density, self.g, 0.1,
                          "adversarial-") == pytest.approx(exact - 0.1)

    def test_toward_reference_clips(self):
        exact = 1.0
        near = csq_oracle(self.pair.t_table, self.pair.density, self.g, 0.1,
                          "toward-reference", reference=0.95)
        assert near == pytest.approx(0.95)
        far = csq_oracle(self.pair.t_table, self.pair.density, self.g, 0.1,
                         "toward-reference", reference=0.0)
        assert far == pytest.approx(exact - 0.1)

    def test_rejects_unbounded_query(self):
        with pytest.raises(InputDomainError):
            csq_oracle(self.pair.t_table, self.pair.density, 2.0 * self.g, 0.1)

    def test_rejects_bad_tau(self):
        with pytest.raises(InputDomainError):
            csq_oracle(self.pair.t_table, self.pair.density, self.g, 0.0)


class TestHeavyCoefficients:
    def test_single_parity_has_one_heavy(self):
        n = 6
        table = fwht(np.eye(1, 2**n, 5)[0])  # chi at mask 5, values +-1
        assert heavy_coefficient_count(table, 0.5) == 1

    def test_constant_zero_has_none(self):
        assert heavy_coefficient_count(np.zeros(16), 0.1) == 0

    def test_parseval_cap_random_queries(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            g = rng.uniform(-1, 1, 2**6)
            for tau in (0.05, 0.1, 0.3):
                assert heavy_coefficient_count(g, tau) <= 16 / tau**2

    def test_rejects_overlarge_norm(self):
        with pytest.raises(InputDomainError):
            heavy_coefficient_count(np.full(8, 2.0), 0.1)


class TestChangeOfMeasure:
    def test_uniform_error_at_most_three_times_d(self):
        rng = np.random.default_rng(21)
        for k in (6, 9):
            pair = build_pair(range(1, k + 1))
            for _ in range(100):
                h = rng.choice([-1.0, 1.0], size=2**k)
                disagree = pair.t_table != h
                err_u = float(np.mean(disagree))
                err_d = float(np.sum(pair.density[disagree]))
                assert err_u <= 3.0 * err_d + 1e-10
                assert err_d <= 3.0 * err_u + 1e-10


class TestDistinguishingAudit:
    def test_parity_query_distinguishes_exactly_one_pair(self, greedy_cache):
        n, k = 12, 6
        pairs = [build_pair(s) for s in greedy_cache(n, k)]
        # chi over a size-3 subset of pair 0 only
        mask_bits = [1, 2, 3]
        x = np.arange(2**n)
        signs = np.ones(2**n)
        for i in mask_bits:
            signs *= 1.0 - 2.0 * ((x >> (i - 1)) & 1)
        report = distinguishing_audit([*pairs], [signs], tau=0.02, epsilon=0.1, n=n)
        q = report["queries"][0]
        assert [d["pair"] for d in q["distinguished"]] == [0]
        assert q["distinguished"][0]["witness"] == [1, 2, 3]
        assert q["distinguished"][0]["coefficient"] == pytest.approx(1.0)
        assert q["heavy_count"] == 1

    def test_threshold_value(self):
        pair = build_pair(range(1, 7))
        # a single subset parity contributes alpha_scale * 2^{1-k} to the diff
        assert pair.alpha_scale * 2.0 ** (1 - 6) == pytest.approx(
            0.031904287138584245, abs=1e-15
        )

    def test_zero_query_distinguishes_nothing(self, greedy_cache):
        n, k = 12, 6
        pairs = [build_pair(s) for s in greedy_cache(n, k)]
        report = distinguishing_audit(pairs, [np.zeros(2**n)], tau=0.05,
                                      epsilon=0.1, n=n)
        assert report["queries"][0]["distinguished"] == []

    def test_hypothesis_close_to_at_most_one_pair(self, greedy_cache):
        n, k = 12, 6
        pairs = [build_pair(s) for s in greedy_cache(n, k)]
        # two conjunctions disagree on ~2 * 2^-k of the cube, so epsilon must
        # sit below that mass for closeness to single out the matching pair
        h = expand_to_full(pairs[0].t_table, pairs[0].S, n)
        report = distinguishing_audit(pairs, [], tau=0.05, epsilon=0.01, n=n,
                                      hypotheses=[h])
        rep = report["hypotheses"][0]
        assert rep["close_pairs"] == [0]
        assert rep["at_most_one"]

    def test_mixed_k_rejected(self):
        with pytest.raises(InputDomainError):
            distinguishing_audit(
                [build_pair(range(1, 7)), build_pair(range(1, 10))],
                [], tau=0.1, epsilon=0.1, n=9,
            )
