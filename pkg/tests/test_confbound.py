import math

import numpy as np
import pytest

from matchband.confbound import (
    A_ABOVE_B,
    B_ABOVE_A,
    UNDECIDED,
    BetaPolicy,
    EliminationTracker,
    InvalidPolicyError,
    TrackerBank,
    ingest,
    level_threshold,
    separated,
)


class TestLevelThreshold:
    def test_hand_evaluated_values(self):
        pol = BetaPolicy.horizon(1e6)
        assert level_threshold(0, pol) == 56
        assert level_threshold(2, pol) == 885

    def test_log_e_is_one(self):
        assert level_threshold(1, BetaPolicy.horizon(math.e)) == 16

    def test_saturates(self):
        pol = BetaPolicy.horizon(1e6)
        assert level_threshold(40, pol) <= 2**62

    def test_invalid_policy(self):
        with pytest.raises(InvalidPolicyError):
            BetaPolicy.horizon(0.5)

    def test_thresholds_increasing(self):
        for pol in (
            BetaPolicy.horizon(100.0),
            BetaPolicy.pair_explore(8, 8, 100.0),
            BetaPolicy.mono_explore(8, 100.0),
            BetaPolicy.matching_id(8, 0.1),
        ):
            ks = pol.thresholds(20)
            assert np.all(np.diff(ks) > 0)

    def test_beta_clamped_and_nondecreasing(self):
        pol = BetaPolicy.matching_id(4, 0.5)
        assert pol.beta(0) >= math.e
        betas = [pol.beta(l) for l in range(8)]
        assert all(b2 >= b1 for b1, b2 in zip(betas, betas[1:]))


class TestIngest:
    def test_sentinel_before_first_refresh(self):
        tr = EliminationTracker()
        assert tr.lower == -math.inf and tr.upper == math.inf
        ingest(tr, [0.5], BetaPolicy.horizon(1e6))  # k_0 = 56 not reached
        assert tr.lower == -math.inf and tr.upper == math.inf

    def test_zero_samples_at_k0(self):
        pol = BetaPolicy.horizon(math.e)  # k_0 = 4
        tr = EliminationTracker()
        refreshed = ingest(tr, [0.0, 0.0, 0.0, 0.0], pol)
        assert refreshed and tr.level == 0
        assert tr.lower == pytest.approx(-0.5) and tr.upper == pytest.approx(0.5)

    def test_refresh_only_semantics(self):
        pol = BetaPolicy.horizon(1e4)
        tr = EliminationTracker()
        ingest(tr, [1.0] * level_threshold(0, pol), pol)
        lo, hi = tr.lower, tr.upper
        ingest(tr, [0.0], pol)  # between thresholds: bounds unchanged
        assert tr.lower == lo and tr.upper == hi and not tr.fresh

    def test_multi_level_advance(self):
        pol = BetaPolicy.horizon(1e4)
        tr = EliminationTracker()
        ingest(tr, [0.5] * level_threshold(2, pol), pol)
        assert tr.level == 2

    def test_coverage_small_montecarlo(self):
        # refresh coverage at least 1 - 2/beta_l^2 (module-scale check)
        pol = BetaPolicy.horizon(math.exp(4.0))
        gen = np.random.Generator(np.random.PCG64(123))
        failures = np.zeros(3)
        n = 200
        for _ in range(n):
            tr = EliminationTracker()
            for l in range(3):
                need = level_threshold(l, pol) - tr.count
                ingest(tr, (gen.random(need) < 0.5).astype(float), pol)
                if not (tr.lower <= 0.5 <= tr.upper):
                    failures[l] += 1
        for l in range(3):
            assert failures[l] / n <= 2.0 / pol.beta(l) ** 2 + 3 * math.sqrt(0.25 / n)


class TestSeparated:
    def _tracker(self, lo, hi):
        tr = EliminationTracker(count=1, sum=0.0, level=0, lower=lo, upper=hi)
        return tr

    def test_disjoint(self):
        a = self._tracker(0.6, 0.8)
        b = self._tracker(0.1, 0.3)
        assert separated(a, b) == A_ABOVE_B
        assert separated(b, a) == B_ABOVE_A

    def test_identical_undecided(self):
        a = self._tracker(0.4, 0.6)
        assert separated(a, a) == UNDECIDED

    def test_noiseless_separation_at_predicted_count(self):
        # means 0.9 vs 0.7, horizon policy h = 1e4: the first refresh whose
        # half-width r_l satisfies 2 r_l < 0.2 is the one at k_l with l = 3.
        pol = BetaPolicy.horizon(1e4)
        predicted = None
        for l in range(10):
            r = math.sqrt(pol.log_beta(l) / level_threshold(l, pol))
            if 2 * r < 0.2:
                predicted = level_threshold(l, pol)
                break
        assert predicted == math.ceil(256 * math.log(1e4))
        a, b = EliminationTracker(), EliminationTracker()
        count = 0
        decided_at = None
        while count < predicted + 10:
            ingest(a, [0.9], pol)
            ingest(b, [0.7], pol)
            count += 1
            if separated(a, b) != UNDECIDED:
                decided_at = count
                break
        assert decided_at == predicted
        assert separated(a, b) == A_ABOVE_B

    def test_zero_noise_never_wrong(self):
        pol = BetaPolicy.horizon(100.0)
        for mu_a, mu_b in [(0.8, 0.2), (0.55, 0.5), (0.3, 0.7)]:
            gap = abs(mu_a - mu_b)
            budget = None
            for l in range(20):
                if 2 * math.sqrt(pol.log_beta(l) / level_threshold(l, pol)) < gap:
                    budget = level_threshold(l, pol)
                    break
            a, b = EliminationTracker(), EliminationTracker()
            for _ in range(budget):
                ingest(a, [mu_a], pol)
                ingest(b, [mu_b], pol)
                verdict = separated(a, b)
                if verdict != UNDECIDED:
                    assert verdict == (A_ABOVE_B if mu_a > mu_b else B_ABOVE_A)
            assert separated(a, b) != UNDECIDED


class TestWidthHalving:
    def test_ratio_near_half(self):
        pol = BetaPolicy.horizon(1e8)
        for l in range(6):
            w0 = 2 * math.sqrt(pol.log_beta(l) / level_threshold(l, pol))
            w1 = 2 * math.sqrt(pol.log_beta(l + 1) / level_threshold(l + 1, pol))
            assert 0.49 <= w1 / w0 <= 0.51


class TestTrackerBank:
    def test_matches_scalar_tracker(self):
        pol = BetaPolicy.horizon(1e4)
        bank = TrackerBank(3, pol)
        scalars = [EliminationTracker() for _ in range(3)]
        gen = np.random.Generator(np.random.PCG64(7))
        for _ in range(300):
            xs = gen.random(3)
            bank.cnt += 1
            bank.sm += xs
            bank.refresh()
            for k in range(3):
                ingest(scalars[k], [xs[k]], pol)
        for k in range(3):
            assert bank.lvl[k] == scalars[k].level
            assert bank.lo[k] == pytest.approx(scalars[k].lower)
            assert bank.hi[k] == pytest.approx(scalars[k].upper)

    def test_reset(self):
        bank = TrackerBank((2, 2), BetaPolicy.horizon(10.0))
        bank.cnt += 50
        bank.sm += 25.0
        bank.refresh()
        bank.reset()
        assert np.all(bank.cnt == 0) and np.all(np.isinf(bank.lo))
