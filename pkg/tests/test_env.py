import numpy as np
import pytest

from matchband.core import Bernoulli, Gaussian, Matching, Rank1Instance, optimal_matching
from matchband.env import (
    MatchingEnv,
    PairEnv,
    RegretLedger,
    SeededRng,
    checkpoint_grid,
    record_step,
    sample_feedback,
)


def mono(u, dist=Bernoulli()):
    return Rank1Instance(kind="monopartite", u=u, dist=dist)


class TestSampleFeedback:
    def test_degenerate_zero(self):
        inst = mono([0.0, 0.0, 1.0, 1.0])
        gen = SeededRng(1).generator()
        for _ in range(50):
            fb = sample_feedback(inst, Matching.mono([(0, 1)]), gen)
            assert fb.observations[0][1] == 0.0

    def test_degenerate_one(self):
        inst = mono([0.0, 0.0, 1.0, 1.0])
        gen = SeededRng(1).generator()
        for _ in range(50):
            fb = sample_feedback(inst, Matching.mono([(2, 3)]), gen)
            assert fb.observations[0][1] == 1.0

    def test_empirical_mean_clt(self):
        # u_i * u_j = 0.5; 1e5 draws within +-0.01 (>3 sigma/sqrt(n))
        inst = mono([np.sqrt(0.5), np.sqrt(0.5)])
        gen = SeededRng(7).generator()
        n = 100_000
        xs = (gen.random(n) < 0.5).astype(float)
        assert abs(xs.mean() - 0.5) < 0.01
        fb = sample_feedback(inst, Matching.mono([(0, 1)]), SeededRng(7).generator())
        assert fb.observations[0][1] in (0.0, 1.0)

    def test_zero_noise_gaussian(self):
        inst = mono([0.9, 0.7], dist=Gaussian(0.0))
        gen = SeededRng(3).generator()
        fb = sample_feedback(inst, Matching.mono([(0, 1)]), gen)
        assert fb.observations[0][1] == pytest.approx(0.63)


class TestCheckpointGrid:
    def test_prefix_and_tail(self):
        g = checkpoint_grid(10_000)
        assert list(g[:100]) == list(range(1, 101))
        assert g[-1] == 10_000
        assert np.all(np.diff(g) > 0)

    def test_small_horizon(self):
        assert list(checkpoint_grid(5)) == [1, 2, 3, 4, 5]

    def test_ratio_close_to_grid_factor(self):
        g = checkpoint_grid(2_000_000)
        tail = g[g > 1000].astype(float)
        ratios = tail[1:] / tail[:-1]
        assert np.all(ratios <= 1.06)


class TestRegretLedger:
    def test_oracle_play_zero(self):
        inst = mono([0.9, 0.7, 0.5, 0.3])
        led = RegretLedger(checkpoint_grid(10))
        m = optimal_matching(inst, "minimal")
        for _ in range(10):
            record_step(led, inst, m, mode="minimal")
        assert led.cum_regret == 0.0
        assert all(v == 0.0 for _, v in led.checkpoints)

    def test_single_suboptimal_play(self):
        inst = mono([0.9, 0.7, 0.5, 0.3])
        led = RegretLedger()
        record_step(led, inst, Matching.mono([(0, 2)]), mode="minimal")
        assert led.cum_regret == pytest.approx(0.18)

    def test_linear_accumulation(self):
        inst = mono([0.9, 0.7, 0.5, 0.3])
        led = RegretLedger()
        for _ in range(10):
            record_step(led, inst, Matching.mono([(0, 2)]), mode="minimal")
        assert led.cum_regret == pytest.approx(10 * 0.18)

    def test_batch_matches_stepwise(self):
        gaps = np.array([0.1, 0.0, 0.3, 0.2, 0.05, 0.4, 0.0])
        a = RegretLedger([2, 3, 5, 7])
        for g in gaps:
            a.record(float(g))
        b = RegretLedger([2, 3, 5, 7])
        b.record_batch(gaps[:4])
        b.record_batch(gaps[4:])
        assert a.t == b.t
        assert a.cum_regret == pytest.approx(b.cum_regret)
        assert len(a.checkpoints) == len(b.checkpoints)
        for (ta, va), (tb, vb) in zip(a.checkpoints, b.checkpoints):
            assert ta == tb and va == pytest.approx(vb)

    def test_constant_matches_batch(self):
        a = RegretLedger([1, 4, 6])
        a.record_constant(0.25, 6)
        b = RegretLedger([1, 4, 6])
        b.record_batch(np.full(6, 0.25))
        assert a.checkpoints == b.checkpoints

    def test_monotone_nonnegative(self):
        led = RegretLedger(checkpoint_grid(50))
        gen = SeededRng(5).generator()
        for _ in range(50):
            led.record(float(gen.random()))
        vals = [v for _, v in led.checkpoints]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert vals[0] >= 0


class TestSeededRng:
    def test_reproducible(self):
        a = SeededRng(42, 3).generator().random(10)
        b = SeededRng(42, 3).generator().random(10)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = SeededRng(42, 0).generator().random(10)
        b = SeededRng(42, 1).generator().random(10)
        assert not np.array_equal(a, b)

    def test_child_stream_independent(self):
        rng = SeededRng(42, 0)
        main = rng.generator().random(5)
        child = rng.child(1).generator().random(5)
        assert not np.array_equal(main, child)


class TestPairEnv:
    def test_permutation_consistent_with_instance(self):
        inst = Rank1Instance(kind="bipartite", u=[0.9, 0.5, 0.2], v=[0.8, 0.4, 0.1])
        env = PairEnv(inst, SeededRng(11), horizon=100)
        for i in range(3):
            for j in range(3):
                ii, jj = env.to_instance_pair((i, j))
                assert env.w[i, j] == pytest.approx(inst.mean(ii, jj))

    def test_regret_accounting(self):
        inst = mono([0.9, 0.7, 0.5, 0.3], dist=Gaussian(0.0))
        env = PairEnv(inst, SeededRng(2), horizon=10, permute=False)
        best = np.unravel_index(np.argmax(env.w - np.diag(np.diag(env.w))), env.w.shape)
        env.play_batch(np.array([best[0]]), np.array([best[1]]))
        assert env.ledger.cum_regret == pytest.approx(0.0)

    def test_determinism(self):
        inst = mono([0.9, 0.7, 0.5, 0.3])
        rows = np.array([0, 1, 2]); cols = np.array([1, 2, 3])
        a = PairEnv(inst, SeededRng(5), horizon=10).play_batch(rows, cols)
        b = PairEnv(inst, SeededRng(5), horizon=10).play_batch(rows, cols)
        assert np.array_equal(a, b)


class TestMatchingEnv:
    def test_play_repeated_zero_noise_exact(self):
        inst = mono([0.9, 0.7, 0.5, 0.3], dist=Gaussian(0.0))
        env = MatchingEnv(inst, SeededRng(9), horizon=100, permute=False)
        pairs = np.array([[0, 1], [2, 3]])
        sums = env.play_repeated(pairs, 7)
        assert sums == pytest.approx(7 * env.w[pairs[:, 0], pairs[:, 1]])
        assert env.t == 7

    def test_play_many_splits(self):
        inst = mono([0.9, 0.7, 0.5, 0.3])
        env = MatchingEnv(inst, SeededRng(9), horizon=100, permute=False)
        ms = [np.array([[0, 1], [2, 3]]), np.array([[0, 2], [1, 3]])]
        xs = env.play_many(ms)
        assert len(xs) == 2 and all(len(x) == 2 for x in xs)
        assert env.t == 2

    def test_binomial_sums_mean(self):
        inst = mono([np.sqrt(0.5), np.sqrt(0.5), 0.0, 0.0])
        env = MatchingEnv(inst, SeededRng(13), horizon=10**6, permute=False)
        i = int(np.where(env.values > 0.5)[0][0])
        j = int(np.where(env.values > 0.5)[0][1])
        pairs = np.array([[i, j], *[[k, l] for k, l in [(0, 1), (0, 2), (0, 3), (1, 2)] if {k, l} != {i, j}][:1]])
        sums = env.play_repeated(pairs, 100_000)
        assert abs(sums[0] / 100_000 - 0.5) < 0.01
