"""Tests for the epsilon-greedy Q-learning head."""

import random

import pytest

from pal.bandit import BanditConfig, QTable, q_update, rl_distribution
from pal.difficulty import DIFFICULTIES, Difficulty

CFG = BanditConfig()


class TestRlDistribution:
    def test_pure_greedy(self):
        table = QTable(q_values=(0.2, 0.9, 0.1), epsilon=0.0)
        dist = rl_distribution(table)
        assert dist.p == (0.0, 1.0, 0.0)

    def test_pure_exploration(self):
        table = QTable(q_values=(5.0, -1.0, 0.3), epsilon=1.0)
        dist = rl_distribution(table)
        for d in DIFFICULTIES:
            assert dist[d] == pytest.approx(1 / 3)

    def test_epsilon_point_three_on_hard(self):
        table = QTable(q_values=(0.0, 0.1, 0.9), epsilon=0.3)
        dist = rl_distribution(table)
        assert dist[Difficulty.HARD] == pytest.approx(0.8)
        assert dist[Difficulty.EASY] == pytest.approx(0.1)
        assert dist[Difficulty.MEDIUM] == pytest.approx(0.1)

    def test_tie_breaks_toward_preferred_level(self):
        table = QTable(q_values=(0.5, 0.5, 0.1), epsilon=0.0)
        assert rl_distribution(table, prefer=Difficulty.MEDIUM)[Difficulty.MEDIUM] == 1.0

    def test_tie_breaks_to_lowest_without_preference(self):
        table = QTable(q_values=(0.5, 0.5, 0.5), epsilon=0.0)
        assert rl_distribution(table)[Difficulty.EASY] == 1.0
        # preferred level outside the tied set falls back to lowest tied
        table2 = QTable(q_values=(0.5, 0.5, 0.0), epsilon=0.0)
        assert rl_distribution(table2, prefer=Difficulty.HARD)[Difficulty.EASY] == 1.0

    def test_valid_distribution_for_any_epsilon(self):
        for k in range(11):
            dist = rl_distribution(QTable(q_values=(0.1, 0.2, 0.3), epsilon=k / 10))
            assert all(v >= 0 for v in dist.p)
            assert sum(dist.p) == pytest.approx(1.0, abs=1e-12)


class TestQUpdate:
    def test_single_reward_from_zero(self):
        table = QTable()
        updated = q_update(table, Difficulty.MEDIUM, 1.0, CFG)
        assert updated.q(Difficulty.MEDIUM) == pytest.approx(0.1)
        assert updated.q(Difficulty.EASY) == 0.0
        assert updated.q(Difficulty.HARD) == 0.0

    def test_zero_td_error_changes_nothing(self):
        table = QTable()
        updated = q_update(table, Difficulty.EASY, 0.0, CFG)
        assert updated.q_values == (0.0, 0.0, 0.0)

    def test_bootstrap_uses_pre_update_max(self):
        table = QTable(q_values=(0.0, 0.5, 0.0))
        updated = q_update(table, Difficulty.EASY, -0.5, CFG)
        # 0 + 0.1 * (-0.5 + 0.9 * 0.5 - 0)
        assert updated.q(Difficulty.EASY) == pytest.approx(-0.005)
        assert updated.q(Difficulty.MEDIUM) == 0.5

    def test_only_one_entry_changes(self):
        rng = random.Random(5)
        table = QTable(q_values=(0.3, -0.2, 0.7))
        for _ in range(50):
            action = rng.choice(list(DIFFICULTIES))
            before = table.q_values
            table = q_update(table, action, rng.uniform(-1, 2), CFG)
            diffs = [i for i in range(3) if table.q_values[i] != before[i]]
            assert diffs == [int(action)] or diffs == []

    def test_epsilon_decays_to_floor(self):
        table = QTable.fresh(CFG)
        for _ in range(500):
            prev = table.epsilon
            table = q_update(table, Difficulty.EASY, 0.0, CFG)
            assert table.epsilon <= prev
        assert table.epsilon == CFG.epsilon_floor
        assert table.updates_seen == 500

    def test_non_finite_reward_rejected(self):
        with pytest.raises(ValueError):
            q_update(QTable(), Difficulty.EASY, float("nan"), CFG)
        with pytest.raises(ValueError):
            q_update(QTable(), Difficulty.EASY, float("inf"), CFG)

    def test_fixed_point_with_deterministic_rewards(self):
        """max Q converges to max R / (1 - gamma) = 10 under uniform exploration."""
        rewards = {Difficulty.EASY: 0.2, Difficulty.MEDIUM: 0.5, Difficulty.HARD: 1.0}
        rng = random.Random(0)
        table = QTable.fresh(CFG)
        for _ in range(10_000):
            action = rng.choice(list(DIFFICULTIES))
            table = q_update(table, action, rewards[action], CFG)
        assert max(table.q_values) == pytest.approx(10.0, abs=1e-2)


class TestBanditConfigValidation:
    def test_gamma_below_one(self):
        with pytest.raises(ValueError):
            BanditConfig(gamma=1.0)

    def test_epsilon_ordering(self):
        with pytest.raises(ValueError):
            BanditConfig(epsilon_floor=0.5, epsilon_init=0.3)
