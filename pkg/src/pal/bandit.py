"""Epsilon-greedy stateless Q-learning over the three difficulty actions.

A single implicit state: the table holds one action value per difficulty and
the update bootstraps on the max over the pre-update table,
Q'(a) = Q(a) + alpha * (R + gamma * max_a' Q(a') - Q(a)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .difficulty import DIFFICULTIES, Difficulty, DifficultyDistribution


@dataclass(frozen=True)
class BanditConfig:
    alpha: float = 0.1
    gamma: float = 0.9
    epsilon_init: float = 0.3
    epsilon_decay: float = 0.99
    epsilon_floor: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        if not 0.0 <= self.epsilon_floor <= self.epsilon_init <= 1.0:
            raise ValueError("need 0 <= epsilon_floor <= epsilon_init <= 1")


@dataclass(frozen=True)
class QTable:
    """Action values indexed by Difficulty, plus the current exploration rate."""

    q_values: tuple[float, float, float] = (0.0, 0.0, 0.0)
    epsilon: float = 0.3
    updates_seen: int = 0

    @classmethod
    def fresh(cls, config: BanditConfig) -> "QTable":
        return cls(epsilon=config.epsilon_init)

    def q(self, d: Difficulty) -> float:
        return self.q_values[int(d)]

    def as_dict(self) -> dict:
        return {
            "q_values": {d.label: self.q_values[int(d)] for d in DIFFICULTIES},
            "epsilon": self.epsilon,
            "updates_seen": self.updates_seen,
        }


def rl_distribution(table: QTable, prefer: Difficulty | None = None) -> DifficultyDistribution:
    """Epsilon-greedy selection probabilities: 1 - eps + eps/3 on the greedy
    action, eps/3 elsewhere.

    Greedy ties break toward `prefer` (the ladder's current level) when it is
    among the tied maxima, otherwise toward the lowest tied difficulty.
    """
    best = max(table.q_values)
    tied = [d for d in DIFFICULTIES if table.q_values[int(d)] == best]
    greedy = prefer if prefer in tied else tied[0]
    eps = table.epsilon
    p = [eps / 3.0] * 3
    p[int(greedy)] += 1.0 - eps
    return DifficultyDistribution((p[0], p[1], p[2]))


def q_update(table: QTable, action: Difficulty, reward: float, config: BanditConfig) -> QTable:
    """One temporal-difference update of the chosen action's value.

    The bootstrap max is taken over the pre-update table; only the updated
    entry changes. Epsilon decays multiplicatively down to its floor.
    """
    if not math.isfinite(reward):
        raise ValueError(f"reward must be finite, got {reward}")
    best = max(table.q_values)
    q = list(table.q_values)
    i = int(action)
    q[i] = q[i] + config.alpha * (reward + config.gamma * best - q[i])
    return QTable(
        q_values=(q[0], q[1], q[2]),
        epsilon=max(config.epsilon_floor, table.epsilon * config.epsilon_decay),
        updates_seen=table.updates_seen + 1,
    )
