"""Statistical head: 2PL success model, the difficulty prior, and the stability ladder.

The prior has two modes. `literal_2pl` normalizes the raw 2PL success
probabilities across the three levels; with a shared discrimination it always
favors the easiest level. `target_zone` (default) puts mass on levels whose
predicted success probability is close to a target p*, which is what keeps a
learner in the productive band. The ladder adds hysteresis: asymmetric
promote/demote thresholds plus cooldown and hold counters prevent rapid
back-and-forth switching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import TYPE_CHECKING

from .difficulty import DIFFICULTIES, Difficulty, DifficultyDistribution

if TYPE_CHECKING:
    from .model import LearnerState


@dataclass(frozen=True)
class ItemParams:
    """2PL item parameters: discrimination a > 0 and difficulty location b."""

    discrimination: float
    difficulty_location: float

    def __post_init__(self):
        if self.discrimination <= 0:
            raise ValueError("discrimination must be > 0")

    def as_dict(self) -> dict[str, float]:
        return {"a": self.discrimination, "b": self.difficulty_location}

    @classmethod
    def from_dict(cls, d: dict) -> "ItemParams":
        return cls(discrimination=float(d["a"]), difficulty_location=float(d["b"]))


class PriorMode(str, Enum):
    LITERAL_2PL = "literal_2pl"
    TARGET_ZONE = "target_zone"


def _default_params() -> dict[Difficulty, ItemParams]:
    return {
        Difficulty.EASY: ItemParams(1.2, -1.0),
        Difficulty.MEDIUM: ItemParams(1.2, 0.0),
        Difficulty.HARD: ItemParams(1.2, 1.0),
    }


@dataclass(frozen=True)
class PriorConfig:
    params_per_level: dict[Difficulty, ItemParams] = field(default_factory=_default_params)
    promote_threshold: float = 0.75
    demote_threshold: float = 0.35
    cooldown_len: int = 2
    hold_len: int = 3
    prior_mode: PriorMode = PriorMode.TARGET_ZONE
    target_success: float = 0.7
    zone_sharpness: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.demote_threshold < self.promote_threshold <= 1.0:
            raise ValueError("thresholds must satisfy 0 <= demote < promote <= 1")
        if self.cooldown_len < 0 or self.hold_len < 0:
            raise ValueError("cooldown_len and hold_len must be >= 0")
        if self.zone_sharpness <= 0:
            raise ValueError("zone_sharpness must be > 0")
        if not 0.0 < self.target_success < 1.0:
            raise ValueError("target_success must be in (0, 1)")
        if set(self.params_per_level) != set(DIFFICULTIES):
            raise ValueError("params_per_level must cover exactly Easy, Medium, Hard")


@dataclass(frozen=True)
class LadderState:
    """Committed difficulty level plus the buffer counters.

    Both counters count answered questions and reset to 0 when the policy
    commits a level change.
    """

    current_level: Difficulty = Difficulty.EASY
    questions_since_change: int = 0
    questions_at_level: int = 0

    def as_dict(self) -> dict:
        return {
            "current_level": self.current_level.label,
            "questions_since_change": self.questions_since_change,
            "questions_at_level": self.questions_at_level,
        }


def success_probability(theta: float, item: ItemParams) -> float:
    """2PL: sigma(a * (theta - b)), strictly inside (0, 1)."""
    z = item.discrimination * (theta - item.difficulty_location)
    # exp underflow/overflow guard; keeps the output strictly inside (0, 1)
    z = max(-500.0, min(500.0, z))
    return 1.0 / (1.0 + math.exp(-z))


def stat_distribution(state: "LearnerState", config: PriorConfig) -> DifficultyDistribution:
    """Prior over difficulties from the current skill estimate.

    literal_2pl: p(d) proportional to sigma(a_d(theta - b_d)).
    target_zone: p(d) proportional to exp(-|sigma(a_d(theta - b_d)) - p*| / lambda).
    """
    probs = [success_probability(state.skill, config.params_per_level[d]) for d in DIFFICULTIES]
    if config.prior_mode == PriorMode.LITERAL_2PL:
        weights = probs
    else:
        weights = [
            math.exp(-abs(p - config.target_success) / config.zone_sharpness) for p in probs
        ]
    return DifficultyDistribution.from_weights(weights)


def ladder_step(
    ladder: LadderState,
    recent_accuracy: float,
    config: PriorConfig,
) -> tuple[LadderState, frozenset[Difficulty]]:
    """Advance the buffer counters and report which levels the policy may pick.

    Eligibility is judged on the incoming counters. Promotion needs accuracy at
    or above the promote threshold, a finished cooldown, and a finished hold;
    demotion needs accuracy at or below the demote threshold and a finished
    cooldown only (a struggling learner escapes without waiting out the hold).
    The allowed set is the current level plus at most one adjacent level; the
    thresholds cannot both fire at once, so it never holds both neighbors.
    """
    level = ladder.current_level
    allowed = {level}
    can_promote = (
        recent_accuracy >= config.promote_threshold
        and ladder.questions_since_change >= config.cooldown_len
        and ladder.questions_at_level >= config.hold_len
        and level != Difficulty.HARD
    )
    can_demote = (
        recent_accuracy <= config.demote_threshold
        and ladder.questions_since_change >= config.cooldown_len
        and level != Difficulty.EASY
    )
    if can_promote:
        allowed.add(Difficulty(int(level) + 1))
    if can_demote:
        allowed.add(Difficulty(int(level) - 1))
    advanced = replace(
        ladder,
        questions_since_change=ladder.questions_since_change + 1,
        questions_at_level=ladder.questions_at_level + 1,
    )
    return advanced, frozenset(allowed)
