"""Learner state vector, its per-answer update rule, and the composite reward.

The state tracks six bounded components: a logit-scale skill estimate, a
windowed recent accuracy, an EWMA of normalized response time, a capped-streak
momentum ratio, a windowed accuracy delta (learning velocity), and an
evidence-count confidence. All operations are pure: they return new values and
never mutate their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .difficulty import Difficulty
from .irt import ItemParams, success_probability


class DoubleSubmitError(ValueError):
    """Raised when an outcome repeats the immediately preceding question_id."""


@dataclass(frozen=True)
class AnswerOutcome:
    """One graded answer: what was asked, whether it was right, and how fast."""

    question_id: str
    difficulty: Difficulty
    correct: bool
    response_time: float
    time_limit: float

    def __post_init__(self):
        if not math.isfinite(self.response_time) or self.response_time < 0:
            raise ValueError(f"response_time must be finite and >= 0, got {self.response_time}")
        if not math.isfinite(self.time_limit) or self.time_limit <= 0:
            raise ValueError(f"time_limit must be finite and > 0, got {self.time_limit}")


@dataclass(frozen=True)
class ModelConfig:
    accuracy_window: int = 5
    ewma_beta: float = 0.3
    streak_cap: int = 5
    velocity_window: int = 5
    confidence_saturation: int = 15
    elo_gain: float = 0.4
    skill_clamp: float = 3.0

    def __post_init__(self):
        for name in ("accuracy_window", "streak_cap", "velocity_window", "confidence_saturation"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 < self.ewma_beta <= 1.0:
            raise ValueError("ewma_beta must be in (0, 1]")
        if self.elo_gain <= 0:
            raise ValueError("elo_gain must be > 0")


@dataclass(frozen=True)
class LearnerState:
    skill: float = 0.0
    recent_accuracy: float = 0.5
    norm_response_time: float = 0.5
    streak_momentum: float = 0.0
    learning_velocity: float = 0.0
    confidence: float = 0.0
    answer_history: tuple[AnswerOutcome, ...] = field(default=())
    correct_streak: int = 0
    answered_count: int = 0

    def as_dict(self) -> dict:
        """Snapshot of the six components plus bookkeeping, for events and the UI."""
        return {
            "skill": self.skill,
            "recent_accuracy": self.recent_accuracy,
            "norm_response_time": self.norm_response_time,
            "streak_momentum": self.streak_momentum,
            "learning_velocity": self.learning_velocity,
            "confidence": self.confidence,
            "correct_streak": self.correct_streak,
            "answered_count": self.answered_count,
        }


@dataclass(frozen=True)
class RewardBreakdown:
    """Additive reward components: accuracy, timeliness, progression, momentum."""

    r_acc: float
    r_time: float
    r_prog: float
    r_mom: float
    total: float

    def as_dict(self) -> dict[str, float]:
        return {
            "r_acc": self.r_acc,
            "r_time": self.r_time,
            "r_prog": self.r_prog,
            "r_mom": self.r_mom,
            "total": self.total,
        }


def init_state(config: ModelConfig) -> LearnerState:
    """Cold-start state: population-mean skill, maximum-ignorance accuracy."""
    return LearnerState()


def _clamp(x: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, x))


def _window_accuracy(history: tuple[AnswerOutcome, ...], window: int) -> float:
    recent = history[-window:]
    return sum(1 for o in recent if o.correct) / len(recent)


def update_state(
    state: LearnerState,
    outcome: AnswerOutcome,
    item: ItemParams,
    config: ModelConfig,
) -> LearnerState:
    """Fold one answer into the state.

    Skill moves by an Elo-style step along the 2PL gradient: theta' =
    clamp(theta + K * (y - p)) with p the pre-answer success probability.
    A correct answer can only raise skill and an incorrect one only lower it,
    because p is strictly inside (0, 1).
    """
    if state.answer_history and state.answer_history[-1].question_id == outcome.question_id:
        raise DoubleSubmitError(
            f"question {outcome.question_id!r} repeats the previous outcome (double submit?)"
        )

    history = state.answer_history + (outcome,)
    answered = len(history)

    recent_accuracy = _window_accuracy(history, config.accuracy_window)

    time_frac = _clamp(outcome.response_time / outcome.time_limit, 0.0, 1.0)
    norm_response_time = (1 - config.ewma_beta) * state.norm_response_time + config.ewma_beta * time_frac

    correct_streak = state.correct_streak + 1 if outcome.correct else 0
    streak_momentum = min(correct_streak, config.streak_cap) / config.streak_cap

    w = config.velocity_window
    if answered >= 2 * w:
        acc_last = _window_accuracy(history, w)
        acc_prev = sum(1 for o in history[-2 * w : -w] if o.correct) / w
        learning_velocity = acc_last - acc_prev
    else:
        learning_velocity = 0.0

    confidence = min(1.0, answered / config.confidence_saturation)

    p = success_probability(state.skill, item)
    y = 1.0 if outcome.correct else 0.0
    skill = _clamp(state.skill + config.elo_gain * (y - p), -config.skill_clamp, config.skill_clamp)

    return replace(
        state,
        skill=skill,
        recent_accuracy=recent_accuracy,
        norm_response_time=norm_response_time,
        streak_momentum=streak_momentum,
        learning_velocity=learning_velocity,
        confidence=confidence,
        answer_history=history,
        correct_streak=correct_streak,
        answered_count=answered,
    )


def compute_reward(
    state_before: LearnerState,
    outcome: AnswerOutcome,
    prev_difficulty: Difficulty,
    config: ModelConfig,
) -> RewardBreakdown:
    """Composite shaping reward for one answer.

    r_acc is +1 / -0.5 for correct / incorrect. The remaining components are
    granted only on correct answers: r_time in [0, 0.3] rewards speed, r_prog
    pays 0.2 for landing a strictly harder question than the previous one, and
    r_mom in [0, 0.1] scales with the streak momentum this answer produces.
    """
    if outcome.correct:
        r_acc = 1.0
        time_frac = _clamp(outcome.response_time / outcome.time_limit, 0.0, 1.0)
        r_time = 0.3 * max(0.0, 1.0 - time_frac)
        r_prog = 0.2 if outcome.difficulty > prev_difficulty else 0.0
        streak_after = state_before.correct_streak + 1
        r_mom = 0.1 * (min(streak_after, config.streak_cap) / config.streak_cap)
    else:
        r_acc = -0.5
        r_time = 0.0
        r_prog = 0.0
        r_mom = 0.0
    return RewardBreakdown(
        r_acc=r_acc,
        r_time=r_time,
        r_prog=r_prog,
        r_mom=r_mom,
        total=r_acc + r_time + r_prog + r_mom,
    )
