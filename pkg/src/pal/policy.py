"""Hybrid policy: blend the statistical prior with the RL head, mask with the
ladder, sample the next difficulty, and fold each answer into every component.

All operations are pure; callers keep one PolicyState per session and replace
it with the returned successor. Sampling is seeded per decision, so a session
driven by a fixed outcome script and seed is reproducible trace-for-trace.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .bandit import BanditConfig, QTable, q_update, rl_distribution
from .difficulty import DIFFICULTIES, Difficulty, DifficultyDistribution
from .irt import LadderState, PriorConfig, ladder_step, stat_distribution
from .model import (
    AnswerOutcome,
    LearnerState,
    ModelConfig,
    RewardBreakdown,
    compute_reward,
    init_state,
    update_state,
)


@dataclass(frozen=True)
class BlendConfig:
    """Confidence-scaled mixing weight: w = min(w_max, w0 + kappa * c * progress)."""

    w0: float = 0.2
    kappa: float = 0.6
    w_max: float = 0.8
    planned_questions: int = 20

    def __post_init__(self):
        if not 0.0 <= self.w0 <= self.w_max <= 1.0:
            raise ValueError("need 0 <= w0 <= w_max <= 1")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.planned_questions < 1:
            raise ValueError("planned_questions must be >= 1")


@dataclass(frozen=True)
class PolicyConfigs:
    """Bundle of all per-session configuration."""

    model: ModelConfig = field(default_factory=ModelConfig)
    prior: PriorConfig = field(default_factory=PriorConfig)
    bandit: BanditConfig = field(default_factory=BanditConfig)
    blend: BlendConfig = field(default_factory=BlendConfig)


@dataclass(frozen=True)
class DecisionTrace:
    """Everything that went into one difficulty decision, for audit and replay."""

    p_stat: DifficultyDistribution
    p_rl: DifficultyDistribution
    w: float
    masked: DifficultyDistribution
    sampled: Difficulty
    rng_draw: float

    def as_dict(self) -> dict:
        return {
            "p_stat": self.p_stat.as_dict(),
            "p_rl": self.p_rl.as_dict(),
            "w": self.w,
            "masked": self.masked.as_dict(),
            "sampled": self.sampled.label,
            "rng_draw": self.rng_draw,
        }


@dataclass(frozen=True)
class PolicyState:
    ladder: LadderState
    qtable: QTable
    learner: LearnerState
    last_served_difficulty: Difficulty | None = None
    decision_trace: DecisionTrace | None = None

    @classmethod
    def initial(cls, configs: PolicyConfigs, start_level: Difficulty = Difficulty.EASY) -> "PolicyState":
        return cls(
            ladder=LadderState(current_level=start_level),
            qtable=QTable.fresh(configs.bandit),
            learner=init_state(configs.model),
        )


def blend_weight(confidence: float, progress: float, config: BlendConfig) -> float:
    """RL share of the mixture; grows with evidence and session progress, capped."""
    return min(config.w_max, config.w0 + config.kappa * confidence * progress)


def blend(
    p_stat: DifficultyDistribution,
    p_rl: DifficultyDistribution,
    w: float,
) -> DifficultyDistribution:
    """Elementwise convex combination (1 - w) * p_stat + w * p_rl."""
    if not 0.0 <= w <= 1.0:
        raise ValueError("w must be in [0, 1]")
    return DifficultyDistribution(
        tuple((1.0 - w) * p_stat.p[i] + w * p_rl.p[i] for i in range(3))
    )


def apply_mask(
    dist: DifficultyDistribution,
    allowed: frozenset[Difficulty] | set[Difficulty],
    current: Difficulty,
) -> DifficultyDistribution:
    """Zero out disallowed levels and renormalize.

    The blended distribution is strictly positive everywhere, so the allowed
    mass cannot actually vanish; the point-mass fallback is defensive only.
    """
    masked = [dist.p[int(d)] if d in allowed else 0.0 for d in DIFFICULTIES]
    total = sum(masked)
    if total <= 0.0:
        return DifficultyDistribution.point_mass(current)
    return DifficultyDistribution(tuple(m / total for m in masked))


def choose_difficulty(
    policy: PolicyState,
    configs: PolicyConfigs,
    rng_seed: int,
) -> tuple[PolicyState, Difficulty, DecisionTrace]:
    """Pick the next question's difficulty and commit any level change.

    progress is answered questions over planned questions, clamped to [0, 1].
    The ladder's allowed set masks the blended distribution, so neither head
    can trigger a switch the buffers forbid. Sampling draws one uniform variate
    from a generator seeded with rng_seed and inverts the CDF over the fixed
    (Easy, Medium, Hard) order. If the sample differs from the current level,
    the ladder commits the change and both buffer counters reset.
    """
    learner = policy.learner
    p_stat = stat_distribution(learner, configs.prior)
    p_rl = rl_distribution(policy.qtable, prefer=policy.ladder.current_level)
    progress = min(1.0, learner.answered_count / configs.blend.planned_questions)
    w = blend_weight(learner.confidence, progress, configs.blend)
    blended = blend(p_stat, p_rl, w)
    _, allowed = ladder_step(policy.ladder, learner.recent_accuracy, configs.prior)
    masked = apply_mask(blended, allowed, policy.ladder.current_level)
    draw = random.Random(rng_seed).random()
    sampled = masked.sample(draw)
    trace = DecisionTrace(
        p_stat=p_stat, p_rl=p_rl, w=w, masked=masked, sampled=sampled, rng_draw=draw
    )
    if sampled != policy.ladder.current_level:
        ladder = LadderState(current_level=sampled)
    else:
        ladder = policy.ladder
    return replace(policy, ladder=ladder, decision_trace=trace), sampled, trace


def step(
    policy: PolicyState,
    outcome: AnswerOutcome,
    configs: PolicyConfigs,
) -> tuple[PolicyState, RewardBreakdown]:
    """Fold one answer into both heads and advance the ladder counters.

    The reward is computed against the pre-update state and the previously
    answered difficulty (the outcome's own difficulty on the first answer);
    the Q-update uses the served difficulty as the action and the reward total
    as R. Double submits propagate from the state update before anything else
    is touched.
    """
    item = configs.prior.params_per_level[outcome.difficulty]
    new_learner = update_state(policy.learner, outcome, item, configs.model)
    prev_difficulty = (
        policy.last_served_difficulty
        if policy.last_served_difficulty is not None
        else outcome.difficulty
    )
    reward = compute_reward(policy.learner, outcome, prev_difficulty, configs.model)
    new_qtable = q_update(policy.qtable, outcome.difficulty, reward.total, configs.bandit)
    advanced_ladder, _ = ladder_step(policy.ladder, new_learner.recent_accuracy, configs.prior)
    new_policy = replace(
        policy,
        learner=new_learner,
        qtable=new_qtable,
        ladder=advanced_ladder,
        last_served_difficulty=outcome.difficulty,
    )
    return new_policy, reward
