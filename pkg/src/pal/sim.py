"""Synthetic-learner harness for the full policy loop at desk scale.

Episodes drive PolicyState directly (the uniform per-difficulty pool never
exhausts, so within-difficulty question selection cannot influence the
policy) and are bit-deterministic given a seed. The ground-truth responder
uses the same 2PL law as the prior, evaluated at the learner's true ability.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import random
import statistics
from dataclasses import dataclass, field

from .difficulty import DIFFICULTIES, Difficulty
from .irt import ItemParams, success_probability
from .model import AnswerOutcome
from .policy import PolicyConfigs, PolicyState, choose_difficulty
from .policy import step as policy_step

ZONE_LOW = 0.6
ZONE_HIGH = 0.85  # brackets the target success rate 0.7


@dataclass
class SyntheticLearner:
    """Ground-truth responder. `improving` gains ability on each correct
    answer; `noisy` flips the 2PL outcome with a fixed probability."""

    true_theta: float
    kind: str = "static"  # static | improving | noisy
    delta_per_correct: float = 0.0
    flip_prob: float = 0.0
    base_response_time: float = 0.5  # fraction of the time limit

    def __post_init__(self):
        if self.kind not in ("static", "improving", "noisy"):
            raise ValueError(f"unknown learner kind {self.kind!r}")
        if not 0.0 <= self.flip_prob < 0.5:
            raise ValueError("flip_prob must be in [0, 0.5)")
        if self.delta_per_correct < 0:
            raise ValueError("delta_per_correct must be >= 0")

    def describe(self) -> str:
        if self.kind == "improving":
            return f"improving:{self.true_theta:g},{self.delta_per_correct:g}"
        if self.kind == "noisy":
            return f"noisy:{self.true_theta:g},{self.flip_prob:g}"
        return f"static:{self.true_theta:g}"


@dataclass(frozen=True)
class EpisodeConfig:
    """Which policy variant to run and where the ladder starts."""

    mode: str = "hybrid"  # hybrid | stat | rl | fixed
    fixed_level: Difficulty | None = None
    start_level: Difficulty = Difficulty.EASY
    configs: PolicyConfigs = field(default_factory=PolicyConfigs)
    time_limit: float = 30.0

    def __post_init__(self):
        if self.mode not in ("hybrid", "stat", "rl", "fixed"):
            raise ValueError(f"unknown policy mode {self.mode!r}")
        if self.mode == "fixed" and self.fixed_level is None:
            raise ValueError("fixed mode needs fixed_level")

    def describe(self) -> str:
        return f"fixed:{self.fixed_level.label}" if self.mode == "fixed" else self.mode


@dataclass(frozen=True)
class SimMetrics:
    time_in_zone: float
    level_switches: int
    cumulative_reward: float
    final_theta_error: float
    level_trace: tuple[Difficulty, ...]
    first_reach: dict[Difficulty, int | None]


def simulate_response(
    learner: SyntheticLearner,
    item: ItemParams,
    time_limit: float,
    rng: random.Random,
    question_id: str = "sim",
    difficulty: Difficulty = Difficulty.MEDIUM,
) -> AnswerOutcome:
    """One synthetic answer: correctness ~ 2PL at the true ability, response
    time a deterministic shape (slower on items the learner finds hard)."""
    p = success_probability(learner.true_theta, item)
    correct = rng.random() < p
    if learner.kind == "noisy" and learner.flip_prob > 0.0 and rng.random() < learner.flip_prob:
        correct = not correct
    response_time = learner.base_response_time * time_limit * (1.0 + 0.5 * (1.0 - p))
    response_time = min(response_time, time_limit)
    if learner.kind == "improving" and correct:
        learner.true_theta += learner.delta_per_correct
    return AnswerOutcome(
        question_id=question_id,
        difficulty=difficulty,
        correct=correct,
        response_time=response_time,
        time_limit=time_limit,
    )


def _blend_for_mode(configs: PolicyConfigs, mode: str) -> PolicyConfigs:
    if mode == "stat":
        blend = dataclasses.replace(configs.blend, w0=0.0, kappa=0.0, w_max=0.0)
    elif mode == "rl":
        blend = dataclasses.replace(configs.blend, w0=1.0, kappa=0.0, w_max=1.0)
    else:
        return configs
    return dataclasses.replace(configs, blend=blend)


def run_episode(
    policy_config: EpisodeConfig,
    learner: SyntheticLearner,
    n_questions: int,
    seed: int,
) -> SimMetrics:
    """One full in-memory session; deterministic given (config, learner, seed)."""
    if n_questions < 1:
        raise ValueError("n_questions must be >= 1")
    learner = dataclasses.replace(learner)  # improving learners mutate their copy
    configs = _blend_for_mode(policy_config.configs, policy_config.mode)
    configs = dataclasses.replace(
        configs, blend=dataclasses.replace(configs.blend, planned_questions=n_questions)
    )
    policy = PolicyState.initial(configs, start_level=policy_config.start_level)
    response_rng = random.Random(f"responses-{seed}")

    level_trace: list[Difficulty] = []
    first_reach: dict[Difficulty, int | None] = {d: None for d in DIFFICULTIES}
    cumulative = 0.0
    in_zone = 0

    for i in range(n_questions):
        if policy_config.mode == "fixed":
            d = policy_config.fixed_level
        else:
            decision_seed = (seed << 20) + i
            policy, d, _trace = choose_difficulty(policy, configs, decision_seed)
        item = configs.prior.params_per_level[d]
        p_true = success_probability(learner.true_theta, item)
        if ZONE_LOW <= p_true <= ZONE_HIGH:
            in_zone += 1
        outcome = simulate_response(
            learner, item, policy_config.time_limit, response_rng,
            question_id=f"sim-{i}", difficulty=d,
        )
        policy, reward = policy_step(policy, outcome, configs)
        cumulative += reward.total
        level_trace.append(d)
        if first_reach[d] is None:
            first_reach[d] = i + 1

    switches = sum(1 for a, b in zip(level_trace, level_trace[1:]) if a != b)
    return SimMetrics(
        time_in_zone=in_zone / n_questions,
        level_switches=switches,
        cumulative_reward=cumulative,
        final_theta_error=abs(policy.learner.skill - learner.true_theta),
        level_trace=tuple(level_trace),
        first_reach=first_reach,
    )


# --- policy comparison ---

@dataclass(frozen=True)
class MetricRow:
    policy: str
    learner: str
    metric: str
    mean: float | None
    stddev: float | None
    n: int


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[MetricRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["policy", "learner", "metric", "mean", "stddev", "n"])
        for r in self.rows:
            mean = "" if r.mean is None else f"{r.mean:.6g}"
            std = "" if r.stddev is None else f"{r.stddev:.6g}"
            writer.writerow([r.policy, r.learner, r.metric, mean, std, r.n])
        return buf.getvalue()

    def to_text(self) -> str:
        header = f"{'policy':<14}{'learner':<22}{'metric':<22}{'mean':>12}{'stddev':>12}{'n':>6}"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            mean = "-" if r.mean is None else f"{r.mean:.4f}"
            std = "-" if r.stddev is None else f"{r.stddev:.4f}"
            lines.append(
                f"{r.policy:<14}{r.learner:<22}{r.metric:<22}{mean:>12}{std:>12}{r.n:>6}"
            )
        return "\n".join(lines) + "\n"


def _aggregate(values: list[float]) -> tuple[float | None, float | None, int]:
    if not values:
        return None, None, 0
    return statistics.mean(values), statistics.pstdev(values), len(values)


def compare_policies(
    policies: list[EpisodeConfig],
    population: list[SyntheticLearner],
    seeds: list[int],
    n_questions: int = 40,
) -> ComparisonReport:
    """Mean and stddev of every numeric metric per (policy, learner) over seeds.

    first_reach_<level> aggregates only episodes that reached the level; the
    companion reached_<level> row carries the reach fraction over all seeds.
    """
    if not policies or not population:
        raise ValueError("policies and population must be non-empty")
    if not seeds:
        raise ValueError("seed list must be non-empty")
    rows: list[MetricRow] = []
    for policy_config in policies:
        for learner in population:
            runs = [run_episode(policy_config, learner, n_questions, s) for s in seeds]
            pname, lname = policy_config.describe(), learner.describe()
            scalars = {
                "time_in_zone": [m.time_in_zone for m in runs],
                "level_switches": [float(m.level_switches) for m in runs],
                "cumulative_reward": [m.cumulative_reward for m in runs],
                "final_theta_error": [m.final_theta_error for m in runs],
            }
            for metric, values in scalars.items():
                mean, std, n = _aggregate(values)
                rows.append(MetricRow(pname, lname, metric, mean, std, n))
            for d in DIFFICULTIES:
                reached = [float(m.first_reach[d]) for m in runs if m.first_reach[d] is not None]
                mean, std, n = _aggregate(reached)
                rows.append(MetricRow(pname, lname, f"first_reach_{d.label}", mean, std, n))
                rate = len(reached) / len(runs)
                rows.append(MetricRow(pname, lname, f"reached_{d.label}", rate, 0.0, len(runs)))
    return ComparisonReport(rows=tuple(rows))
