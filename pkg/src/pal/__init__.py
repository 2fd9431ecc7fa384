"""Adaptive learning sessions: transcript-compiled question banks, a hybrid
statistical/RL difficulty policy, and personalized post-session summaries."""

from .bandit import BanditConfig, QTable, q_update, rl_distribution
from .difficulty import DIFFICULTIES, Difficulty, DifficultyDistribution
from .irt import (
    ItemParams,
    LadderState,
    PriorConfig,
    PriorMode,
    ladder_step,
    stat_distribution,
    success_probability,
)
from .model import (
    AnswerOutcome,
    LearnerState,
    ModelConfig,
    RewardBreakdown,
    compute_reward,
    init_state,
    update_state,
)
from .pipeline import (
    Bank,
    CandidatePoint,
    PipelineConfig,
    QuestionRecord,
    Transcript,
    TranscriptSegment,
    assemble_bank,
    compile_bank,
    find_candidate_points,
    generate_question,
    parse_transcript,
    rate_difficulty,
    validate_bank,
)
from .policy import (
    BlendConfig,
    DecisionTrace,
    PolicyConfigs,
    PolicyState,
    apply_mask,
    blend,
    blend_weight,
    choose_difficulty,
    step,
)
from .session import Session, SessionConfig, SessionStore, create_session, replay
from .sim import EpisodeConfig, SimMetrics, SyntheticLearner, compare_policies, run_episode
from .summary import (
    LearnerProfile,
    SummaryReport,
    classify_concepts,
    compose_summary,
    embed,
    extract_relevant,
    segment_sentences,
)

__version__ = "0.1.0"
