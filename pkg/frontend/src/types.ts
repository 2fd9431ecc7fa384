// Payload shapes of the session service API.

export type DifficultyLabel = 'easy' | 'medium' | 'hard';

export interface Progress {
  answered: number;
  planned: number;
}

export interface ServedQuestion {
  question_id: string;
  q: string;
  options: string[];
  d: DifficultyLabel;
  difficulty: DifficultyLabel;
  t: number;
  c: string;
  time_limit: number;
  fallback: boolean;
  progress: Progress;
}

export interface RewardBreakdown {
  r_acc: number;
  r_time: number;
  r_prog: number;
  r_mom: number;
  total: number;
}

export interface LearnerSnapshot {
  skill?: number;
  recent_accuracy?: number;
  norm_response_time?: number;
  streak_momentum?: number;
  learning_velocity?: number;
  confidence?: number;
  correct_streak?: number;
  answered_count?: number;
}

export interface AnswerResult {
  correct: boolean;
  correct_index: number;
  reward: RewardBreakdown;
  new_level: DifficultyLabel;
  state: LearnerSnapshot;
  status: 'active' | 'ended';
  progress: Progress;
}

export interface DecisionTracePayload {
  w?: number;
  sampled?: DifficultyLabel;
  [key: string]: unknown;
}

export interface SessionStatePayload {
  session_id?: string;
  status?: string;
  learner?: LearnerSnapshot;
  ladder?: { current_level?: DifficultyLabel };
  trace?: DecisionTracePayload | null;
  progress?: Progress;
}

export interface SummarySection {
  concept: string;
  excerpts: string[];
}

export interface SummaryPayload {
  mastered: SummarySection[];
  discovery: SummarySection[];
  tailored_examples: string[];
  rendered: string;
}

export interface SessionRequest {
  bank_id: string;
  learner_id: string;
  interests: string[];
  planned_questions?: number;
  rng_seed?: number;
}
