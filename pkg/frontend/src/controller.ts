// Session state machine: idle -> question -> submitting -> feedback -> ... -> summary.
//
// The controller owns all session data the views render. It never computes
// difficulty, rewards, or mastery itself; every displayed number comes from a
// service payload. Options are ignored unless the phase is 'question', which
// is what collapses a double click into a single submission.

import { ApiError, type ApiClient } from './api.js';
import type { Clock } from './clock.js';
import type {
  DifficultyLabel,
  Progress,
  ServedQuestion,
  SessionStatePayload,
  SummaryPayload,
} from './types.js';

export type Phase = 'idle' | 'question' | 'submitting' | 'feedback' | 'summary';

export interface Feedback {
  correct: boolean;
  correctIndex: number;
  rewardTotal: number;
  newLevel: DifficultyLabel;
}

export interface ErrorBanner {
  code: string;
  message: string;
}

export interface SessionView {
  phase: Phase;
  sessionId: string | null;
  progress: Progress | null;
  question: ServedQuestion | null;
  feedback: Feedback | null;
  summary: SummaryPayload | null;
  levelHistory: DifficultyLabel[];
  streak: number;
  badges: SessionStatePayload | null;
  error: ErrorBanner | null;
}

function emptyView(): SessionView {
  return {
    phase: 'idle',
    sessionId: null,
    progress: null,
    question: null,
    feedback: null,
    summary: null,
    levelHistory: [],
    streak: 0,
    badges: null,
    error: null,
  };
}

export class SessionController {
  readonly view: SessionView = emptyView();
  private questionShownAt = 0;
  private listeners: Array<(view: SessionView) => void> = [];

  constructor(
    private readonly api: ApiClient,
    private readonly clock: Clock,
  ) {}

  subscribe(listener: (view: SessionView) => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) {
      listener(this.view);
    }
  }

  /** Seconds left on the visible timer; purely presentational. */
  timeRemaining(): number | null {
    if (this.view.phase !== 'question' || !this.view.question) {
      return null;
    }
    const elapsed = (this.clock.now() - this.questionShownAt) / 1000;
    return Math.max(0, this.view.question.time_limit - elapsed);
  }

  async start(bankId: string, learnerId: string, interests: string[], planned?: number): Promise<void> {
    this.view.error = null;
    try {
      const created = await this.api.createSession({
        bank_id: bankId,
        learner_id: learnerId,
        interests,
        ...(planned !== undefined ? { planned_questions: planned } : {}),
      });
      this.view.sessionId = created.session_id;
      await this.fetchNext();
    } catch (error) {
      this.showError(error);
    }
    this.notify();
  }

  /** Submit the clicked option. No-op unless a question is actually showing. */
  async answer(choice: number): Promise<void> {
    if (this.view.phase !== 'question' || !this.view.question || !this.view.sessionId) {
      return;
    }
    const question = this.view.question;
    const responseTime = (this.clock.now() - this.questionShownAt) / 1000;
    this.view.phase = 'submitting';
    this.notify();
    try {
      const result = await this.api.submitAnswer(this.view.sessionId, {
        question_id: question.question_id,
        choice,
        response_time: responseTime,
      });
      this.view.feedback = {
        correct: result.correct,
        correctIndex: result.correct_index,
        rewardTotal: result.reward.total,
        newLevel: result.new_level,
      };
      this.view.streak = result.state.correct_streak ?? 0;
      this.view.levelHistory.push(result.new_level);
      this.view.progress = result.progress;
      await this.refreshBadges();
      if (result.status === 'ended') {
        await this.loadSummary();
      } else {
        this.view.phase = 'feedback';
      }
    } catch (error) {
      if (error instanceof ApiError && error.code === 'answer_conflict') {
        // the server already has an answer for this question; resync, never re-post
        this.showError(error);
        await this.recover();
      } else {
        this.showError(error);
        this.view.phase = 'question';
      }
    }
    this.notify();
  }

  /** Leave the feedback screen for the next question (or the summary). */
  async continueSession(): Promise<void> {
    if (this.view.phase !== 'feedback') {
      return;
    }
    await this.fetchNext();
    this.notify();
  }

  dismissError(): void {
    this.view.error = null;
    this.notify();
  }

  private async fetchNext(): Promise<void> {
    if (!this.view.sessionId) {
      return;
    }
    try {
      const question = await this.api.nextQuestion(this.view.sessionId);
      this.view.question = question;
      this.view.progress = question.progress;
      this.view.feedback = null;
      this.view.phase = 'question';
      this.questionShownAt = this.clock.now();
    } catch (error) {
      if (error instanceof ApiError && error.code === 'session_ended') {
        await this.loadSummary();
      } else {
        this.showError(error);
      }
    }
  }

  private async loadSummary(): Promise<void> {
    if (!this.view.sessionId) {
      return;
    }
    try {
      this.view.summary = await this.api.summary(this.view.sessionId);
      this.view.question = null;
      this.view.phase = 'summary';
    } catch (error) {
      this.showError(error);
    }
  }

  private async recover(): Promise<void> {
    if (!this.view.sessionId) {
      return;
    }
    try {
      const state = await this.api.sessionState(this.view.sessionId);
      if (state.status === 'ended') {
        await this.loadSummary();
      } else {
        await this.fetchNext();
      }
    } catch (error) {
      this.showError(error);
    }
  }

  private async refreshBadges(): Promise<void> {
    if (!this.view.sessionId) {
      return;
    }
    try {
      this.view.badges = await this.api.sessionState(this.view.sessionId);
    } catch {
      this.view.badges = null; // badges are optional decoration
    }
  }

  private showError(error: unknown): void {
    if (error instanceof ApiError) {
      this.view.error = { code: error.code, message: error.message };
    } else {
      this.view.error = { code: 'network', message: String(error) };
    }
  }
}
