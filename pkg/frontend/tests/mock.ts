// In-memory service double for controller tests.

import { ApiError, type ApiClient } from '../src/api.js';
import type { Clock } from '../src/clock.js';
import type {
  AnswerResult,
  DifficultyLabel,
  ServedQuestion,
  SessionRequest,
  SessionStatePayload,
  SummaryPayload,
} from '../src/types.js';

export class FakeClock implements Clock {
  private t = 0;

  now(): number {
    return this.t;
  }

  advance(ms: number): void {
    this.t += ms;
  }
}

export interface MockQuestion {
  stem: string;
  options: string[];
  correctIndex: number;
  difficulty: DifficultyLabel;
}

const DEFAULT_SUMMARY: SummaryPayload = {
  mastered: [{ concept: 'entropy', excerpts: ['Entropy measures disorder.'] }],
  discovery: [{ concept: 'enthalpy', excerpts: [] }],
  tailored_examples: ['For example, ice melting absorbs heat.'],
  rendered: 'Territory Mastered\n...\nDiscovery Zone\n...',
};

export class MockService implements ApiClient {
  submitCalls: Array<{ question_id: string; choice: number; response_time: number }> = [];
  nextCalls = 0;
  stateCalls = 0;
  failNextCreate: ApiError | null = null;
  failNextSubmit: ApiError | null = null;

  private served = 0;
  private answered = 0;
  private pending: string | null = null;
  private ended = false;

  constructor(
    public questions: MockQuestion[] = [
      { stem: 'What is entropy?', options: ['disorder', 'order'], correctIndex: 0, difficulty: 'easy' },
      { stem: 'Why does heat flow?', options: ['gradients', 'magic'], correctIndex: 0, difficulty: 'medium' },
      { stem: 'Predict the final state.', options: ['equilibrium', 'chaos'], correctIndex: 0, difficulty: 'hard' },
    ],
    public summaryPayload: SummaryPayload = DEFAULT_SUMMARY,
  ) {}

  async createSession(request: SessionRequest): Promise<{ session_id: string }> {
    if (this.failNextCreate) {
      const err = this.failNextCreate;
      this.failNextCreate = null;
      throw err;
    }
    void request;
    return { session_id: 'mock-session' };
  }

  async nextQuestion(): Promise<ServedQuestion> {
    this.nextCalls += 1;
    if (this.ended || this.served >= this.questions.length) {
      this.ended = true;
      throw new ApiError('session_ended', 'session has ended', 409);
    }
    if (this.pending !== null) {
      throw new ApiError('question_pending', 'a question is pending', 409);
    }
    const q = this.questions[this.served];
    const id = `q${this.served}`;
    this.pending = id;
    this.served += 1;
    return {
      question_id: id,
      q: q.stem,
      options: q.options,
      d: q.difficulty,
      difficulty: q.difficulty,
      t: 12.5 * this.served,
      c: 'context for ' + q.stem,
      time_limit: 30,
      fallback: false,
      progress: { answered: this.answered, planned: this.questions.length },
    };
  }

  async submitAnswer(
    _sessionId: string,
    body: { question_id: string; choice: number; response_time: number },
  ): Promise<AnswerResult> {
    if (this.failNextSubmit) {
      // conflict means someone else already answered the pending question:
      // the server consumed it, this call changes nothing
      const err = this.failNextSubmit;
      this.failNextSubmit = null;
      if (err.code === 'answer_conflict' && this.pending !== null) {
        this.pending = null;
        this.answered += 1;
        if (this.answered >= this.questions.length) {
          this.ended = true;
        }
      }
      throw err;
    }
    if (this.pending === null || body.question_id !== this.pending) {
      throw new ApiError('answer_conflict', 'no matching pending question', 409);
    }
    this.submitCalls.push(body);
    const q = this.questions[Number(body.question_id.slice(1))];
    this.pending = null;
    this.answered += 1;
    if (this.answered >= this.questions.length) {
      this.ended = true;
    }
    const correct = body.choice === q.correctIndex;
    return {
      correct,
      correct_index: q.correctIndex,
      reward: { r_acc: correct ? 1 : -0.5, r_time: 0.1, r_prog: 0, r_mom: 0.02, total: correct ? 1.12 : -0.5 },
      new_level: q.difficulty,
      state: { skill: 0.2, recent_accuracy: 0.8, correct_streak: correct ? 1 : 0, answered_count: this.answered },
      status: this.ended ? 'ended' : 'active',
      progress: { answered: this.answered, planned: this.questions.length },
    };
  }

  async sessionState(): Promise<SessionStatePayload> {
    this.stateCalls += 1;
    return {
      status: this.ended ? 'ended' : 'active',
      learner: { skill: 0.2, recent_accuracy: 0.8, correct_streak: 1 },
      ladder: { current_level: 'easy' },
      trace: { w: 0.2 },
      progress: { answered: this.answered, planned: this.questions.length },
    };
  }

  async summary(): Promise<SummaryPayload> {
    if (!this.ended) {
      throw new ApiError('session_active', 'summary requires an ended session', 409);
    }
    return this.summaryPayload;
  }
}
