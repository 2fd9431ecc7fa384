// Typed client for the session service. Every error becomes an ApiError
// carrying the service's error code so the UI can react per code.

import type {
  AnswerResult,
  ServedQuestion,
  SessionRequest,
  SessionStatePayload,
  SummaryPayload,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export interface ApiClient {
  createSession(request: SessionRequest): Promise<{ session_id: string }>;
  nextQuestion(sessionId: string): Promise<ServedQuestion>;
  submitAnswer(
    sessionId: string,
    body: { question_id: string; choice: number; response_time: number },
  ): Promise<AnswerResult>;
  sessionState(sessionId: string): Promise<SessionStatePayload>;
  summary(sessionId: string): Promise<SummaryPayload>;
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    // fall through to the generic error below
  }
  if (!response.ok) {
    const err = (body as { error?: { code?: string; message?: string } } | null)?.error;
    throw new ApiError(
      err?.code ?? 'http_error',
      err?.message ?? `request failed with status ${response.status}`,
      response.status,
    );
  }
  return body as T;
}

export class HttpApiClient implements ApiClient {
  constructor(private readonly baseUrl: string = '') {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
    return parseOrThrow<T>(response);
  }

  createSession(request: SessionRequest): Promise<{ session_id: string }> {
    return this.request('/sessions', { method: 'POST', body: JSON.stringify(request) });
  }

  nextQuestion(sessionId: string): Promise<ServedQuestion> {
    return this.request(`/sessions/${sessionId}/next`);
  }

  submitAnswer(
    sessionId: string,
    body: { question_id: string; choice: number; response_time: number },
  ): Promise<AnswerResult> {
    return this.request(`/sessions/${sessionId}/answer`, {
      method: 'POST',
      body: JSON.stringify(body),
    });
  }

  sessionState(sessionId: string): Promise<SessionStatePayload> {
    return this.request(`/sessions/${sessionId}/state`);
  }

  summary(sessionId: string): Promise<SummaryPayload> {
    return this.request(`/sessions/${sessionId}/summary`);
  }
}
