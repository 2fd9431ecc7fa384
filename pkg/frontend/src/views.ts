// Pure render functions: SessionView in, HTML string out. No state, no fetch.

import type { SessionView } from './controller.js';
import type { DifficultyLabel, SessionStatePayload, SummaryPayload } from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function formatTimestamp(seconds: number): string {
  const m = Math.floor(seconds / 60);
  const s = Math.floor(seconds % 60);
  return `${m}:${String(s).padStart(2, '0')}`;
}

const LEVEL_BARS: Record<DifficultyLabel, string> = { easy: '▁', medium: '▄', hard: '█' };

export function renderSparkline(levels: DifficultyLabel[]): string {
  return levels.map((level) => LEVEL_BARS[level] ?? '·').join('');
}

export function renderErrorBanner(view: SessionView): string {
  if (!view.error) {
    return '';
  }
  return (
    `<div class="banner" role="alert">` +
    `<span>[${escapeHtml(view.error.code)}] ${escapeHtml(view.error.message)}</span>` +
    `<button data-action="dismiss">×</button></div>`
  );
}

export function renderProgress(view: SessionView): string {
  if (!view.progress) {
    return '';
  }
  return `<div class="progress">Question ${view.progress.answered}/${view.progress.planned}</div>`;
}

// The badge text comes verbatim from the served payload; the client never
// infers difficulty on its own.
export function renderQuestion(view: SessionView, timeRemaining: number | null): string {
  const question = view.question;
  if (!question) {
    return '';
  }
  const disabled = view.phase === 'submitting' ? ' disabled' : '';
  const options = question.options
    .map(
      (option, i) =>
        `<button class="option" data-choice="${i}"${disabled}>${escapeHtml(option)}</button>`,
    )
    .join('');
  const timer =
    timeRemaining === null ? '' : `<span class="timer">${Math.ceil(timeRemaining)}s</span>`;
  const streak = view.streak > 0 ? `<span class="streak">${'🔥'.repeat(Math.min(view.streak, 5))}</span>` : '';
  return (
    `<div class="question">` +
    `<div class="meta">` +
    `<span class="badge badge-${question.difficulty}">${escapeHtml(question.difficulty)}</span>` +
    `<span class="at">lecture ${formatTimestamp(question.t)}</span>` +
    `${timer}${streak}</div>` +
    `<p class="stem">${escapeHtml(question.q)}</p>` +
    `<div class="options">${options}</div>` +
    `<p class="context">${escapeHtml(question.c)}</p>` +
    `</div>`
  );
}

export function renderFeedback(view: SessionView): string {
  const feedback = view.feedback;
  if (!feedback) {
    return '';
  }
  const verdict = feedback.correct ? 'Correct!' : 'Incorrect.';
  return (
    `<div class="feedback ${feedback.correct ? 'good' : 'bad'}">` +
    `<p>${verdict} Reward ${feedback.rewardTotal.toFixed(2)}. ` +
    `Level: <span class="badge badge-${feedback.newLevel}">${feedback.newLevel}</span></p>` +
    `<div class="sparkline">${renderSparkline(view.levelHistory)}</div>` +
    `<button data-action="continue">Continue</button>` +
    `</div>`
  );
}

// Badges degrade gracefully: any missing field just hides its badge.
export function renderStateBadges(state: SessionStatePayload | null): string {
  if (!state) {
    return '';
  }
  const parts: string[] = [];
  const learner = state.learner ?? {};
  if (typeof learner.skill === 'number') {
    const pct = Math.round(((learner.skill + 3) / 6) * 100);
    parts.push(`<span class="gauge" title="skill">skill ${learner.skill.toFixed(2)} (${pct}%)</span>`);
  }
  if (typeof learner.recent_accuracy === 'number') {
    parts.push(`<span title="recent accuracy">acc ${(learner.recent_accuracy * 100).toFixed(0)}%</span>`);
  }
  if (typeof learner.correct_streak === 'number' && learner.correct_streak > 0) {
    parts.push(`<span title="streak">${'🔥'.repeat(Math.min(learner.correct_streak, 5))}</span>`);
  }
  const w = state.trace?.w;
  if (typeof w === 'number') {
    parts.push(`<span class="blend" title="blend weight">w ${w.toFixed(2)}</span>`);
  }
  if (parts.length === 0) {
    return '';
  }
  return `<div class="badges">${parts.join(' ')}</div>`;
}

// Section headers are rendered exactly as the report names them.
export function renderSummary(summary: SummaryPayload | null): string {
  if (!summary) {
    return '';
  }
  const section = (title: string, items: { concept: string; excerpts: string[] }[]) => {
    const body =
      items.length === 0
        ? '<p class="empty">(nothing here)</p>'
        : items
            .map(
              (item) =>
                `<li><strong>${escapeHtml(item.concept)}</strong>` +
                item.excerpts.map((e) => `<p class="excerpt">${escapeHtml(e)}</p>`).join('') +
                `</li>`,
            )
            .join('');
    return `<section><h2>${escapeHtml(title)}</h2><ul>${body}</ul></section>`;
  };
  const examples =
    summary.tailored_examples.length === 0
      ? ''
      : `<section><h2>Examples for You</h2><ul>` +
        summary.tailored_examples.map((e) => `<li>${escapeHtml(e)}</li>`).join('') +
        `</ul></section>`;
  return (
    `<div class="summary">` +
    section('Territory Mastered', summary.mastered) +
    section('Discovery Zone', summary.discovery) +
    examples +
    `</div>`
  );
}

export function renderApp(view: SessionView, timeRemaining: number | null): string {
  const banner = renderErrorBanner(view);
  switch (view.phase) {
    case 'idle':
      return banner + '<p class="idle">Start a session to begin.</p>';
    case 'question':
    case 'submitting':
      return banner + renderProgress(view) + renderQuestion(view, timeRemaining) + renderStateBadges(view.badges);
    case 'feedback':
      return banner + renderProgress(view) + renderFeedback(view) + renderStateBadges(view.badges);
    case 'summary':
      return banner + renderSummary(view.summary);
  }
}
