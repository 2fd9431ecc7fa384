// Browser glue: wires the controller to the DOM and the real service.

import { HttpApiClient } from './api.js';
import { PerformanceClock } from './clock.js';
import { SessionController } from './controller.js';
import { renderApp } from './views.js';

function mount(): void {
  const root = document.getElementById('app');
  const form = document.getElementById('start-form') as HTMLFormElement | null;
  if (!root || !form) {
    throw new Error('missing #app or #start-form');
  }

  const controller = new SessionController(new HttpApiClient(''), new PerformanceClock());

  const render = () => {
    root.innerHTML = renderApp(controller.view, controller.timeRemaining());
  };
  controller.subscribe(render);
  window.setInterval(() => {
    if (controller.view.phase === 'question') {
      render(); // tick the visible timer
    }
  }, 250);

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const interests = String(data.get('interests') ?? '')
      .split(',')
      .map((tag) => tag.trim())
      .filter(Boolean);
    const planned = Number(data.get('planned_questions'));
    void controller.start(
      String(data.get('bank_id') ?? ''),
      String(data.get('learner_id') ?? 'learner'),
      interests,
      Number.isFinite(planned) && planned > 0 ? planned : undefined,
    );
  });

  root.addEventListener('click', (event) => {
    const target = event.target as HTMLElement;
    const choice = target.getAttribute('data-choice');
    if (choice !== null) {
      void controller.answer(Number(choice));
      return;
    }
    const action = target.getAttribute('data-action');
    if (action === 'continue') {
      void controller.continueSession();
    } else if (action === 'dismiss') {
      controller.dismissError();
    }
  });

  render();
}

document.addEventListener('DOMContentLoaded', mount);
