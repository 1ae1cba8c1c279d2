/** DOM wiring for the labeling console.
 *
 * Keyboard: a = aircraft, c = community, s = skip, n = next, t = toggle
 * raw/normalized view.
 */

import { ApiClient } from './api.js';
import { renderHeatmap, renderLegend } from './heatmap.js';
import { ConsoleController } from './state.js';
import type { ConsoleView } from './state.js';

declare global {
  interface Window {
    NOISENET_API_BASE?: string;
  }
}

const api = new ApiClient(window.NOISENET_API_BASE ?? '');
const labeler = localStorage.getItem('noisenet-labeler') ?? 'console-analyst';
const controller = new ConsoleController(api, labeler);

const el = (id: string) => document.getElementById(id)!;

function renderQueue(view: ConsoleView): void {
  const list = el('queue-list');
  list.innerHTML = '';
  for (const entry of view.entries) {
    const item = document.createElement('li');
    item.className = entry.event_id === view.focusedId ? 'entry focused' : 'entry';
    item.innerHTML =
      `<span class="entry-id">${entry.event_id}</span>` +
      `<span class="entry-entropy">H=${entry.entropy.toFixed(3)}</span>` +
      `<span class="entry-probs">p(air)=${entry.probabilities[0].toFixed(2)}</span>`;
    item.addEventListener('click', () => controller.focus(entry.event_id));
    list.appendChild(item);
  }
  el('pending-count').textContent = String(view.pendingCount);
}

function renderBanner(view: ConsoleView): void {
  el('active-version').textContent = view.activeVersion ?? 'none';
  const remaining = Math.max(0, view.retrainMin - view.newLabels);
  el('retrain-progress').textContent =
    remaining === 0
      ? `ready to retrain (${view.newLabels} new labels)`
      : `${view.newLabels}/${view.retrainMin} new labels (${remaining} to go)`;
  el('status-line').textContent = view.statusMessage;
}

function renderMatrixPanel(view: ConsoleView): void {
  const panel = el('matrix-panel');
  const retry = el('matrix-retry');
  const canvas = el('heatmap') as HTMLCanvasElement;
  const legend = el('legend') as HTMLCanvasElement;
  if (view.matrixError !== null) {
    panel.classList.add('error');
    retry.hidden = false;
    el('matrix-error-text').textContent = `could not load matrix: ${view.matrixError}`;
    return;
  }
  panel.classList.remove('error');
  retry.hidden = true;
  el('matrix-error-text').textContent = '';
  if (view.matrix === null) {
    el('matrix-title').textContent = 'queue is empty';
    const ctx = canvas.getContext('2d');
    ctx?.clearRect(0, 0, canvas.width, canvas.height);
    return;
  }
  const raw = view.displayMode === 'raw';
  const matrix = raw ? view.matrix.raw_matrix : view.matrix.matrix;
  const pixels = renderHeatmap(canvas, matrix);
  renderLegend(legend, pixels.lo, pixels.hi, raw ? 'dB' : '');
  el('matrix-title').textContent =
    `${view.matrix.event_id} - ${view.matrix.duration_seconds}s - ` +
    `${raw ? 'raw dB' : 'normalized'} view`;
  el('toggle-view').textContent = raw ? 'show normalized' : 'show raw dB';
}

controller.subscribe((view) => {
  renderQueue(view);
  renderBanner(view);
  renderMatrixPanel(view);
});

el('label-aircraft').addEventListener('click', () => void controller.labelFocused('aircraft'));
el('label-community').addEventListener('click', () => void controller.labelFocused('community'));
el('skip').addEventListener('click', () => controller.skip());
el('toggle-view').addEventListener('click', () => controller.toggleDisplayMode());
el('retrain').addEventListener('click', () => void controller.requestRetrain(false));
el('matrix-retry').addEventListener('click', () => void controller.loadFocusedMatrix());
el('refresh').addEventListener('click', () => void controller.refresh());

document.addEventListener('keydown', (event) => {
  if (event.target instanceof HTMLInputElement) return;
  switch (event.key) {
    case 'a':
      void controller.labelFocused('aircraft');
      break;
    case 'c':
      void controller.labelFocused('community');
      break;
    case 's':
      controller.skip();
      break;
    case 'n':
      controller.nextEntry();
      break;
    case 't':
      controller.toggleDisplayMode();
      break;
  }
});

void controller.refresh();
setInterval(() => void controller.refresh(), 30_000);
