// Browser entry point: wires the gateway client, view model, map canvas,
// plan tabs and decision form together.

import { GatewayClient, type StreamHandle } from './client.js';
import { shapeToFeedback, type DrawnShape } from './feedback.js';
import { MapView } from './mapview.js';
import { ConsoleViewModel } from './viewmodel.js';
import type { PlanTab } from './types.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function startConsole(base: string): void {
  const client = new GatewayClient(base);
  const vm = new ConsoleViewModel();
  const canvas = el<HTMLCanvasElement>('map');
  const map = new MapView(canvas, vm);

  let sessionId: string | null = null;
  let stream: StreamHandle | null = null;
  let pendingShape: DrawnShape | null = null;
  let dragStart: [number, number] | null = null;

  const render = () => {
    el('phase').textContent = vm.phase;
    el('pane').textContent = vm.planPane();
    const enabled = vm.decisionEnabled;
    el<HTMLButtonElement>('approve').disabled = !enabled;
    el<HTMLButtonElement>('reject').disabled = !enabled;
    if (vm.telemetry) {
      el('stats').textContent =
        `t=${vm.telemetry.time.toFixed(0)}s  mapped ${vm.telemetry.mapped_pct.toFixed(1)}%` +
        `  searched ${vm.telemetry.searched_pct.toFixed(1)}%` +
        `  found ${vm.telemetry.detections.length}`;
    }
    if (vm.missionResult) {
      el('banner').textContent = `mission ${vm.missionResult.success ? 'SUCCEEDED' : 'FAILED'}: ` +
        JSON.stringify(vm.missionResult);
    }
    map.render(pendingShape);
  };
  setInterval(render, 500); // >= 2 Hz refresh of the live map

  el('connect').addEventListener('click', async () => {
    const created = await client.createSession({
      seed: Number(el<HTMLInputElement>('seed').value || '1'),
      pace: Number(el<HTMLInputElement>('pace').value || '8'),
    });
    sessionId = created.session_id;
    stream?.stop();
    stream = client.streamEvents(sessionId, 0, (ev) => {
      vm.apply(ev);
    });
    el('session').textContent = sessionId;
  });

  el('send-intent').addEventListener('click', async () => {
    if (!sessionId) return;
    await client.submitIntent(sessionId, el<HTMLInputElement>('utterance').value);
  });

  el('approve').addEventListener('click', async () => {
    if (!sessionId) return;
    await client.decide(sessionId, 'approve');
  });

  el('reject').addEventListener('click', async () => {
    if (!sessionId) return;
    let feedback = el<HTMLInputElement>('feedback').value.trim();
    if (pendingShape) {
      feedback = feedback ? `${feedback}; ${shapeToFeedback(pendingShape)}`
        : shapeToFeedback(pendingShape);
    }
    if (!feedback) {
      el('banner').textContent = 'a rejection requires feedback (text or a drawn shape)';
      return;  // mirror of the backend invariant
    }
    await client.decide(sessionId, 'reject', feedback);
    pendingShape = null;
    el<HTMLInputElement>('feedback').value = '';
  });

  for (const tab of ['summary', 'cot', 'code'] as PlanTab[]) {
    el(`tab-${tab}`).addEventListener('click', () => {
      vm.selectTab(tab);
      render();
    });
  }

  // drag on the map to draw a no-fly circle for the next rejection
  canvas.addEventListener('mousedown', (e) => {
    dragStart = map.unproject(e.offsetX, e.offsetY);
  });
  canvas.addEventListener('mousemove', (e) => {
    if (!dragStart) return;
    const [x, y] = map.unproject(e.offsetX, e.offsetY);
    const r = Math.hypot(x - dragStart[0], y - dragStart[1]);
    pendingShape = { shape: 'circle', cx: dragStart[0], cy: dragStart[1], r };
  });
  canvas.addEventListener('mouseup', () => {
    dragStart = null;
  });
}
