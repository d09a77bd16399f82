// Gateway REST + event-stream client.
//
// The event stream uses fetch-based server-sent events with automatic
// reconnection from the last seen cursor, so a dropped connection never
// produces gaps or duplicates for the consumer.

import type { GatewayEvent, PlanPackage, SessionState } from './types.js';

export interface StreamHandle {
  stop(): void;
  /** test hook: kill the in-flight connection; the client reconnects */
  forceReconnect(): void;
  done: Promise<void>;
}

export class GatewayClient {
  constructor(
    private base: string,
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const resp = await this.fetchImpl(`${this.base}${path}`, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const detail = (body as { detail?: string }).detail ?? resp.statusText;
      throw new GatewayError(resp.status, String(detail));
    }
    return body;
  }

  createSession(config: Record<string, unknown> = {}): Promise<{ session_id: string }> {
    return this.request('/sessions', {
      method: 'POST',
      body: JSON.stringify(config),
    }) as Promise<{ session_id: string }>;
  }

  state(sessionId: string): Promise<SessionState> {
    return this.request(`/sessions/${sessionId}/state`) as Promise<SessionState>;
  }

  submitIntent(
    sessionId: string,
    utterance: string,
    annotations: unknown[] = [],
  ): Promise<unknown> {
    return this.request(`/sessions/${sessionId}/intent`, {
      method: 'POST',
      body: JSON.stringify({ utterance, annotations }),
    });
  }

  plan(sessionId: string): Promise<PlanPackage> {
    return this.request(`/sessions/${sessionId}/plan`) as Promise<PlanPackage>;
  }

  decide(sessionId: string, decision: 'approve' | 'reject', feedback = ''): Promise<unknown> {
    return this.request(`/sessions/${sessionId}/decision`, {
      method: 'POST',
      body: JSON.stringify({ decision, feedback }),
    });
  }

  /**
   * Subscribe to the session event stream starting at `fromSeq`.
   * Events arrive strictly in order; reconnections resume from the cursor.
   */
  streamEvents(
    sessionId: string,
    fromSeq: number,
    onEvent: (ev: GatewayEvent) => void,
  ): StreamHandle {
    let cursor = fromSeq;
    let stopped = false;
    let controller: AbortController | null = null;

    const run = async (): Promise<void> => {
      while (!stopped) {
        controller = new AbortController();
        try {
          const resp = await this.fetchImpl(
            `${this.base}/sessions/${sessionId}/events?from_seq=${cursor}`,
            { signal: controller.signal },
          );
          if (!resp.ok || !resp.body) throw new Error(`stream HTTP ${resp.status}`);
          const reader = resp.body.getReader();
          const decoder = new TextDecoder();
          let buf = '';
          for (;;) {
            const { value, done } = await reader.read();
            if (done) break;
            buf += decoder.decode(value, { stream: true });
            let idx;
            while ((idx = buf.indexOf('\n\n')) >= 0) {
              const frame = buf.slice(0, idx);
              buf = buf.slice(idx + 2);
              const data = frame
                .split('\n')
                .filter((l) => l.startsWith('data: '))
                .map((l) => l.slice(6))
                .join('');
              if (!data) continue;
              const ev = JSON.parse(data) as GatewayEvent;
              if (ev.seq < cursor) continue; // replayed duplicate
              cursor = ev.seq + 1;
              onEvent(ev);
              if (ev.kind === 'MissionEnd') return;
            }
          }
          // stream closed by the server without MissionEnd: reconnect
        } catch (err) {
          if (stopped) return;
          // connection dropped: brief backoff, then resume from cursor
          await new Promise((r) => setTimeout(r, 50));
        }
      }
    };

    const done = run();
    return {
      stop() {
        stopped = true;
        controller?.abort();
      },
      forceReconnect() {
        controller?.abort();
      },
      done,
    };
  }
}

export class GatewayError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
  }
}
