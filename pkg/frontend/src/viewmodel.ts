// Console view model: a pure reducer over the gateway event stream.
//
// Everything rendered comes from gateway payloads; the console computes no
// physics of its own.  Sequence bookkeeping detects stream anomalies
// (duplicates or gaps) so reconnect handling can be verified.

import type { GatewayEvent, PlanPackage, PlanTab, WorldDigest } from './types.js';

const TRACK_LIMIT = 2000;

export class ConsoleViewModel {
  lastSeq = -1;
  gaps: number[] = [];
  duplicates: number[] = [];
  eventCount = 0;

  phase = 'Idle';
  telemetry: WorldDigest | null = null;
  plan: PlanPackage | null = null;
  activeTab: PlanTab = 'summary';
  missionResult: Record<string, unknown> | null = null;
  notices: string[] = [];
  tracks: Record<string, [number, number][]> = {};

  /** decision buttons are live only while a proposal awaits the operator */
  get decisionEnabled(): boolean {
    return (this.phase === 'Proposed' || this.phase === 'Replanning')
      && this.missionResult === null;
  }

  apply(ev: GatewayEvent): void {
    if (ev.seq <= this.lastSeq) {
      this.duplicates.push(ev.seq);
      return;
    }
    if (this.lastSeq >= 0 && ev.seq !== this.lastSeq + 1) {
      this.gaps.push(ev.seq);
    }
    this.lastSeq = ev.seq;
    this.eventCount += 1;

    switch (ev.kind) {
      case 'PhaseChange': {
        this.phase = String(ev.payload.phase ?? this.phase);
        break;
      }
      case 'PlanProposed': {
        const pkg = ev.payload.package as PlanPackage | undefined;
        if (pkg) this.plan = pkg;
        break;
      }
      case 'Telemetry': {
        if ('uavs' in ev.payload) {
          this.telemetry = ev.payload as unknown as WorldDigest;
          for (const [uav, d] of Object.entries(this.telemetry.uavs)) {
            const track = (this.tracks[uav] ??= []);
            track.push([d.position[0], d.position[1]]);
            if (track.length > TRACK_LIMIT) track.shift();
          }
        } else if ('event' in ev.payload) {
          this.notices.push(JSON.stringify(ev.payload));
        }
        break;
      }
      case 'Decision': {
        this.notices.push(
          `operator ${String(ev.payload.decision)} ${String(ev.payload.feedback ?? '')}`.trim(),
        );
        break;
      }
      case 'MissionEnd': {
        this.missionResult = (ev.payload.result ?? ev.payload) as Record<string, unknown>;
        break;
      }
    }
  }

  selectTab(tab: PlanTab): void {
    this.activeTab = tab;
  }

  /** content for the active plan pane tab (CoT text loads on demand) */
  planPane(): string {
    if (!this.plan) return 'no plan proposed yet';
    if (this.activeTab === 'summary') return this.plan.summary;
    if (this.activeTab === 'cot') {
      return this.plan.cot_trace.map((s) => `${s.kind}: ${s.detail}`).join('\n');
    }
    return JSON.stringify(this.plan.program, null, 2);
  }
}
