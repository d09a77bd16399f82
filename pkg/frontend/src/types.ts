export interface GatewayEvent {
  session_id: string;
  seq: number;
  kind: 'Telemetry' | 'PlanProposed' | 'Decision' | 'PhaseChange' | 'MissionEnd';
  payload: Record<string, unknown>;
}

export interface UavDigest {
  position: [number, number, number];
  velocity: [number, number, number];
  status: string;
  instruction_index: number;
}

export interface SemanticObjectDigest {
  object_id: string;
  class: string;
  coordinates: [number, number, number];
  attributes: Record<string, unknown>;
}

export interface WorldDigest {
  time: number;
  uavs: Record<string, UavDigest>;
  mapped_pct: number;
  searched_pct: number;
  detections: { survivor_id: string; time: number; position: [number, number] }[];
  active_wind_zones: string[];
  objects: SemanticObjectDigest[];
  zone: { center: [number, number]; radius: number };
}

export interface CotStep {
  kind: string;
  detail: string;
}

export interface PlanPackage {
  schema_version: number;
  summary: string;
  cot_trace: CotStep[];
  task_tree: unknown;
  plan_seq: { units: unknown[]; edges: unknown[] };
  program: { uavs: Record<string, unknown[]>; no_fly: unknown[] };
  leaf_fragments: Record<string, string[]>;
}

export interface SessionState {
  session_id: string;
  phase: string;
  world: WorldDigest;
  constraints: {
    kind: string;
    geometry: Record<string, number | string> | null;
    text: string;
  }[];
}

export type PlanTab = 'summary' | 'cot' | 'code';
