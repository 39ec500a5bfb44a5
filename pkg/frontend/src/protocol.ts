// Wire protocol: mirrors docs/protocol.json, which both sides test against.

export const PROTOCOL_VERSION = 1;

export const CLIENT_TYPES = [
  "start_calibration",
  "calibration_next",
  "done_smelling",
  "propose_judgment",
  "revise_judgment",
  "confirm_judgment",
  "request_dialogue",
  "acknowledge_reveal",
] as const;

export const SERVER_TYPES = [
  "phase",
  "genjimon",
  "prediction_update",
  "utterance",
  "reveal",
  "error",
] as const;

export type ClientType = (typeof CLIENT_TYPES)[number];
export type ServerType = (typeof SERVER_TYPES)[number];

// a judgment is "new" or the 1-based prior round it matches
export type JudgmentJson = "new" | number;

export interface Phase {
  kind: string;
  round?: number;
  sample?: number;
}

export interface Segment extends Array<number> {}

export interface DiagramJson {
  rounds: number;
  columns: Record<string, number>;
  segments: number[][];
}

export interface UtteranceJson {
  mode: string;
  text: string;
  round: number | null;
  alignment: string | null;
  retrieved_doc_ids: string[];
  audio_url: string | null;
}

export interface ScoreJson {
  pair_matches: number;
  pair_total: number;
  rand_index: number;
  exact: boolean;
}

export interface PairJson {
  i: number;
  j: number;
  player_same: boolean;
  truth_same: boolean;
  agree: boolean;
}

export interface RevealJson {
  player_rgs: string;
  truth_rgs: string;
  player_diagram: DiagramJson;
  truth_diagram: DiagramJson;
  score: ScoreJson;
  pairs: PairJson[];
}

export interface SessionSnapshot {
  session_id: string;
  phase: Phase;
  tentative: JudgmentJson | null;
  confirmed: JudgmentJson[];
  ai_predictions: (number[] | null)[];
  utterances: UtteranceJson[];
  seq_no: number;
  genjimon?: DiagramJson;
  player_rgs?: string;
  reveal?: RevealJson;
}

export interface ServerMessage {
  v: number;
  type: ServerType;
  session_id: string;
  seq_no: number;
  payload: Record<string, unknown>;
}

export interface ClientMessage {
  v: number;
  type: ClientType;
  payload?: Record<string, unknown>;
}

export function clientMessage(
  type: ClientType,
  payload?: Record<string, unknown>,
): ClientMessage {
  const message: ClientMessage = { v: PROTOCOL_VERSION, type };
  if (payload !== undefined) message.payload = payload;
  return message;
}

export function isServerMessage(value: unknown): value is ServerMessage {
  if (typeof value !== "object" || value === null) return false;
  const msg = value as Record<string, unknown>;
  return (
    msg.v === PROTOCOL_VERSION &&
    typeof msg.type === "string" &&
    (SERVER_TYPES as readonly string[]).includes(msg.type) &&
    typeof msg.payload === "object"
  );
}
