// Client state is a pure fold over server messages. The client never
// advances the phase on its own; the server snapshot is the truth.

import type {
  DiagramJson,
  Phase,
  RevealJson,
  ServerMessage,
  SessionSnapshot,
  UtteranceJson,
} from "./protocol.js";

export interface LiveVote {
  round: number;
  window: number;
  probs: number[];
  voteCounts: number[];
  total: number;
}

export interface ClientState {
  sessionId: string;
  phase: Phase;
  tentative: SessionSnapshot["tentative"];
  confirmed: SessionSnapshot["confirmed"];
  aiPredictions: (number[] | null)[];
  utterances: UtteranceJson[];
  genjimon: DiagramJson | null;
  playerRgs: string;
  liveVote: LiveVote | null;
  reveal: RevealJson | null;
  lastError: string | null;
  seqNo: number;
  connected: boolean;
}

export function initialState(sessionId: string): ClientState {
  return {
    sessionId,
    phase: { kind: "briefing" },
    tentative: null,
    confirmed: [],
    aiPredictions: [null, null, null, null, null],
    utterances: [],
    genjimon: null,
    playerRgs: "",
    liveVote: null,
    reveal: null,
    lastError: null,
    seqNo: -1,
    connected: false,
  };
}

function applySnapshot(state: ClientState, snapshot: SessionSnapshot): ClientState {
  return {
    ...state,
    phase: snapshot.phase,
    tentative: snapshot.tentative,
    confirmed: snapshot.confirmed,
    aiPredictions: snapshot.ai_predictions,
    utterances: snapshot.utterances,
    genjimon: snapshot.genjimon ?? state.genjimon,
    playerRgs: snapshot.player_rgs ?? state.playerRgs,
    reveal: snapshot.reveal ?? state.reveal,
    seqNo: snapshot.seq_no,
    lastError: null,
    // a new smelling phase starts a fresh vote tally
    liveVote: snapshot.phase.kind === "round_smelling" ? null : state.liveVote,
  };
}

export function reduce(state: ClientState, message: ServerMessage): ClientState {
  switch (message.type) {
    case "phase":
      return applySnapshot(state, message.payload as unknown as SessionSnapshot);
    case "genjimon": {
      const payload = message.payload as { rgs: string; diagram: DiagramJson };
      return { ...state, genjimon: payload.diagram, playerRgs: payload.rgs };
    }
    case "prediction_update": {
      const payload = message.payload as {
        round: number;
        window: number;
        probs: number[];
        vote_counts: number[];
        total: number;
      };
      return {
        ...state,
        liveVote: {
          round: payload.round,
          window: payload.window,
          probs: payload.probs,
          voteCounts: payload.vote_counts,
          total: payload.total,
        },
      };
    }
    case "utterance":
      return {
        ...state,
        utterances: [...state.utterances, message.payload as unknown as UtteranceJson],
      };
    case "reveal":
      return { ...state, reveal: message.payload as unknown as RevealJson };
    case "error":
      return { ...state, lastError: String(message.payload.message ?? "error") };
    default:
      return state;
  }
}

export function currentRound(state: ClientState): number | null {
  const kind = state.phase.kind;
  if (kind.startsWith("round_")) return state.phase.round ?? null;
  return null;
}
