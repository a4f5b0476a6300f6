/**
 * Wire types for the haarshift game service.
 *
 * These mirror the server's JSON exactly; the client adds nothing and
 * derives nothing — every count, margin and verdict rendered in the UI is a
 * field from one of these payloads.
 */

export interface EtaWire {
  num: number;
  den: number;
}

export interface MemberWire {
  j: number;
  k: number;
  colour: number | null;
}

export interface GameStateWire {
  stage: number;
  j: number;
  d: number;
  eta: EtaWire;
  members: MemberWire[];
  pending: number[];
  status: GameStatus;
  detail: string | null;
}

export type GameStatus =
  | "awaiting-A"
  | "awaiting-B"
  | "A-wins"
  | "B-wins"
  | "undecided";

/**
 * One occupied testing interval of the coloured board: total count, per
 * colour counts, which homogeneity condition applies, and the margins
 * (min count, max count, eta * max) the server compared against.
 */
export interface TestingRowWire {
  j: number;
  k: number;
  rho: number;
  rho_i: number[];
  condition: "distinct" | "balanced";
  ok: boolean;
  min_i: number;
  max_i: number;
  eta_max: EtaWire;
}

export interface SessionPayload {
  id: string;
  state: GameStateWire;
  created: string;
  updated: string;
  testing?: TestingRowWire[];
}

export type MoveReply =
  | { status: GameStatus; method: string; colouring: MemberWire[] }
  | { status: GameStatus; detail: string | null };

export interface MoveResponse extends SessionPayload {
  reply: MoveReply;
}

export interface GameListPayload {
  games: string[];
}

export type HintPayload =
  | {
      undecided: false;
      count: number;
      required: number;
      cap: number;
      positions: number[];
    }
  | {
      undecided: true;
      required: number;
      cap: number;
      positions: number[];
      detail?: string;
    };

export interface ErrorPayload {
  error: { code: string; message: string };
}

export function isEngineColouring(
  reply: MoveReply,
): reply is { status: GameStatus; method: string; colouring: MemberWire[] } {
  return "colouring" in reply;
}
