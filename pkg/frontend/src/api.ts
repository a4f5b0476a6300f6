/**
 * Thin fetch client for the haarshift game service.
 *
 * One configuration point (the service URL), one method per endpoint, no
 * interpretation: responses come back as the server's JSON, and service
 * errors are rethrown verbatim as ServiceError so the UI can surface the
 * code and message unchanged.
 */

import {
  EtaWire,
  GameListPayload,
  HintPayload,
  MoveResponse,
  SessionPayload,
} from "./types";

export class ServiceError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ServiceError";
    this.status = status;
    this.code = code;
  }
}

export interface NewGameRequest {
  j: number;
  d: number;
  eta: EtaWire;
  initial: { k: number; colour: number }[];
}

export class GameService {
  private _base: string;

  constructor(serviceUrl: string) {
    this._base = serviceUrl.replace(/\/+$/, "");
  }

  get serviceUrl(): string {
    return this._base;
  }

  async health(): Promise<{ ok: boolean; sessions: number }> {
    return this._request("GET", "/health");
  }

  async createGame(request: NewGameRequest): Promise<SessionPayload> {
    return this._request("POST", "/games", request);
  }

  async listGames(): Promise<GameListPayload> {
    return this._request("GET", "/games");
  }

  async getGame(id: string): Promise<SessionPayload> {
    return this._request("GET", `/games/${encodeURIComponent(id)}`);
  }

  async submitMove(id: string, add: number[]): Promise<MoveResponse> {
    return this._request("POST", `/games/${encodeURIComponent(id)}/moves`, {
      add,
    });
  }

  async hint(id: string, add?: number[]): Promise<HintPayload> {
    const query = add && add.length ? `?add=${add.join(",")}` : "";
    return this._request(
      "GET",
      `/games/${encodeURIComponent(id)}/hint${query}`,
    );
  }

  private async _request(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<any> {
    let response: Response;
    try {
      response = await fetch(this._base + path, {
        method,
        headers: body === undefined ? {} : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ServiceError(0, "unreachable", String(err));
    }
    const payload = await response.json().catch(() => null);
    if (!response.ok) {
      const error = payload && payload.error ? payload.error : null;
      throw new ServiceError(
        response.status,
        error ? error.code : "unknown",
        error ? error.message : `HTTP ${response.status}`,
      );
    }
    return payload;
  }
}
