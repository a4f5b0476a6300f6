/**
 * Session controller: one active game per tab, rendered strictly from
 * confirmed server state.
 *
 * Every render happens after a server response arrives; there are no
 * optimistic updates.  Errors from the service are shown verbatim (code and
 * message) next to a retry button that re-issues the failed request.
 */

import { GameService, ServiceError } from "./api";
import { BoardRenderer } from "./board";
import { buildBoardView, toggleBasket } from "./model";
import { HintPayload, MoveReply, SessionPayload } from "./types";

export class App {
  private _service: GameService;
  private _renderer: BoardRenderer;
  private _statusLine: HTMLElement;
  private _hintLine: HTMLElement;
  private _session: SessionPayload | null;
  private _basket: number[];
  private _lastReply: MoveReply | null;

  constructor(boardRoot: HTMLElement, statusLine: HTMLElement, hintLine: HTMLElement,
              serviceUrl: string) {
    this._service = new GameService(serviceUrl);
    this._renderer = new BoardRenderer(boardRoot);
    this._statusLine = statusLine;
    this._hintLine = hintLine;
    this._session = null;
    this._basket = [];
    this._lastReply = null;
    this._renderer.setCellClickHandler((k) => this._onCellClick(k));
  }

  setServiceUrl(url: string) {
    this._service = new GameService(url);
  }

  get canSubmit(): boolean {
    return this._session !== null &&
      this._session.state.status === "awaiting-A" &&
      this._basket.length > 0;
  }

  async newGame(j: number, d: number, eta: { num: number; den: number }) {
    await this._try("create game", async () => {
      const created = await this._service.createGame({ j, d, eta, initial: [] });
      // The creation payload has no diagnostics; fetch the confirmed state.
      this._session = await this._service.getGame(created.id);
      this._basket = [];
      this._lastReply = null;
      this._render();
    });
  }

  async joinGame(id: string) {
    await this._try("join game", async () => {
      this._session = await this._service.getGame(id);
      this._basket = [];
      this._lastReply = null;
      this._render();
    });
  }

  async submitMove() {
    if (this._session === null) {
      return;
    }
    if (!this.canSubmit) {
      // Client-side block: an empty move never reaches the service.
      this._statusLine.textContent = "select at least one uncoloured interval";
      return;
    }
    const id = this._session.id;
    const add = [...this._basket];
    await this._try("submit move", async () => {
      const response = await this._service.submitMove(id, add);
      this._session = response;
      this._lastReply = response.reply;
      this._basket = [];
      this._render();
    });
  }

  async requestHint() {
    if (this._session === null) {
      return;
    }
    const id = this._session.id;
    const positions = this._basket.length ? [...this._basket] : undefined;
    await this._try("hint", async () => {
      const hint = await this._service.hint(id, positions);
      this._hintLine.textContent = describeHint(hint);
    });
  }

  private _onCellClick(k: number) {
    if (this._session === null) {
      return;
    }
    const model = buildBoardView(this._session, this._basket, this._lastReply);
    this._basket = toggleBasket(model, this._basket, k);
    this._render();
  }

  private _render() {
    if (this._session === null) {
      return;
    }
    const model = buildBoardView(this._session, this._basket, this._lastReply);
    this._renderer.render(model);
    this._statusLine.textContent = "";
  }

  private async _try(what: string, action: () => Promise<void>) {
    try {
      await action();
    } catch (err) {
      if (err instanceof ServiceError) {
        this._statusLine.replaceChildren();
        const text = document.createElement("span");
        text.textContent = `${what} failed [${err.code}]: ${err.message} `;
        const retry = document.createElement("button");
        retry.type = "button";
        retry.textContent = "retry";
        retry.addEventListener("click", () => this._try(what, action));
        this._statusLine.append(text, retry);
      } else {
        throw err;
      }
    }
  }
}

export function describeHint(hint: HintPayload): string {
  if (hint.undecided) {
    return `hint undecided: ${hint.required} colourings needed, cap ${hint.cap}`;
  }
  return `valid extensions over [${hint.positions.join(", ")}]: ` +
    `${hint.count} of ${hint.required}`;
}
