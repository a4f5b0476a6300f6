/**
 * DOM renderer for a BoardViewModel.
 *
 * Renders exactly what the model carries — the level-j cell row, the
 * testing-interval table with per-colour counts and margin indicators, the
 * engine's last reply, and the terminal banner.  All interaction is
 * delegated through callbacks; the renderer holds no game state of its own.
 */

import { BoardCell, BoardViewModel, TestingRowView } from "./model";

const COLOUR_PALETTE = [
  "#e6e6e6", // uncoloured
  "#4e79a7",
  "#f28e2b",
  "#59a14f",
  "#e15759",
  "#b07aa1",
  "#76b7b2",
  "#edc948",
  "#ff9da7",
];

export class BoardRenderer {
  private _root: HTMLElement;
  private _onCellClick: ((k: number) => void) | null;

  constructor(root: HTMLElement) {
    this._root = root;
    this._onCellClick = null;
  }

  setCellClickHandler(callback: (k: number) => void) {
    this._onCellClick = callback;
  }

  render(model: BoardViewModel) {
    this._root.replaceChildren(
      this._header(model),
      this._bannerRow(model),
      this._cellRow(model),
      this._basketRow(model),
      this._testingTable(model),
    );
  }

  private _header(model: BoardViewModel): HTMLElement {
    const header = document.createElement("div");
    header.className = "board-header";
    const title = document.createElement("strong");
    title.textContent = `game ${model.id}`;
    const facts = document.createElement("span");
    facts.className = "board-facts";
    facts.textContent =
      ` level ${model.level}, d = ${model.d}, eta = ${model.etaLabel}` +
      ` — status: ${model.status}`;
    header.append(title, facts);
    return header;
  }

  private _bannerRow(model: BoardViewModel): HTMLElement {
    const banner = document.createElement("div");
    banner.className = "board-banner";
    if (model.banner !== null) {
      banner.classList.add(`banner-${model.status}`);
      banner.textContent = model.detail
        ? `${model.banner} — ${model.detail}`
        : model.banner;
    } else if (model.replyMethod !== null) {
      banner.classList.add("banner-reply");
      banner.textContent = `B replied (${model.replyMethod})`;
    }
    return banner;
  }

  private _cellRow(model: BoardViewModel): HTMLElement {
    const row = document.createElement("div");
    row.className = "cell-row";
    for (const cell of model.cells) {
      row.appendChild(this._cell(cell));
    }
    return row;
  }

  private _cell(cell: BoardCell): HTMLElement {
    const box = document.createElement("button");
    box.type = "button";
    box.className = "cell";
    box.dataset.k = String(cell.k);
    if (cell.colour !== null) {
      box.style.background = COLOUR_PALETTE[cell.colour % COLOUR_PALETTE.length];
      box.classList.add("coloured");
      box.textContent = String(cell.colour);
    } else if (cell.pending) {
      box.classList.add("pending");
      box.textContent = "?";
    } else {
      box.textContent = "";
    }
    if (cell.inBasket) {
      box.classList.add("in-basket");
    }
    if (cell.justColoured) {
      box.classList.add("just-coloured");
    }
    box.disabled = !cell.selectable;
    box.title = `k = ${cell.k}`;
    box.addEventListener("click", () => {
      if (this._onCellClick) {
        this._onCellClick(cell.k);
      }
    });
    return box;
  }

  private _basketRow(model: BoardViewModel): HTMLElement {
    const row = document.createElement("div");
    row.className = "basket-row";
    row.textContent = model.basket.length
      ? `move basket: ${model.basket.join(", ")}`
      : "move basket: empty";
    return row;
  }

  private _testingTable(model: BoardViewModel): HTMLElement {
    const table = document.createElement("table");
    table.className = "testing-table";
    const head = table.createTHead().insertRow();
    for (const name of [
      "L",
      "rho",
      "per colour",
      "condition",
      "min_i",
      "max_i",
      "eta*max",
      "ok",
    ]) {
      const cell = document.createElement("th");
      cell.textContent = name;
      head.appendChild(cell);
    }
    const body = table.createTBody();
    for (const row of model.testing) {
      body.appendChild(this._testingRow(row));
    }
    return table;
  }

  private _testingRow(row: TestingRowView): HTMLTableRowElement {
    const tr = document.createElement("tr");
    tr.className = row.ok ? "testing-ok" : "testing-bad";
    const cells = [
      row.label,
      String(row.rho),
      row.rhoI.join(" | "),
      row.condition,
      String(row.minI),
      String(row.maxI),
      row.etaMaxLabel,
      row.ok ? "yes" : "no",
    ];
    for (const text of cells) {
      const td = document.createElement("td");
      td.textContent = text;
      tr.appendChild(td);
    }
    return tr;
  }
}
