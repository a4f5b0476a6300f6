/** Page bootstrap: wire the static form controls to the App controller. */

import { App } from "./app";

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing #${id}`);
  }
  return found as T;
}

function readEta(text: string): { num: number; den: number } {
  const match = text.trim().match(/^(\d+)\s*\/\s*(\d+)$/);
  if (match) {
    return { num: Number(match[1]), den: Number(match[2]) };
  }
  const whole = Number(text.trim());
  if (Number.isInteger(whole) && whole > 0) {
    return { num: whole, den: 1 };
  }
  throw new Error(`eta must be a fraction like 1/2, got "${text}"`);
}

function boot() {
  const serviceInput = element<HTMLInputElement>("service-url");
  const app = new App(
    element("board"),
    element("status-line"),
    element("hint-line"),
    serviceInput.value,
  );
  serviceInput.addEventListener("change", () => {
    app.setServiceUrl(serviceInput.value);
  });
  element<HTMLButtonElement>("new-game").addEventListener("click", () => {
    void app.newGame(
      Number(element<HTMLInputElement>("level").value),
      Number(element<HTMLInputElement>("colours").value),
      readEta(element<HTMLInputElement>("eta").value),
    );
  });
  element<HTMLButtonElement>("join-game").addEventListener("click", () => {
    void app.joinGame(element<HTMLInputElement>("game-id").value.trim());
  });
  element<HTMLButtonElement>("submit-move").addEventListener("click", () => {
    void app.submitMove();
  });
  element<HTMLButtonElement>("request-hint").addEventListener("click", () => {
    void app.requestHint();
  });
}

document.addEventListener("DOMContentLoaded", boot);
