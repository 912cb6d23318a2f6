/** Entry point: wires the store and renderers to the page and polls. */

import { ApiClient } from "./api.js";
import { ConsoleStore } from "./state.js";
import { renderConsole } from "./render.js";

const POLL_MS = 750;

export function mount(root: HTMLElement, api = new ApiClient()): () => void {
  const store = new ConsoleStore(api);
  let disposed = false;

  const redraw = () => {
    root.innerHTML = renderConsole(store.snapshot());
  };

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement | null;
    const button = target?.closest("button");
    if (!button || button.hasAttribute("disabled")) {
      return;
    }
    const sample = button.getAttribute("data-sample");
    if (!sample) {
      return;
    }
    if (button.classList.contains("answer")) {
      const category = button.getAttribute("data-category");
      if (category) {
        void store.submit(sample, category).then(redraw);
      }
    } else if (button.classList.contains("confirm")) {
      const card = store.snapshot().cards.find((c) => c.sample_id === sample);
      if (card) {
        void store.confirm(card).then(redraw);
      }
    } else if (button.classList.contains("new-class")) {
      const name = window.prompt("name for the new class:");
      if (name) {
        void store.submitNewClass(sample, name.trim()).then(redraw);
      }
    }
    redraw(); // lock the card immediately
  });

  const tick = async () => {
    if (disposed) {
      return;
    }
    await store.poll();
    redraw();
    window.setTimeout(tick, POLL_MS);
  };
  void tick();

  return () => {
    disposed = true;
  };
}

declare global {
  interface Window {
    activepaceMount?: typeof mount;
  }
}

if (typeof window !== "undefined") {
  window.activepaceMount = mount;
  const root = typeof document !== "undefined" && document.getElementById("app");
  if (root) {
    mount(root);
  }
}
