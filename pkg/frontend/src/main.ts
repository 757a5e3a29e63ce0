/** Wires the API client, state transitions and views together. */

import { RequestFailed, ReviewApi } from "./api.js";
import {
  AppState,
  afterDecision,
  editBuffer,
  initialState,
  onConflict,
  onTransportError,
  openItem,
  openItemOf,
  resolveConflict,
  withPreview,
  withQueue,
  withStats,
} from "./state.js";
import { renderBanner, renderEditor, renderQueue, renderStats } from "./view.js";

const api = new ReviewApi("");
let state: AppState = initialState();

function render(): void {
  renderBanner(state, byId("banner"), () => void refresh());
  renderQueue(state, byId("queue"), (id) => {
    state = openItem(state, id);
    render();
  });
  renderEditor(state, byId("editor"), {
    onBuffer: (text) => {
      state = editBuffer(state, text);
      // no rerender: the textarea already holds the text; preview panel
      // refreshes on the next rescore
    },
    onRescore: () => void rescore(),
    onAccept: () => void decide("accept"),
    onReject: () => void decide("reject"),
    onReload: () => void reload(),
  });
  renderStats(state, byId("stats"));
}

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function transport(error: unknown): void {
  const message = error instanceof Error ? error.message : String(error);
  state = onTransportError(state, message);
  render();
}

async function refresh(): Promise<void> {
  try {
    const [queue, stats] = await Promise.all([api.queue(), api.stats()]);
    state = withStats(withQueue(state, queue.items, queue.page, queue.total), stats);
    render();
  } catch (error) {
    transport(error);
  }
}

async function rescore(): Promise<void> {
  const item = openItemOf(state);
  if (!item) return;
  try {
    const scores = await api.rescore(item.caption_id, state.editBuffer);
    state = withPreview(state, scores);
    render();
  } catch (error) {
    if (error instanceof RequestFailed && !error.isConflict) {
      state = onTransportError(state, error.message);
      render();
      return;
    }
    transport(error);
  }
}

async function decide(kind: "accept" | "reject"): Promise<void> {
  const item = openItemOf(state);
  if (!item) return;
  try {
    if (kind === "accept") {
      await api.accept(item.caption_id, state.editBuffer, item.revision);
    } else {
      await api.reject(item.caption_id, item.revision);
    }
    state = afterDecision(state, item.caption_id);
    render();
    const stats = await api.stats();
    state = withStats(state, stats);
    render();
  } catch (error) {
    if (error instanceof RequestFailed && error.isConflict) {
      state = onConflict(state);
      render();
      return;
    }
    transport(error);
  }
}

async function reload(): Promise<void> {
  try {
    const queue = await api.queue();
    state = resolveConflict(state, queue.items);
    render();
  } catch (error) {
    transport(error);
  }
}

void refresh();
